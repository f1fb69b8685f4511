import copy
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import FIXTURES, read_fixture
from scppkit import scpp as S
from scppkit.environment import (VOID_BOUND, BoundedType, ConfigError, CustomFsm, FsmTransition, StubMethod,
                                 StubSpec, TopField, TopFunction, TopInterfaceSpec, Transformed, bool_bound,
                                 build_composition, enumerate_bound, fsm_step, is_within_bounds, number_bound,
                                 stub_step, top_interface_step, value_from_json, value_to_json)
from scppkit.pipeline import generate_from_source, models_for
from scppkit.scpp import ActionKind, Boolean, EnumType, Number, OrderedSet, Polarity, PType, StringType
from scppkit.statespace import export_aut, minimize

ACT = number_bound((-1, -1, 1), (1, 1, 1))


def test_enumerate_examples():
    sets = enumerate_bound(BoundedType("OrderedSet", sizes=(1,), element=number_bound((0, 10, 1))))
    assert sets == [OrderedSet((Number(i),)) for i in range(11)]
    assert enumerate_bound(bool_bound()) == [Boolean(False), Boolean(True)]
    assert enumerate_bound(ACT) == [Number(-1), Number(1)]


def test_enumerate_other_types():
    assert enumerate_bound(number_bound((0, 10, 5), constants=(7, 5))) == [Number(0), Number(5), Number(7),
                                                                            Number(10)]
    assert enumerate_bound(bool_bound(allow_false=False)) == [Boolean(True)]
    assert enumerate_bound(VOID_BOUND) == [S.VOID]
    enums = {"Color": ("Red", "Green")}
    assert enumerate_bound(BoundedType("Enum", enum="Color"), enums=enums) == [EnumType("Red"), EnumType("Green")]
    cats = {"acts": ["B", "A", "B"]}
    assert enumerate_bound(BoundedType("PType", category="acts"), cats) == [PType("A"), PType("B")]
    assert enumerate_bound(BoundedType("String", literals=("b", "a"))) == [StringType("a"), StringType("b")]
    pairs = enumerate_bound(BoundedType("OrderedSet", sizes=(0, 2), element=bool_bound()))
    assert len(pairs) == 5 and pairs[0] == OrderedSet(())


@pytest.mark.parametrize("bound, msg", [
    (BoundedType("Unknown"), "user input required"),
    (bool_bound(False, False), "admits no value"),
    (BoundedType("Enum", enum="Nope"), "unknown enum"),
    (BoundedType("PType", category="nope"), "unknown category"),
])
def test_enumerate_errors(bound, msg):
    with pytest.raises(ConfigError, match=msg):
        enumerate_bound(bound)


def test_bad_bounds_rejected():
    with pytest.raises(ConfigError):
        number_bound((3, 1, 1))
    with pytest.raises(ConfigError):
        BoundedType("OrderedSet", sizes=(1,))
    with pytest.raises(ConfigError):
        BoundedType("Float")


def test_is_within_bounds():
    assert not is_within_bounds(Number(0), ACT)
    assert is_within_bounds(Number(1), ACT)
    assert not is_within_bounds(Boolean(True), ACT)


ranges = st.lists(st.tuples(st.integers(-20, 20), st.integers(0, 10), st.integers(1, 4)), min_size=1, max_size=3)


@given(ranges, st.lists(st.integers(-30, 30), max_size=3))
def test_number_enumeration_is_sorted_and_exact(rs, consts):
    b = number_bound(*[(lo, lo + w, step) for lo, w, step in rs], constants=consts)
    vals = [v.value for v in enumerate_bound(b)]
    assert vals == sorted(set(vals))
    expected = set(consts)
    for lo, w, step in rs:
        expected.update(range(lo, lo + w + 1, step))
    assert set(vals) == expected


def top(kind, proc, func=None, var=None, args=(), value=None):
    return S.Action(Polarity.TOP, kind, proc, func=func, var=var, args=tuple(args), value=value)


def test_stub_step():
    spec = StubSpec("L", {"lock": StubMethod(bool_bound()), "f": StubMethod(VOID_BOUND, True)},
                    {"x": number_bound((0, 0, 1))})
    rets = stub_step(spec, top(ActionKind.CALL, "L", "lock"))
    assert [S.render_action(a) for a in rets] == ["return_func_b(L,lock,false,{})", "return_func_b(L,lock,true,{})"]
    both = stub_step(spec, top(ActionKind.CALL, "L", "f"))
    assert [S.render_action(a) for a in both] == ["return_func_b(L,f,void,{})", "throw_func_b(L,f,{})"]
    [load] = stub_step(spec, top(ActionKind.LOAD, "L", var="x"))
    assert S.render_action(load) == "load_b(L,x,0)"
    with pytest.raises(ConfigError, match="no return bound"):
        stub_step(spec, top(ActionKind.CALL, "L", "g"))


def test_stub_answers_keep_lras():
    spec = StubSpec("L", {"f": StubMethod(VOID_BOUND)})
    offer = S.call_action(Polarity.TOP, "L", "f", [S.LocalRef("v")], [("v", Number(3))])
    [ret] = stub_step(spec, offer)
    assert ret.lras == (("v", Number(3)),)


def test_fsm_step():
    fsm = CustomFsm("L", ("free", "held"), "free", (
        FsmTransition("free", "held", ActionKind.CALL, "lock", result=Boolean(True)),
        FsmTransition("held", "held", ActionKind.CALL, "lock", result=Boolean(False)),
        FsmTransition("held", "free", ActionKind.CALL, "unlock", throws=True),
        FsmTransition("held", "free", ActionKind.STORE, "x", value=Number(1)),
    ))
    [(lbl, nxt)] = fsm_step(fsm, "free", top(ActionKind.CALL, "L", "lock"))
    assert S.render_action(lbl) == "return_func_b(L,lock,true,{})" and nxt == "held"
    [(lbl, nxt)] = fsm_step(fsm, "held", top(ActionKind.CALL, "L", "unlock"))
    assert lbl.kind is ActionKind.THROW and nxt == "free"
    assert fsm_step(fsm, "free", top(ActionKind.CALL, "L", "unlock")) == []
    assert fsm_step(fsm, "held", top(ActionKind.STORE, "L", var="x", value=Number(2))) == []
    with pytest.raises(ConfigError):
        CustomFsm("L", ("a",), "b", ())


@pytest.fixture(scope="module")
def suspension():
    return models_for(read_fixture("suspension.moo"))


def test_top_interface_offers(suspension):
    spec = TopInterfaceSpec("SC", {"movePlatform": TopFunction((bool_bound(),))})
    offers = top_interface_step(spec, suspension["SuspensionController"])
    assert [S.render_action(o) for o in offers] == ["call_func_t(SC,movePlatform,[false],{})",
                                                    "call_func_t(SC,movePlatform,[true],{})"]
    assert top_interface_step(TopInterfaceSpec("SC"), suspension["SuspensionController"]) == []


def test_top_interface_fields_and_arity(suspension):
    act = suspension["Actuator"]
    spec = TopInterfaceSpec("A", {}, {"length": TopField(True, number_bound((5, 5, 1)))})
    offers = top_interface_step(spec, act)
    assert [o.kind for o in offers] == [ActionKind.LOAD, ActionKind.STORE]
    with pytest.raises(ConfigError, match="takes 1 argument"):
        top_interface_step(TopInterfaceSpec("A", {"move": TopFunction(())}), act)
    with pytest.raises(ConfigError, match="not defined"):
        top_interface_step(TopInterfaceSpec("A", {"grow": TopFunction(())}), act)


def test_top_level_ref_arguments_get_synthetic_lras():
    models = models_for("class A { public: void f(int &r, int v) { r = v; } };")
    spec = TopInterfaceSpec("A", {"f": TopFunction((number_bound((1, 1, 1)), number_bound((2, 2, 1))))})
    [offer] = top_interface_step(spec, models["A"])
    assert S.render_action(offer) == "call_func_t(A,f,[&__top0,2],{__top0=1})"


def project(name):
    return json.loads((FIXTURES / name).read_text())


def test_build_suspension_composition(suspension):
    comp = build_composition(project("suspension.json"), suspension)
    assert comp.proc_ids == ("ActuatorModel1", "ActuatorModel2", "SuspensionController")
    ctl = comp.processes["SuspensionController"]
    assert ctl.globals.get("act1") == PType("ActuatorModel1")
    assert comp.processes["ActuatorModel1"].globals.get("length") == Number(0)


def test_single_class_composition():
    models = models_for(read_fixture("actuator.moo"))
    comp = build_composition(project("actuator.json"), models)
    assert list(comp.processes) == ["Actuator1"] and isinstance(comp.processes["Actuator1"], Transformed)
    assert comp.top.functions["move"].arg_bounds == (ACT,)


def test_stubbed_target_rejected():
    models = models_for(read_fixture("actuator.moo"))
    proj = project("actuator.json")
    proj["instances"] = {"Actuator1": {"kind": "stub", "methods": {"move": {"returnBound": {"type": "Void"}}}}}
    with pytest.raises(ConfigError, match="must be a transformed"):
        build_composition(proj, models)


@pytest.mark.parametrize("edit, msg", [
    (lambda p: p["instances"]["SuspensionController"]["members"].pop("act2"), "not wired"),
    (lambda p: p["instances"]["SuspensionController"]["members"].update(act3="X"), "no member"),
    (lambda p: p["instances"]["ActuatorModel1"].update(fields={"width": 1}), "no field"),
    (lambda p: p["instances"]["ActuatorModel1"].update({"class": "Nope"}), "not transformed"),
    (lambda p: p["instances"]["SuspensionController"]["members"].update(act2="Ghost"), "undeclared process"),
    (lambda p: p.update(categories={"c": ["Ghost"]}), "undeclared process"),
])
def test_composition_errors(suspension, edit, msg):
    proj = copy.deepcopy(project("suspension.json"))
    edit(proj)
    with pytest.raises(ConfigError, match=msg):
        build_composition(proj, suspension)


def test_field_override_after_constructor():
    models = models_for(read_fixture("actuator.moo"))
    proj = project("actuator.json")
    proj["instances"] = {"Actuator1": {"kind": "transformed", "class": "Actuator", "fields": {"length": 3}}}
    comp = build_composition(proj, models)
    assert comp.processes["Actuator1"].globals.get("length") == Number(3)


def test_enum_literal_clashing_with_process():
    models = models_for("enum E { A1 }; class A { public: void f() {} };")
    with pytest.raises(ConfigError, match="also an enum literal"):
        build_composition({"source": "x", "targetClass": "A", "targetProcId": "A1"}, models)


@given(st.recursive(
    st.one_of(st.integers(-5, 5), st.booleans(), st.none(), st.text(max_size=3),
              st.sampled_from(["Red", "Green"]).map(lambda s: {"enum": s}),
              st.sampled_from(["P", "Q"]).map(lambda s: {"proc": s})),
    lambda inner: st.lists(inner, max_size=3), max_leaves=6))
def test_value_json_round_trip(v):
    assert value_to_json(value_from_json(v)) == v


# ------------------------------------------------------ composed shapes

LOCK_FSM = {
    "kind": "custom",
    "fsm": {
        "states": ["free", "held"], "initial": "free",
        "transitions": [
            {"from": "free", "to": "held", "call": "lock", "return": True},
            {"from": "held", "to": "held", "call": "lock", "return": False},
        ],
    },
}


def test_custom_fsm_drives_client():
    proj = project("lock.json")
    proj["instances"]["LockStub"] = LOCK_FSM
    lts = minimize(generate_from_source(proj, read_fixture("lock.moo"), "lock.moo").lts, "branching")
    text = export_aut(lts)
    # first acquire succeeds, every later one fails
    assert text.count("return_func(Client,acquire,true,{})") == 1
    assert "return_func(Client,acquire,false,{})" in text


def test_global_namespace_stub():
    src = "int ticks(); class A { public: int f() { return ticks(); } };"
    proj = {"source": "x", "targetClass": "A",
            "globalProcess": {"kind": "stub", "methods": {"ticks": {"returnBound": {
                "type": "Number", "ranges": [{"lo": 0, "hi": 2}]}}}},
            "topInterface": {"functions": {"f": {"argBounds": []}}}}
    lts = generate_from_source(proj, src).lts
    rets = sorted({lbl for _, lbl, _ in lts.transitions if lbl.startswith("return_func(A,")})
    assert rets == ["return_func(A,f,0,{})", "return_func(A,f,1,{})", "return_func(A,f,2,{})"]


def test_empty_top_interface_deadlocks():
    proj = {"source": "x", "targetClass": "Actuator"}
    lts = generate_from_source(proj, read_fixture("actuator.moo")).lts
    assert (lts.n_states, lts.transitions) == (1, ())


def test_throws_terminates_halts_top():
    proj = project("lock.json")
    proj["instances"]["LockStub"]["methods"]["lock"]["canThrow"] = True
    proj["topInterface"]["functions"]["acquire"]["throwsTerminates"] = True
    lts = generate_from_source(proj, read_fixture("lock.moo")).lts
    succ = lts.successors()
    ends = [d for _, lbl, d in lts.transitions if lbl.startswith("throw_func(Client")]
    assert ends and all(succ[d] == [] for d in ends)
