import json
import re
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES, generate_oracle, oracle_names
from scppkit.environment import ALLOW_SET
from scppkit.pipeline import generate
from scppkit.statespace import (TAU, AutFormatError, LimitExceeded, Limits, Lts, bisimilar, compare,
                                dump_structured, explore, export_aut, hide_actions, import_aut, minimize,
                                minimize_branching_bisim, minimize_strong_bisim, reachable, rename_actions,
                                weak_trace_equivalent)
from scppkit.statespace.reduce import _tarjan, branching_partition, strong_partition


def gen(name, **kw):
    return generate(json.loads((FIXTURES / name).read_text()), FIXTURES / name, **kw)


def lts(n, *trans, initial=0):
    return Lts(n, initial, tuple(trans))


# ------------------------------------------------------------------- aut

def test_empty_lts_aut():
    assert export_aut(lts(1)) == "des (0,0,1)\n"
    assert import_aut("des (0,0,1)\n") == lts(1)


def test_aut_export_is_sorted_and_quoted():
    a = lts(2, (1, "b", 0), (0, "a(x,[1],{})", 1), (0, "a(x,[1],{})", 1))
    assert export_aut(a) == 'des (0,2,2)\n(0,"a(x,[1],{})",1)\n(1,"b",0)\n'


def test_import_accepts_unquoted_labels():
    assert import_aut("des (0, 1, 2)\n(0, tau, 1)\n") == lts(2, (0, TAU, 1))


@pytest.mark.parametrize("text, msg", [
    ("", "line 1"),
    ("des 0 0 1\n", "line 1: malformed header"),
    ("des (0,1,2)\n(0,\"a\"\n", "line 2: malformed transition"),
    ("des (0,2,2)\n(0,\"a\",1)\n", "announces 2"),
    ("des (0,1,2)\n(0,\"a\",5)\n", "out of range"),
])
def test_import_errors(text, msg):
    with pytest.raises(AutFormatError, match=msg):
        import_aut(text)


def test_minimized_actuator_header():
    assert export_aut(minimize(gen("actuator.json").lts, "branching")).startswith("des (0,20,15)\n")


# ------------------------------------------------------- hide and rename

def test_hide_comm_data_actions():
    # member_fields reads and writes another object's field
    raw = generate_oracle("member_fields").lts
    assert any(lbl.startswith(("load_comm", "store_comm")) for _, lbl, _ in raw.transitions)
    hidden = hide_actions(raw, [r"(load_comm|store_comm)\(.*"])
    assert all(re.match(r"(call_func|return_func|throw_func)\(|tau$", lbl) for lbl in hidden.labels())


def test_hide_nothing_and_everything():
    a = gen("actuator.json").lts
    assert hide_actions(a, []) == a
    allt = hide_actions(a, [".*"])
    assert allt.labels() == {TAU} and allt.n_states == a.n_states
    assert len(allt.transitions) <= len(a.transitions)


def test_rename_to_short_labels():
    a = gen("actuator.json").lts
    r = rename_actions(a, [(r"call_func\(Actuator1,move,(\[.*\]),\{\}\)", r"call(move,\1)")])
    assert "call(move,[1])" in r.labels() and "call(move,[-1])" in r.labels()
    assert rename_actions(a, []) == a


def test_rename_first_rule_wins():
    a = lts(2, (0, "abc", 1))
    r = rename_actions(a, [("a.*", "first"), ("ab.*", "second")])
    assert r.labels() == {"first"}


def test_reachable_renumbers_bfs():
    a = lts(4, (2, "x", 3), (0, "a", 2), (3, "b", 0))
    assert reachable(a) == lts(3, (0, "a", 1), (1, "x", 2), (2, "b", 0))


def test_structured_dump():
    doc = json.loads(dump_structured(lts(2, (0, "call_func(P,f,[1],{})", 1))))
    assert doc["states"] == 2 and doc["initial"] == 0
    assert doc["transitions"][0]["action"] == {"action": "call_func", "payload": "P,f,[1],{}"}


# ----------------------------------------------------------- exploration

def test_limits_are_errors():
    with pytest.raises(LimitExceeded):
        gen_comp = gen("actuator.json").composition
        explore(gen_comp, Limits(max_states=10))


def test_depth_limit():
    with pytest.raises(LimitExceeded):
        explore(gen("actuator.json").composition, Limits(max_depth=3))


def test_exploration_is_deterministic():
    a = export_aut(gen("suspension.json").lts)
    b = export_aut(gen("suspension.json").lts)
    assert a == b


def _fixture_raw():
    yield "actuator", gen("actuator.json").exploration.lts
    yield "suspension", gen("suspension.json").exploration.lts
    yield "lock", gen("lock.json").exploration.lts
    for name in oracle_names():
        yield name, generate_oracle(name).exploration.lts


RAW = dict(_fixture_raw())
LABEL = re.compile(r"(\w+)\(([^,()]+),([^,()]+)")


@pytest.mark.parametrize("name", sorted(RAW))
def test_only_allowed_actions(name):
    for lbl in RAW[name].labels():
        assert lbl == TAU or lbl.split("(")[0] in ALLOW_SET, lbl


@pytest.mark.parametrize("name", sorted(RAW))
def test_calls_are_well_bracketed(name):
    """Every path pairs each call with a return or throw of the same function.

    Run to completion means a process answers its pending call before
    accepting another one, so the calls along a path form a proper nesting.
    """
    raw = RAW[name]
    succ = raw.successors()
    seen = set()
    work = [(raw.initial, ())]
    while work:
        s, stack = work.pop()
        if (s, stack) in seen:
            continue
        seen.add((s, stack))
        assert len(stack) < 50
        if not succ[s]:
            assert stack == (), f"deadlock inside a call at {s}: {stack}"
        for lbl, d in succ[s]:
            m = LABEL.match(lbl)
            nxt = stack
            if m and m.group(1) == "call_func":
                nxt = stack + ((m.group(2), m.group(3)),)
            elif m and m.group(1) in ("return_func", "throw_func"):
                assert stack and stack[-1] == (m.group(2), m.group(3)), f"{lbl} after {stack}"
                nxt = stack[:-1]
            work.append((d, nxt))


# ------------------------------------------------------------ reductions

def test_strong_collapses_duplicate_branches():
    a = lts(5, (0, "a", 1), (0, "a", 2), (1, "b", 3), (2, "b", 4))
    m = minimize_strong_bisim(a)
    assert (m.n_states, len(m.transitions)) == (3, 2)
    assert export_aut(minimize_strong_bisim(m)) == export_aut(m)


def test_branching_collapses_tau_chain():
    a = lts(5, (0, "a", 1), (1, TAU, 2), (2, TAU, 3), (3, "b", 4))
    m = minimize_branching_bisim(a)
    assert m == lts(3, (0, "a", 1), (1, "b", 2))


def test_branching_keeps_deciding_tau():
    # the tau from 0 discards the option of doing b, so it is not inert
    a = lts(4, (0, TAU, 1), (0, "b", 2), (1, "a", 3))
    assert minimize_branching_bisim(a) == lts(3, (0, "b", 1), (0, TAU, 2), (2, "a", 1))


def test_tau_loops_optional():
    a = lts(2, (0, TAU, 0), (0, "a", 1))
    assert minimize_branching_bisim(a) == lts(2, (0, "a", 1))
    assert minimize_branching_bisim(a, keep_tau_loops=True) == lts(2, (0, TAU, 0), (0, "a", 1))


def test_without_tau_branching_equals_strong():
    a = gen("actuator.json").lts
    visible = rename_actions(a, [("tau", "internal")])
    assert export_aut(minimize(visible, "branching")) == export_aut(minimize(visible, "strong"))


def test_actuator_quotient_keeps_traces():
    raw = gen("actuator.json").lts
    assert weak_trace_equivalent(raw, minimize_strong_bisim(raw)).equivalent
    assert minimize_branching_bisim(raw).n_states == 15


def test_unknown_relation():
    with pytest.raises(ValueError):
        minimize(lts(1), "weak")


def test_tarjan_orders_sinks_first():
    comps = _tarjan(4, [[1], [2], [1, 3], []])
    assert comps[0] == [3] and sorted(comps[1]) == [1, 2] and comps[2] == [0]


# --------------------------------------------------------- equivalences

def test_weak_trace_examples():
    raw = gen("actuator.json").lts
    assert weak_trace_equivalent(raw, minimize(raw, "branching")).equivalent
    assert weak_trace_equivalent(lts(1), lts(1)).equivalent
    zero = gen("actuator_zero.json").lts
    v = weak_trace_equivalent(raw, zero)
    assert not v.equivalent and v.accepted_by == "right"
    assert v.counterexample == ["call_func(Actuator1,move,[0],{})"]


def test_compare_relations():
    a = lts(3, (0, "a", 1), (0, "a", 2), (1, "b", 0))
    b = lts(2, (0, "a", 1), (1, "b", 0))
    assert compare(a, b, "weak-trace").equivalent
    v = compare(a, b, "strong")
    assert not v.equivalent and v.counterexample is None
    with pytest.raises(ValueError):
        compare(a, b, "failures")


# --------------------------------------------------- properties on LTSs

labels = st.sampled_from([TAU, TAU, "a", "b"])


@st.composite
def random_lts(draw, max_states=6):
    n = draw(st.integers(1, max_states))
    trans = draw(st.lists(st.tuples(st.integers(0, n - 1), labels, st.integers(0, n - 1)), max_size=3 * n))
    return Lts(n, 0, tuple(trans))


def naive_bisim(a: Lts, branching: bool) -> set:
    """Greatest fixpoint of the bisimulation conditions over state pairs."""
    succ = a.successors()
    n = a.n_states

    def tau_reach(t):
        out, stack = {t}, [t]
        while stack:
            u = stack.pop()
            for lbl, d in succ[u]:
                if lbl == TAU and d not in out:
                    out.add(d)
                    stack.append(d)
        return out

    closure = [tau_reach(t) for t in range(n)]
    rel = set(product(range(n), repeat=2))

    def matched(s, t):
        for lbl, s2 in succ[s]:
            if branching:
                if lbl == TAU and (s2, t) in rel:
                    continue
                if not any((s, t2) in rel and (s2, t3) in rel
                           for t2 in closure[t] for l3, t3 in succ[t2] if l3 == lbl):
                    return False
            elif not any(l3 == lbl and (s2, t3) in rel for l3, t3 in succ[t]):
                return False
        return True

    changed = True
    while changed:
        changed = False
        for s, t in sorted(rel):
            if not (matched(s, t) and matched(t, s)):
                rel.discard((s, t))
                changed = True
    return rel


def same_classes(block, rel, n):
    return all((block[s] == block[t]) == ((s, t) in rel) for s in range(n) for t in range(n))


@settings(max_examples=150)
@given(random_lts())
def test_strong_partition_matches_naive(a):
    assert same_classes(strong_partition(a), naive_bisim(a, False), a.n_states)


@settings(max_examples=150)
@given(random_lts())
def test_branching_partition_matches_naive(a):
    assert same_classes(branching_partition(a), naive_bisim(a, True), a.n_states)


@settings(max_examples=100)
@given(random_lts())
def test_reduction_sound_monotone_idempotent(a):
    s, b = minimize(a, "strong"), minimize(a, "branching")
    r = reachable(a)
    assert b.n_states <= s.n_states <= r.n_states
    assert weak_trace_equivalent(a, s).equivalent and weak_trace_equivalent(a, b).equivalent
    assert bisimilar(a, s, "strong") and bisimilar(a, b, "branching")
    for m, rel in ((s, "strong"), (b, "branching")):
        again = minimize(m, rel)
        assert again.n_states == m.n_states and bisimilar(again, m, "strong")


@given(random_lts())
def test_aut_round_trip(a):
    assert import_aut(export_aut(a)) == a


def weak_traces(a: Lts, k: int) -> set:
    succ = a.successors()
    out = set()
    frontier = {(a.initial, ())}
    seen = set()
    while frontier:
        nxt = set()
        for s, tr in frontier:
            if (s, tr) in seen:
                continue
            seen.add((s, tr))
            out.add(tr)
            for lbl, d in succ[s]:
                t2 = tr if lbl == TAU else tr + (lbl,)
                if len(t2) <= k:
                    nxt.add((d, t2))
        frontier = nxt
    return out


@settings(max_examples=150)
@given(random_lts(5), random_lts(5))
def test_weak_trace_matches_enumeration(a, b):
    k = 6
    ta, tb = weak_traces(a, k), weak_traces(b, k)
    v = weak_trace_equivalent(a, b)
    if v.equivalent:
        assert ta == tb
    else:
        cex = tuple(v.counterexample)
        assert (cex in ta) != (cex in tb)
        assert (cex in ta) == (v.accepted_by == "left")
        shortest = min(len(t) for t in ta ^ tb)
        assert len(cex) == shortest
