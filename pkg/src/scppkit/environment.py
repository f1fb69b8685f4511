"""Boundary processes around the transformed classes.

Bounds restrict the values the environment may offer, stubs answer calls
with any bounded value, custom FSMs are handwritten abstractions and the
top interface drives the target class.  ``build_composition`` wires all
of them into one closed system for exploration.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from . import scpp as S
from .engine import EngineError, Env, ProcessState, run_constructor
from .frontend.symbols import GLOBAL_NAMESPACE
from .scpp import (VOID, Action, ActionKind, Boolean, EnumType, LocalRef, Number, OrderedSet,
                   Polarity, PType, StringType)

VALUE_TYPES = ("Number", "Boolean", "Void", "OrderedSet", "PType", "Enum", "String", "Unknown")


class ConfigError(Exception):
    """The project or composition is inconsistent."""


# ----------------------------------------------------------------- bounds


@dataclass(frozen=True)
class BoundedType:
    value_type: str
    ranges: tuple = ()  # (lo, hi, step) triples for Number
    constants: tuple = ()  # extra integers for Number
    allow_true: bool = True
    allow_false: bool = True
    enum: Optional[str] = None
    sizes: tuple = ()
    element: Optional["BoundedType"] = None
    category: Optional[str] = None
    literals: tuple = ()

    def __post_init__(self):
        if self.value_type not in VALUE_TYPES:
            raise ConfigError(f"unknown value type '{self.value_type}'")
        for lo, hi, step in self.ranges:
            if step <= 0 or lo > hi:
                raise ConfigError(f"bad range ({lo}, {hi}, {step}): need step > 0 and lo <= hi")
        if self.value_type == "OrderedSet" and self.element is None:
            raise ConfigError("OrderedSet bound needs an element bound")


def number_bound(*ranges, constants=()) -> BoundedType:
    return BoundedType("Number", tuple(ranges), tuple(constants))


def bool_bound(allow_true=True, allow_false=True) -> BoundedType:
    return BoundedType("Boolean", allow_true=allow_true, allow_false=allow_false)


VOID_BOUND = BoundedType("Void")


def enumerate_bound(b: BoundedType, categories: dict | None = None, enums: dict | None = None) -> list:
    """All values admitted by ``b`` in canonical order, without duplicates."""
    categories = categories or {}
    enums = enums or {}
    match b.value_type:
        case "Unknown":
            raise ConfigError("user input required: the value type is unknown, declare a bound")
        case "Void":
            out = [VOID]
        case "Number":
            ints = set(b.constants)
            for lo, hi, step in b.ranges:
                ints.update(range(lo, hi + 1, step))
            out = [Number(i) for i in sorted(ints)]
        case "Boolean":
            out = [Boolean(v) for v, ok in ((False, b.allow_false), (True, b.allow_true)) if ok]
        case "Enum":
            if b.enum not in enums:
                raise ConfigError(f"unknown enum '{b.enum}'")
            out = [EnumType(lit) for lit in enums[b.enum]]
        case "String":
            out = [StringType(s) for s in sorted(set(b.literals))]
        case "PType":
            if b.category not in categories:
                raise ConfigError(f"unknown category '{b.category}'")
            out = [PType(p) for p in sorted(set(categories[b.category]))]
        case "OrderedSet":
            elems = enumerate_bound(b.element, categories, enums)
            out = []
            for n in sorted(set(b.sizes)):
                if n < 0:
                    raise ConfigError(f"negative list size {n}")
                out.extend(OrderedSet(tuple(c)) for c in itertools.product(elems, repeat=n))
    if not out:
        raise ConfigError(f"bound of type {b.value_type} admits no value")
    return out


def is_within_bounds(v, b: BoundedType, categories=None, enums=None) -> bool:
    return v in enumerate_bound(b, categories, enums)


# ------------------------------------------------------------------ stubs


@dataclass(frozen=True)
class StubMethod:
    return_bound: BoundedType
    can_throw: bool = False


@dataclass(frozen=True)
class StubSpec:
    proc: str
    methods: dict = field(default_factory=dict)  # func -> StubMethod
    fields: dict = field(default_factory=dict)  # var -> BoundedType


@dataclass(frozen=True)
class Responding:
    """A stub or FSM that accepted a call and still owes the answer."""
    func: str
    lras: tuple
    answers: tuple  # bottom-side return/throw labels paired with next FSM state
    resume: object = None


def stub_step(spec: StubSpec, offer: Action, categories=None, enums=None) -> list:
    """Bottom-side answers of a stub to a top-side request.

    Calls yield every bounded return plus an optional throw; the caller
    receives them through ``Responding`` in the composed system.  The stub
    itself never changes state.
    """
    p = spec.proc
    match offer.kind:
        case ActionKind.CALL:
            m = spec.methods.get(offer.func)
            if m is None:
                raise ConfigError(f"stub {p} has no return bound for '{offer.func}'")
            out = [S.return_action(Polarity.BOTTOM, p, offer.func, v, offer.lras)
                   for v in enumerate_bound(m.return_bound, categories, enums)]
            if m.can_throw:
                out.append(S.throw_action(Polarity.BOTTOM, p, offer.func, offer.lras))
            return out
        case ActionKind.LOAD:
            b = spec.fields.get(offer.var)
            if b is None:
                raise ConfigError(f"stub {p} has no load bound for field '{offer.var}'")
            return [S.load_action(Polarity.BOTTOM, p, offer.var, v) for v in enumerate_bound(b, categories, enums)]
        case ActionKind.STORE:
            return [S.store_action(Polarity.BOTTOM, p, offer.var, offer.value)]
    raise ConfigError(f"stub {p} cannot accept {S.render_action(offer)}")


# -------------------------------------------------------------- custom FSM


@dataclass(frozen=True)
class FsmTransition:
    source: str
    target: str
    kind: ActionKind  # CALL, LOAD or STORE
    name: str  # function or field
    args: Optional[tuple] = None  # call argument pattern, None matches any
    value: object = None  # load value, or store pattern (None matches any)
    throws: bool = False
    result: object = VOID


@dataclass(frozen=True)
class CustomFsm:
    proc: str
    states: tuple
    initial: str
    transitions: tuple

    def __post_init__(self):
        known = set(self.states)
        if self.initial not in known:
            raise ConfigError(f"FSM {self.proc}: unknown initial state '{self.initial}'")
        for t in self.transitions:
            if t.source not in known or t.target not in known:
                raise ConfigError(f"FSM {self.proc}: transition uses an undeclared state")


def fsm_step(fsm: CustomFsm, state: str, offer: Action) -> list:
    """Matching transitions as (bottom label, next state) pairs.

    For calls the label is the eventual answer (return or throw); the
    composition first synchronizes the call, then the answer.
    """
    out = []
    for t in fsm.transitions:
        if t.source != state or t.kind != offer.kind or t.name != (offer.func or offer.var):
            continue
        match t.kind:
            case ActionKind.CALL:
                if t.args is not None and tuple(t.args) != tuple(offer.args):
                    continue
                if t.throws:
                    label = S.throw_action(Polarity.BOTTOM, fsm.proc, offer.func, offer.lras)
                else:
                    label = S.return_action(Polarity.BOTTOM, fsm.proc, offer.func, t.result, offer.lras)
            case ActionKind.LOAD:
                label = S.load_action(Polarity.BOTTOM, fsm.proc, offer.var, t.value)
            case ActionKind.STORE:
                if t.value is not None and t.value != offer.value:
                    continue
                label = S.store_action(Polarity.BOTTOM, fsm.proc, offer.var, offer.value)
        out.append((label, t.target))
    return out


# ------------------------------------------------------------ top interface


@dataclass(frozen=True)
class TopFunction:
    arg_bounds: tuple
    throws_terminates: bool = False


@dataclass(frozen=True)
class TopField:
    loadable: bool = True
    store_bound: Optional[BoundedType] = None


@dataclass(frozen=True)
class TopInterfaceSpec:
    target: str
    functions: dict = field(default_factory=dict)  # func -> TopFunction
    fields: dict = field(default_factory=dict)  # var -> TopField
    script: Optional[tuple] = None  # fixed (func, args) sequence instead of free calls


def top_call(target: str, func: str, vs, by_ref) -> Action:
    """call_func_t for a top-level call; by-ref positions get synthetic LRAs."""
    args, lras = [], []
    for i, (v, ref) in enumerate(zip(vs, by_ref)):
        if ref:
            name = f"__top{i}"
            args.append(LocalRef(name))
            lras.append((name, v))
        else:
            args.append(v)
    return S.call_action(Polarity.TOP, target, func, tuple(args), tuple(lras))


def top_interface_step(spec: TopInterfaceSpec, model, target_globals: Env | None = None,
                       categories=None, enums=None) -> list:
    """Top-side offers of an idle top interface in canonical order."""
    offers = []
    for f in sorted(spec.functions):
        fs = spec.functions[f]
        if f not in model.get_prog:
            raise ConfigError(f"visible function '{f}' is not defined on {model.class_name}")
        refs = model.param_refs(f)
        if len(fs.arg_bounds) != len(refs):
            raise ConfigError(f"'{f}' takes {len(refs)} argument(s) but {len(fs.arg_bounds)} bound(s) are given")
        domains = [enumerate_bound(b, categories, enums) for b in fs.arg_bounds]
        for vs in itertools.product(*domains):
            offers.append(top_call(spec.target, f, vs, refs))
    for x in sorted(spec.fields):
        tf = spec.fields[x]
        if tf.loadable:
            v = target_globals.get(x) if target_globals is not None else None
            offers.append(S.load_action(Polarity.TOP, spec.target, x, v))
        if tf.store_bound is not None:
            for v in enumerate_bound(tf.store_bound, categories, enums):
                offers.append(S.store_action(Polarity.TOP, spec.target, x, v))
    return offers


# -------------------------------------------------------------- composition


@dataclass(frozen=True)
class Transformed:
    model: object  # ClassModel
    globals: Env


@dataclass(frozen=True)
class Stub:
    spec: StubSpec


@dataclass(frozen=True)
class Custom:
    fsm: CustomFsm


ALLOW_SET = ("call_func", "return_func", "throw_func", "load_comm", "store_comm")
COMM_PAIRS = {f"{k}_t|{k}_b": ("load_comm" if k == "load" else "store_comm" if k == "store" else k)
              for k in ("call_func", "return_func", "throw_func", "load", "store")}


@dataclass
class Composition:
    target: str
    processes: dict  # proc -> Transformed | Stub | Custom
    top: TopInterfaceSpec
    categories: dict = field(default_factory=dict)
    enums: dict = field(default_factory=dict)
    hide: tuple = ()
    rename: tuple = ()

    def __post_init__(self):
        t = self.processes.get(self.target)
        if not isinstance(t, Transformed):
            raise ConfigError(f"target {self.target} must be a transformed process")
        for cat, members in self.categories.items():
            if not members:
                raise ConfigError(f"category '{cat}' is empty")
            for p in members:
                if p not in self.processes:
                    raise ConfigError(f"category '{cat}' names undeclared process '{p}'")
        # PType and EnumType render identically, so the names must not overlap
        clash = sorted(set(self.processes) & {lit for lits in self.enums.values() for lit in lits})
        if clash:
            raise ConfigError(f"process id '{clash[0]}' is also an enum literal")
        for p, proc in self.processes.items():
            if isinstance(proc, Transformed):
                for x, v in proc.globals.items():
                    if isinstance(v, PType) and v.proc not in self.processes:
                        raise ConfigError(f"{p}.{x} refers to undeclared process '{v.proc}'")

    @property
    def proc_ids(self) -> tuple:
        return tuple(sorted(self.processes))

    def initial_states(self) -> tuple:
        out = []
        for p in self.proc_ids:
            proc = self.processes[p]
            if isinstance(proc, Transformed):
                out.append(ProcessState(p, proc.globals))
            elif isinstance(proc, Custom):
                out.append(proc.fsm.initial)
            else:
                out.append(None)
        return tuple(out)


def value_from_json(v, enums: dict | None = None):
    """Plain JSON to SCPP values: int, bool, null, list, string, {"enum"} or {"proc"}."""
    match v:
        case bool():
            return Boolean(v)
        case int():
            return Number(v)
        case None:
            return VOID
        case str():
            return StringType(v)
        case list():
            return OrderedSet(tuple(value_from_json(x, enums) for x in v))
        case {"enum": lit}:
            if enums is not None and not any(lit in lits for lits in enums.values()):
                raise ConfigError(f"unknown enumerator '{lit}'")
            return EnumType(lit)
        case {"proc": p}:
            return PType(p)
    raise ConfigError(f"cannot interpret {v!r} as a value")


def value_to_json(v):
    match v:
        case Boolean(b):
            return b
        case Number(n):
            return n
        case S.VoidType():
            return None
        case StringType(s):
            return s
        case OrderedSet(items):
            return [value_to_json(x) for x in items]
        case EnumType(lit):
            return {"enum": lit}
        case PType(p):
            return {"proc": p}
    raise ConfigError(f"value {S.render_value(v)} has no JSON form")


def bound_from_json(d: dict) -> BoundedType:
    t = d["type"]
    match t:
        case "Number":
            ranges = tuple((r["lo"], r["hi"], r.get("step", 1)) for r in d.get("ranges", ()))
            return BoundedType("Number", ranges, tuple(d.get("constants", ())))
        case "Boolean":
            return bool_bound(d.get("allowTrue", True), d.get("allowFalse", True))
        case "Enum":
            return BoundedType("Enum", enum=d["enum"])
        case "OrderedSet":
            return BoundedType("OrderedSet", sizes=tuple(d["sizes"]), element=bound_from_json(d["element"]))
        case "PType":
            return BoundedType("PType", category=d["category"])
        case "String":
            return BoundedType("String", literals=tuple(d["literals"]))
    return BoundedType(t)


def _fsm_from_json(proc: str, d: dict, enums) -> CustomFsm:
    trans = []
    for t in d["transitions"]:
        src, dst = t["from"], t["to"]
        if "call" in t:
            args = None if "args" not in t else tuple(value_from_json(a, enums) for a in t["args"])
            throws = bool(t.get("throw", False))
            if not throws and "return" not in t:
                raise ConfigError(f"FSM {proc}: call transition for '{t['call']}' needs 'return' or 'throw'")
            result = VOID if throws else value_from_json(t["return"], enums)
            trans.append(FsmTransition(src, dst, ActionKind.CALL, t["call"], args, throws=throws, result=result))
        elif "load" in t:
            trans.append(FsmTransition(src, dst, ActionKind.LOAD, t["load"], value=value_from_json(t["value"], enums)))
        else:
            pattern = value_from_json(t["value"], enums) if "value" in t else None
            trans.append(FsmTransition(src, dst, ActionKind.STORE, t["store"], value=pattern))
    return CustomFsm(proc, tuple(d["states"]), d["initial"], tuple(trans))


def _stub_from_json(proc: str, d: dict) -> StubSpec:
    methods = {f: StubMethod(bound_from_json(m["returnBound"]), m.get("canThrow", False))
               for f, m in d.get("methods", {}).items()}
    fields = {x: bound_from_json(b) for x, b in d.get("fields", {}).items()}
    return StubSpec(proc, methods, fields)


def _instantiate(proc, inst, models, enums) -> Transformed:
    cls = inst.get("class", proc)
    model = models.get(cls)
    if model is None:
        raise ConfigError(f"instance {proc}: class '{cls}' was not transformed")
    g = Env()
    members = inst.get("members", {})
    for m in model.members:
        if m not in members:
            raise ConfigError(f"instance {proc}: member '{m}' is not wired to a process")
        g = g.set(m, PType(members[m]))
    for m in members:
        if m not in model.members:
            raise ConfigError(f"instance {proc}: class {cls} has no member '{m}'")
    try:
        g = run_constructor(model, proc, g)
    except EngineError as e:
        raise ConfigError(f"instance {proc}: {e}") from None
    for x, v in inst.get("fields", {}).items():
        if x not in model.fields:
            raise ConfigError(f"instance {proc}: class {cls} has no field '{x}'")
        g = g.set(x, value_from_json(v, enums))
    return Transformed(model, g)


def build_composition(project: dict, models: dict) -> Composition:
    """Instantiate every process of a (validated) project document."""
    target_cls = project["targetClass"]
    target = project.get("targetProcId", target_cls)
    enums = {}
    for m in models.values():
        enums.update(m.enums)
    instances = dict(project.get("instances", {}))
    if target not in instances:
        instances[target] = {"kind": "transformed", "class": target_cls}
    processes = {}
    for proc, inst in sorted(instances.items()):
        if proc == GLOBAL_NAMESPACE:
            raise ConfigError(f"'{GLOBAL_NAMESPACE}' is configured through globalProcess")
        kind = inst.get("kind", "transformed")
        if kind == "transformed":
            processes[proc] = _instantiate(proc, inst, models, enums)
        elif kind == "stub":
            processes[proc] = Stub(_stub_from_json(proc, inst))
        else:
            processes[proc] = Custom(_fsm_from_json(proc, inst["fsm"], enums))
    gp = project.get("globalProcess")
    if gp is not None:
        if gp.get("kind", "stub") == "stub":
            processes[GLOBAL_NAMESPACE] = Stub(_stub_from_json(GLOBAL_NAMESPACE, gp))
        else:
            processes[GLOBAL_NAMESPACE] = Custom(_fsm_from_json(GLOBAL_NAMESPACE, gp["fsm"], enums))
    if not isinstance(processes[target], Transformed) or processes[target].model.class_name != target_cls:
        raise ConfigError(f"target {target} must be a transformed instance of {target_cls}")
    ti = project.get("topInterface", {})
    funcs = {f: TopFunction(tuple(bound_from_json(b) for b in spec.get("argBounds", ())),
                            spec.get("throwsTerminates", False))
             for f, spec in ti.get("functions", {}).items()}
    flds = {x: TopField(spec.get("loadable", True),
                        bound_from_json(spec["storeBound"]) if "storeBound" in spec else None)
            for x, spec in ti.get("fields", {}).items()}
    script = None
    if "script" in ti:
        script = tuple((c["func"], tuple(value_from_json(a, enums) for a in c.get("args", ())))
                       for c in ti["script"])
    top = TopInterfaceSpec(target, funcs, flds, script)
    return Composition(target, processes, top, dict(project.get("categories", {})), enums,
                       tuple(project.get("hide", ())),
                       tuple((r["pattern"], r["replacement"]) for r in project.get("rename", ())))
