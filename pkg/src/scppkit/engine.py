"""Small-step semantics of transformed processes.

A process is either stable (no stack) or processing a call stack whose
bottom is the externally called function.  ``step_stable`` accepts an
incoming request, ``step_processing`` performs one step of the active
frame.  Steps are pure: states are immutable and successors are returned.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional

from . import scpp as S
from .scpp import (TAU, VOID, Action, ActionKind, Boolean, FieldRef, LambdaType, LocalRef,
                   Number, OrderedSet, Polarity, PType)

DEFAULT_MAX_FRAMES = 10_000


class EngineError(Exception):
    """A modeling error: the program cannot be executed further."""


class EvalError(EngineError):
    pass


class Env:
    """Immutable variable mapping that reads VoidType for unbound names."""

    __slots__ = ("_d", "_h")

    def __init__(self, items: Iterable | dict = ()):
        d = dict(items)
        self._d = {k: v for k, v in d.items() if v != VOID}
        self._h = None

    def get(self, key):
        return self._d.get(key, VOID)

    def set(self, key, value) -> "Env":
        d = dict(self._d)
        if value == VOID:
            d.pop(key, None)
        else:
            d[key] = value
        return Env(d)

    def items(self):
        return sorted(self._d.items())

    def as_dict(self) -> dict:
        return dict(self._d)

    def __contains__(self, key):
        return key in self._d

    def __eq__(self, other):
        return isinstance(other, Env) and self._d == other._d

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self._d.items()))
        return self._h

    def __repr__(self):
        return "{" + ", ".join(f"{k}={S.render_value(v)}" for k, v in self.items()) + "}"


# ------------------------------------------------------------------- LRAs


def make_lras(ids, sigma) -> tuple:
    get = sigma.get if hasattr(sigma, "get") else sigma
    return tuple((i, get(i) if not isinstance(sigma, dict) else sigma.get(i, VOID)) for i in ids)


def read_lra(var, lras):
    for k, v in lras:
        if k == var:
            return v
    raise EngineError(f"dangling local reference '{var}'")


def update_lra(var, value, lras) -> tuple:
    out = list(lras)
    for i, (k, _) in enumerate(out):
        if k == var:
            out[i] = (k, value)
            break
    return tuple(out)


def _lookup(sigma, key):
    return sigma.get(key) if isinstance(sigma, Env) else sigma.get(key, VOID)


def ret_refs_sigma(lras, sigma):
    for k, v in lras:
        if not isinstance(_lookup(sigma, k), (LocalRef, FieldRef)):
            if isinstance(sigma, Env):
                sigma = sigma.set(k, v)
            else:
                sigma = {**sigma, k: v}
    return sigma


def ret_refs_r(lras, sigma, outer) -> tuple:
    for k, v in lras:
        cur = _lookup(sigma, k)
        if isinstance(cur, LocalRef):
            outer = update_lra(cur.var, v, outer)
    return tuple(outer)


# -------------------------------------------------------------- states


@dataclass(frozen=True)
class Frame:
    prog: tuple
    result: Optional[str]  # None discards the returned value
    locals: Env
    refs: tuple = ()


@dataclass(frozen=True)
class ProcessState:
    proc: str
    globals: Env
    frames: tuple = ()  # top of stack first
    external: Optional[str] = None  # function called from outside
    throwing: bool = False
    pending: Optional[Action] = None  # request awaiting its response

    @property
    def stable(self) -> bool:
        return not self.frames

    @property
    def mode(self) -> str:
        if not self.frames:
            return "stable"
        return "throwing" if self.throwing else "processing"


@dataclass(frozen=True)
class Framebreak:
    pass


@dataclass(frozen=True)
class Caught:
    body: tuple
    rest: tuple


FRAMEBREAK = Framebreak()


def resolve_throw(prog) -> Framebreak | Caught:
    for i, s in enumerate(prog):
        if isinstance(s, S.Catch):
            return Caught(tuple(s.body), tuple(prog[i + 1:]))
    return FRAMEBREAK


def jump_to(flag: S.FlagKind, label: str, prog) -> tuple:
    for i, s in enumerate(prog):
        if isinstance(s, S.Flag) and s.flag == flag and s.label == label:
            return tuple(prog[i + 1:])
    raise EngineError(f"unmatched jump({flag.value}, {label})")


# ------------------------------------------------------------ evaluation


def _number(v, e):
    if not isinstance(v, Number):
        raise EvalError(f"expected a number in {S.pretty_expr(e)}, got {S.render_value(v)}")
    return v.value


def _bool(v, e):
    if not isinstance(v, Boolean):
        raise EvalError(f"expected a boolean in {S.pretty_expr(e)}, got {S.render_value(v)}")
    return v.value


def _checked(n, e):
    try:
        return Number(n)
    except OverflowError:
        raise EvalError(f"arithmetic overflow in {S.pretty_expr(e)}") from None


def _divide(a, b, e):
    if b == 0:
        raise EvalError(f"division by zero in {S.pretty_expr(e)}")
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def eval_expr(e, ps: ProcessState, frame: Frame | None = None):
    frame = frame if frame is not None else ps.frames[0]
    match e:
        case S.Const(v):
            return v
        case S.Read(S.Scope.LOCAL, x):
            return frame.locals.get(x)
        case S.Read(S.Scope.GLOBAL, x):
            return ps.globals.get(x)
        case S.Binary(op, l, r):
            a = eval_expr(l, ps, frame)
            b = eval_expr(r, ps, frame)
            match op:
                case "equals":
                    return Boolean(a == b)
                case "not_equals":
                    return Boolean(a != b)
                case "and":
                    return Boolean(_bool(a, e) and _bool(b, e))
                case "or":
                    return Boolean(_bool(a, e) or _bool(b, e))
            x, y = _number(a, e), _number(b, e)
            match op:
                case "plus":
                    return _checked(x + y, e)
                case "minus":
                    return _checked(x - y, e)
                case "multiply":
                    return _checked(x * y, e)
                case "divide":
                    return _checked(_divide(x, y, e), e)
                case "greater_than":
                    return Boolean(x > y)
                case "greater_equal":
                    return Boolean(x >= y)
                case "smaller_than":
                    return Boolean(x < y)
                case "smaller_equal":
                    return Boolean(x <= y)
        case S.Not(o):
            return Boolean(not _bool(eval_expr(o, ps, frame), e))
        case S.At(seq, idx):
            vs = eval_expr(seq, ps, frame)
            i = _number(eval_expr(idx, ps, frame), e)
            if not isinstance(vs, OrderedSet):
                raise EvalError(f"expected a list in {S.pretty_expr(e)}, got {S.render_value(vs)}")
            if not 0 <= i < len(vs.items):
                raise EvalError(f"index {i} out of range in {S.pretty_expr(e)}")
            return vs.items[i]
        case S.SelfRef():
            return PType(ps.proc)
        case S.RefField(owner, x):
            p = eval_expr(owner, ps, frame)
            if not isinstance(p, PType):
                raise EvalError(f"field owner is not a process in {S.pretty_expr(e)}, got {S.render_value(p)}")
            return FieldRef(p.proc, x)
        case S.InitLambda(params, copies, refs, body):
            lras, _ = _make_call_lras(copies, frame, ())
            return LambdaType(tuple(params), lras, tuple(refs), tuple(body))
        case S.InitList(items):
            return OrderedSet(tuple(eval_expr(i, ps, frame) for i in items))
    raise EvalError(f"cannot evaluate {e!r}")


def _make_call_lras(ids, frame: Frame, args: tuple) -> tuple[tuple, tuple]:
    """make_lras over the frame's locals, forwarding references held by the frame.

    A local that itself holds LocalRef(x) contributes the value of x from the
    frame's own LRAs, and arguments passing LocalRef(x) are redirected to it.
    """
    lras = []
    args = list(args)
    for i in ids:
        v = frame.locals.get(i)
        if isinstance(v, LocalRef):
            args = [LocalRef(i) if a == v else a for a in args]
            v = read_lra(v.var, frame.refs)
        lras.append((i, v))
    return tuple(lras), tuple(args)


# ----------------------------------------------------------------- steps


def initial_locals(model, func, vs) -> Env:
    if func not in model.get_prog:
        raise EngineError(f"unknown function '{func}' on class {model.class_name}")
    names = model.param_names(func)
    if len(names) != len(vs):
        raise EngineError(f"'{func}' expects {len(names)} argument(s), got {len(vs)}")
    return Env(zip(names, vs))


def step_stable(model, ps: ProcessState, offer: Action) -> list:
    """Accept a top-side request addressed to this stable process."""
    if not ps.stable:
        return []  # run to completion: busy processes accept nothing
    match offer.kind:
        case ActionKind.CALL:
            frame = Frame(tuple(model.get_prog.get(offer.func, ())), None,
                          initial_locals(model, offer.func, offer.args), tuple(offer.lras))
            label = S.call_action(Polarity.BOTTOM, ps.proc, offer.func, offer.args, offer.lras)
            return [(label, replace(ps, frames=(frame,), external=offer.func))]
        case ActionKind.LOAD:
            return [(S.load_action(Polarity.BOTTOM, ps.proc, offer.var, ps.globals.get(offer.var)), ps)]
        case ActionKind.STORE:
            label = S.store_action(Polarity.BOTTOM, ps.proc, offer.var, offer.value)
            return [(label, replace(ps, globals=ps.globals.set(offer.var, offer.value)))]
    raise EngineError(f"unexpected offer {S.render_action(offer)}")


def _with_top(ps: ProcessState, frame: Frame, **kw) -> ProcessState:
    return replace(ps, frames=(frame,) + ps.frames[1:], **kw)


def _advance(ps, frame, prog, **kw):
    return _with_top(ps, replace(frame, prog=tuple(prog)), **kw)


def _return(ps: ProcessState, value) -> tuple:
    frame = ps.frames[0]
    if len(ps.frames) == 1:
        label = S.return_action(Polarity.BOTTOM, ps.proc, ps.external, value, frame.refs)
        return label, replace(ps, frames=(), external=None, throwing=False)
    caller = ps.frames[1]
    locs = caller.locals
    if frame.result is not None:
        locs = locs.set(frame.result, value)
    new_caller = replace(caller, locals=ret_refs_sigma(frame.refs, locs),
                         refs=ret_refs_r(frame.refs, caller.locals, caller.refs))
    return TAU, replace(ps, frames=(new_caller,) + ps.frames[2:])


def _throw_step(ps: ProcessState) -> tuple:
    frame = ps.frames[0]
    res = resolve_throw(frame.prog)
    if isinstance(res, Caught):
        return TAU, _advance(ps, frame, res.body + res.rest, throwing=False)
    if len(ps.frames) == 1:
        label = S.throw_action(Polarity.BOTTOM, ps.proc, ps.external, frame.refs)
        return label, replace(ps, frames=(), external=None, throwing=False)
    # unwinding keeps writes made through references, like an ordinary return
    caller = ps.frames[1]
    new_caller = replace(caller, locals=ret_refs_sigma(frame.refs, caller.locals),
                         refs=ret_refs_r(frame.refs, caller.locals, caller.refs))
    return TAU, replace(ps, frames=(new_caller,) + ps.frames[2:])


def _push(ps, frame_after, new_frame, max_frames):
    frames = (new_frame, frame_after) + ps.frames[1:]
    if len(frames) > max_frames:
        raise EngineError(f"call stack of {ps.proc} exceeds {max_frames} frames")
    return replace(ps, frames=frames)


def step_processing(model, ps: ProcessState, max_frames: int = DEFAULT_MAX_FRAMES) -> list:
    """One step of a processing or throwing process.

    Returns a list with at most one (label, successor) pair.  The label is
    TAU, a top-side request (call, load or store), or a bottom-side
    return/throw that ends the external call.  Blocked processes return [].
    """
    if ps.stable or ps.pending is not None:
        return []
    if ps.throwing:
        return [_throw_step(ps)]
    frame = ps.frames[0]
    if not frame.prog:
        return [_return(ps, VOID)]
    head, rest = frame.prog[0], frame.prog[1:]
    ev = lambda e: eval_expr(e, ps, frame)  # noqa: E731
    match head:
        case S.Return(e):
            return [_return(ps, ev(e))]
        case S.Assign(S.Scope.LOCAL, y, e):
            return [(TAU, _with_top(ps, replace(frame, prog=rest, locals=frame.locals.set(y, ev(e)))))]
        case S.Assign(S.Scope.GLOBAL, y, e):
            return [(TAU, _advance(ps, frame, rest, globals=ps.globals.set(y, ev(e))))]
        case S.Ite(c, t, f):
            branch = t if _bool(ev(c), c) else f
            return [(TAU, _advance(ps, frame, tuple(branch) + rest))]
        case S.While(c, body):
            if _bool(ev(c), c):
                return [(TAU, _advance(ps, frame, tuple(body) + frame.prog))]
            return [(TAU, _advance(ps, frame, rest))]
        case S.Call(y, owner, f, args, refs):
            p = ev(owner)
            if not isinstance(p, PType):
                raise EvalError(f"call owner is not a process: {S.render_value(p)}")
            vs = tuple(ev(a) for a in args)
            lras, vs = _make_call_lras(refs, frame, vs)
            if p.proc == ps.proc:
                callee = Frame(tuple(model.get_prog.get(f, ())), y, initial_locals(model, f, vs), lras)
                return [(TAU, _push(ps, replace(frame, prog=rest), callee, max_frames))]
            req = S.call_action(Polarity.TOP, p.proc, f, vs, lras)
            return [(req, replace(ps, pending=req))]
        case S.Throw():
            return [(TAU, _advance(ps, frame, rest, throwing=True))]
        case S.Catch() | S.Flag():
            return [(TAU, _advance(ps, frame, rest))]
        case S.Jump(flag, label):
            return [(TAU, _advance(ps, frame, jump_to(flag, label, rest)))]
        case S.RefLoad(to, src):
            ref = ev(src)
            match ref:
                case FieldRef(p, x) if p == ps.proc:
                    return [(TAU, _with_top(ps, replace(frame, prog=rest, locals=frame.locals.set(to, ps.globals.get(x)))))]
                case FieldRef(p, x):
                    req = S.load_action(Polarity.TOP, p, x, None)
                    return [(req, replace(ps, pending=req))]
                case LocalRef(x):
                    v = read_lra(x, frame.refs)
                    return [(TAU, _with_top(ps, replace(frame, prog=rest, locals=frame.locals.set(to, v))))]
            raise EvalError(f"ref_load through a non-reference value {S.render_value(ref)}")
        case S.RefAssign(target, e):
            ref = ev(target)
            v = ev(e)
            match ref:
                case FieldRef(p, x) if p == ps.proc:
                    return [(TAU, _advance(ps, frame, rest, globals=ps.globals.set(x, v)))]
                case FieldRef(p, x):
                    return [(S.store_action(Polarity.TOP, p, x, v), _advance(ps, frame, rest))]
                case LocalRef(x):
                    return [(TAU, _with_top(ps, replace(frame, prog=rest, refs=update_lra(x, v, frame.refs))))]
            raise EvalError(f"ref_assign through a non-reference value {S.render_value(ref)}")
        case S.CallLambda(y, lam_var, args, refs):
            lam = frame.locals.get(lam_var)
            if not isinstance(lam, LambdaType):
                raise EngineError(f"'{lam_var}' does not hold a lambda: {S.render_value(lam)}")
            vs = tuple(ev(a) for a in args)
            if len(vs) != len(lam.params):
                raise EngineError(f"lambda '{lam_var}' expects {len(lam.params)} argument(s), got {len(vs)}")
            lras, vs = _make_call_lras(tuple(lam.ref_captures) + tuple(refs), frame, vs)
            locs = Env(lam.lras)
            for name, v in zip(lam.params, vs):
                locs = locs.set(name, v)
            for r in lam.ref_captures:
                locs = locs.set(r, LocalRef(r))
            callee = Frame(tuple(lam.body), y, locs, lras)
            return [(TAU, _push(ps, replace(frame, prog=rest), callee, max_frames))]
    raise EngineError(f"cannot execute {S.pretty_stmt(head).strip()}")


# ------------------------------------------------------------- resumption


def resume_return(ps: ProcessState, value, lras) -> ProcessState:
    frame = ps.frames[0]
    call = frame.prog[0]
    locs = frame.locals.set(call.result, value)
    new = replace(frame, prog=frame.prog[1:], locals=ret_refs_sigma(lras, locs),
                  refs=ret_refs_r(lras, frame.locals, frame.refs))
    return replace(ps, frames=(new,) + ps.frames[1:], pending=None)


def resume_throw(ps: ProcessState, lras) -> ProcessState:
    frame = ps.frames[0]
    new = replace(frame, prog=frame.prog[1:], locals=ret_refs_sigma(lras, frame.locals),
                  refs=ret_refs_r(lras, frame.locals, frame.refs))
    return replace(ps, frames=(new,) + ps.frames[1:], pending=None, throwing=True)


def resume_load(ps: ProcessState, value) -> ProcessState:
    frame = ps.frames[0]
    load = frame.prog[0]
    new = replace(frame, prog=frame.prog[1:], locals=frame.locals.set(load.var, value))
    return replace(ps, frames=(new,) + ps.frames[1:], pending=None)


def run_constructor(model, proc: str, globals_: Env, max_steps: int = 100_000) -> Env:
    """Run the constructor program to completion; it must be internal only."""
    if not model.ctor_prog:
        return globals_
    ps = ProcessState(proc, globals_, (Frame(tuple(model.ctor_prog), None, Env()),), "<init>")
    for _ in range(max_steps):
        out = step_processing(model, ps)
        if not out:
            break
        label, ps = out[0]
        if ps.stable:
            if label.kind != ActionKind.RETURN:
                raise EngineError(f"constructor of {model.class_name} throws")
            return ps.globals
        if label != TAU:
            raise EngineError(f"constructor of {model.class_name} communicates: {S.render_action(label)}")
    raise EngineError(f"constructor of {model.class_name} does not terminate")
