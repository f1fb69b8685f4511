"""Intermediate language: values, expressions, statements and action labels.

Everything here is immutable and hashable so that process states built from
these objects can be deduplicated structurally during exploration.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, fields, is_dataclass
from typing import Iterable, Sequence, Union

FRESH_VAR_PREFIX = "__fv"
FRESH_LABEL_PREFIX = "__lbl"
RESERVED_PREFIXES = (FRESH_VAR_PREFIX, FRESH_LABEL_PREFIX)

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1


class Scope(enum.Enum):
    LOCAL = "local"
    GLOBAL = "global"


class FlagKind(enum.Enum):
    CONTINUE = "continue"
    BREAK = "break"


# ---------------------------------------------------------------- values


@dataclass(frozen=True, slots=True)
class Number:
    value: int

    def __post_init__(self):
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise TypeError(f"Number expects int, got {self.value!r}")
        if not INT_MIN <= self.value <= INT_MAX:
            raise OverflowError(f"{self.value} does not fit in 64 bits")


@dataclass(frozen=True, slots=True)
class Boolean:
    value: bool


@dataclass(frozen=True, slots=True)
class OrderedSet:
    items: tuple = ()


@dataclass(frozen=True, slots=True)
class VoidType:
    pass


@dataclass(frozen=True, slots=True)
class PType:
    proc: str


@dataclass(frozen=True, slots=True)
class EnumType:
    literal: str


@dataclass(frozen=True, slots=True)
class FieldRef:
    proc: str
    var: str


@dataclass(frozen=True, slots=True)
class LocalRef:
    var: str


@dataclass(frozen=True, slots=True)
class LambdaType:
    params: tuple
    lras: tuple  # ((name, Value), ...) captured by copy
    ref_captures: tuple
    body: tuple


@dataclass(frozen=True, slots=True)
class StringType:
    literal: str


Value = Union[Number, Boolean, OrderedSet, VoidType, PType, EnumType,
              FieldRef, LocalRef, LambdaType, StringType]
VOID = VoidType()
TRUE = Boolean(True)
FALSE = Boolean(False)

# ----------------------------------------------------------- expressions

BINARY_OPS = (
    "minus", "plus", "divide", "multiply", "equals", "not_equals",
    "greater_than", "greater_equal", "smaller_equal", "smaller_than",
    "or", "and",
)


@dataclass(frozen=True, slots=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown binary operator {self.op!r}")


@dataclass(frozen=True, slots=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True, slots=True)
class Read:
    scope: Scope
    var: str


@dataclass(frozen=True, slots=True)
class Const:
    value: Value


@dataclass(frozen=True, slots=True)
class At:
    seq: "Expr"
    index: "Expr"


@dataclass(frozen=True, slots=True)
class SelfRef:
    pass


@dataclass(frozen=True, slots=True)
class RefField:
    owner: "Expr"
    var: str


@dataclass(frozen=True, slots=True)
class InitLambda:
    params: tuple
    copies: tuple
    refs: tuple
    body: tuple


@dataclass(frozen=True, slots=True)
class InitList:
    items: tuple


Expr = Union[Binary, Not, Read, Const, At, SelfRef, RefField, InitLambda, InitList]
SELF = SelfRef()

# ------------------------------------------------------------ statements


@dataclass(frozen=True, slots=True)
class Return:
    expr: Expr


@dataclass(frozen=True, slots=True)
class Assign:
    scope: Scope
    var: str
    expr: Expr


@dataclass(frozen=True, slots=True)
class Call:
    result: str
    owner: Expr
    func: str
    args: tuple
    refs: tuple


@dataclass(frozen=True, slots=True)
class Ite:
    cond: Expr
    then: tuple
    orelse: tuple


@dataclass(frozen=True, slots=True)
class While:
    cond: Expr
    body: tuple


@dataclass(frozen=True, slots=True)
class RefLoad:
    var: str
    source: Expr


@dataclass(frozen=True, slots=True)
class RefAssign:
    target: Expr
    expr: Expr


@dataclass(frozen=True, slots=True)
class Jump:
    flag: FlagKind
    label: str


@dataclass(frozen=True, slots=True)
class Flag:
    flag: FlagKind
    label: str


@dataclass(frozen=True, slots=True)
class Throw:
    pass


@dataclass(frozen=True, slots=True)
class Catch:
    body: tuple


@dataclass(frozen=True, slots=True)
class CallLambda:
    result: str
    lambda_var: str
    args: tuple
    refs: tuple


Stmt = Union[Return, Assign, Call, Ite, While, RefLoad, RefAssign, Jump, Flag,
             Throw, Catch, CallLambda]

# --------------------------------------------------------- action labels


class Polarity(enum.Enum):
    TOP = "t"
    BOTTOM = "b"
    COMM = "comm"


class ActionKind(enum.Enum):
    CALL = "call_func"
    RETURN = "return_func"
    THROW = "throw_func"
    LOAD = "load"
    STORE = "store"


@dataclass(frozen=True, slots=True)
class Action:
    """A non-tau action.

    ``func`` is used by call/return/throw, ``var`` by load/store.  ``args``
    only by call, ``value`` by return/load/store, ``lras`` by call/return/throw.
    """

    polarity: Polarity
    kind: ActionKind
    proc: str
    func: str | None = None
    var: str | None = None
    args: tuple = ()
    value: Value | None = None
    lras: tuple = ()

    def with_polarity(self, polarity: Polarity) -> "Action":
        return Action(polarity, self.kind, self.proc, self.func, self.var,
                      self.args, self.value, self.lras)


@dataclass(frozen=True, slots=True)
class Tau:
    pass


TAU = Tau()
ActionLabel = Union[Action, Tau]


def call_action(polarity, proc, func, args, lras):
    return Action(polarity, ActionKind.CALL, proc, func=func, args=tuple(args), lras=tuple(lras))


def return_action(polarity, proc, func, value, lras):
    return Action(polarity, ActionKind.RETURN, proc, func=func, value=value, lras=tuple(lras))


def throw_action(polarity, proc, func, lras):
    return Action(polarity, ActionKind.THROW, proc, func=func, lras=tuple(lras))


def load_action(polarity, proc, var, value):
    return Action(polarity, ActionKind.LOAD, proc, var=var, value=value)


def store_action(polarity, proc, var, value):
    return Action(polarity, ActionKind.STORE, proc, var=var, value=value)


# ------------------------------------------------------------- rendering


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_value(v: Value) -> str:
    match v:
        case Number(n):
            return str(n)
        case Boolean(b):
            return "true" if b else "false"
        case VoidType():
            return "void"
        case OrderedSet(items):
            return "[" + ",".join(render_value(x) for x in items) + "]"
        case PType(p):
            return p
        case EnumType(lit):
            return lit
        case FieldRef(p, x):
            return f"&{p}.{x}"
        case LocalRef(x):
            return f"&{x}"
        case LambdaType():
            return "<lambda>"
        case StringType(lit):
            return _quote(lit)
    raise TypeError(f"not a value: {v!r}")


def render_lras(lras: Iterable) -> str:
    return "{" + ",".join(f"{k}={render_value(v)}" for k, v in lras) + "}"


_COMM_NAMES = {
    ActionKind.CALL: "call_func",
    ActionKind.RETURN: "return_func",
    ActionKind.THROW: "throw_func",
    ActionKind.LOAD: "load_comm",
    ActionKind.STORE: "store_comm",
}


def action_name(a: Action) -> str:
    if a.polarity is Polarity.COMM:
        return _COMM_NAMES[a.kind]
    return f"{a.kind.value}_{a.polarity.value}"


def render_action(a: ActionLabel) -> str:
    if isinstance(a, Tau):
        return "tau"
    name = action_name(a)
    match a.kind:
        case ActionKind.CALL:
            payload = [a.proc, a.func, "[" + ",".join(map(render_value, a.args)) + "]",
                       render_lras(a.lras)]
        case ActionKind.RETURN:
            payload = [a.proc, a.func, render_value(a.value), render_lras(a.lras)]
        case ActionKind.THROW:
            payload = [a.proc, a.func, render_lras(a.lras)]
        case _:
            payload = [a.proc, a.var, render_value(a.value)]
    return f"{name}({','.join(payload)})"


# ---------------------------------------------------------- pretty print


def pretty_value(v: Value) -> str:
    match v:
        case Number(n):
            return f"Number({n})"
        case Boolean(b):
            return f"Boolean({'true' if b else 'false'})"
        case VoidType():
            return "VoidType"
        case OrderedSet(items):
            return "OrderedSet([" + ", ".join(map(pretty_value, items)) + "])"
        case PType(p):
            return f"PType({p})"
        case EnumType(lit):
            return f"EnumType({lit})"
        case FieldRef(p, x):
            return f"FieldRef({p}, {x})"
        case LocalRef(x):
            return f"LocalRef({x})"
        case LambdaType(params, lras, refs, body):
            pairs = ", ".join(f"({k}, {pretty_value(val)})" for k, val in lras)
            return (f"LambdaType({_names(params)}, [{pairs}], {_names(refs)}, "
                    f"{pretty_block(body)})")
        case StringType(lit):
            return f"StringType({_quote(lit)})"
    raise TypeError(f"not a value: {v!r}")


def _names(ids: Sequence[str]) -> str:
    return "[" + ", ".join(ids) + "]"


def pretty_expr(e: Expr) -> str:
    match e:
        case Binary(op, l, r):
            return f"{op}({pretty_expr(l)}, {pretty_expr(r)})"
        case Not(x):
            return f"not({pretty_expr(x)})"
        case Read(scope, var):
            return f"read({scope.value}, {var})"
        case Const(v):
            return f"constant({pretty_value(v)})"
        case At(s, i):
            return f"at({pretty_expr(s)}, {pretty_expr(i)})"
        case SelfRef():
            return "self"
        case RefField(owner, var):
            return f"ref_field({pretty_expr(owner)}, {var})"
        case InitLambda(params, copies, refs, body):
            return (f"init_lambda({_names(params)}, {_names(copies)}, {_names(refs)}, "
                    f"{pretty_block(body)})")
        case InitList(items):
            return "init_list([" + ", ".join(map(pretty_expr, items)) + "])"
    raise TypeError(f"not an expression: {e!r}")


def _exprs(es) -> str:
    return "[" + ", ".join(map(pretty_expr, es)) + "]"


def pretty_stmt(s: Stmt, indent: int = 0) -> str:
    pad = "  " * indent
    match s:
        case Return(e):
            body = f"return({pretty_expr(e)})"
        case Assign(scope, var, e):
            body = f"assign({scope.value}, {var}, {pretty_expr(e)})"
        case Call(res, owner, func, args, refs):
            body = f"call({res}, {pretty_expr(owner)}, {func}, {_exprs(args)}, {_names(refs)})"
        case Ite(c, t, f):
            body = (f"ite({pretty_expr(c)},\n{pretty_block(t, indent + 1)},\n"
                    f"{pretty_block(f, indent + 1)})")
        case While(c, w):
            body = f"while({pretty_expr(c)},\n{pretty_block(w, indent + 1)})"
        case RefLoad(var, src):
            body = f"ref_load({var}, {pretty_expr(src)})"
        case RefAssign(tgt, e):
            body = f"ref_assign({pretty_expr(tgt)}, {pretty_expr(e)})"
        case Jump(flag, label):
            body = f"jump({flag.value}, {label})"
        case Flag(flag, label):
            body = f"flag({flag.value}, {label})"
        case Throw():
            body = "throw"
        case Catch(b):
            body = f"catch(\n{pretty_block(b, indent + 1)})"
        case CallLambda(res, lam, args, refs):
            body = f"call_lambda({res}, {lam}, {_exprs(args)}, {_names(refs)})"
        case _:
            raise TypeError(f"not a statement: {s!r}")
    return pad + body


def pretty_block(stmts: Sequence[Stmt], indent: int = 0) -> str:
    pad = "  " * indent
    if not stmts:
        return pad + "[]"
    inner = ",\n".join(pretty_stmt(s, indent + 1) for s in stmts)
    return f"{pad}[\n{inner}\n{pad}]"


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(r'\s*(?:(-?\d+)|("(?:[^"\\]|\\.)*")|([A-Za-z_][A-Za-z0-9_]*)|(.))')


class ScppSyntaxError(ValueError):
    pass


class _Reader:
    def __init__(self, text: str):
        self.tokens = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            num, string, ident, punct = m.groups()
            if num is not None:
                self.tokens.append(("num", int(num)))
            elif string is not None:
                raw = string[1:-1]
                self.tokens.append(("str", re.sub(r"\\(.)", r"\1", raw)))
            elif ident is not None:
                self.tokens.append(("id", ident))
            elif punct is not None:
                self.tokens.append(("p", punct))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", None)

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            raise ScppSyntaxError(f"expected {value or kind}, got {tok[1]!r} at token {self.i}")
        return tok[1]

    def ident(self):
        return self.expect("id")

    def punct(self, p):
        return self.expect("p", p)

    def at_punct(self, p):
        return self.peek() == ("p", p)

    def seq(self, item):
        self.punct("[")
        out = []
        while not self.at_punct("]"):
            out.append(item())
            if not self.at_punct("]"):
                self.punct(",")
        self.punct("]")
        return tuple(out)


def _parse_scope(r):
    return Scope(r.ident())


def _parse_flag(r):
    return FlagKind(r.ident())


def _parse_value(r: _Reader) -> Value:
    name = r.ident()
    if name == "VoidType":
        return VOID
    r.punct("(")
    match name:
        case "Number":
            v = Number(r.expect("num"))
        case "Boolean":
            word = r.ident()
            if word not in ("true", "false"):
                raise ScppSyntaxError(f"bad boolean {word!r}")
            v = Boolean(word == "true")
        case "OrderedSet":
            v = OrderedSet(r.seq(lambda: _parse_value(r)))
        case "PType":
            v = PType(r.ident())
        case "EnumType":
            v = EnumType(r.ident())
        case "FieldRef":
            p = r.ident()
            r.punct(",")
            v = FieldRef(p, r.ident())
        case "LocalRef":
            v = LocalRef(r.ident())
        case "StringType":
            v = StringType(r.expect("str"))
        case "LambdaType":
            params = r.seq(r.ident)
            r.punct(",")

            def pair():
                r.punct("(")
                k = r.ident()
                r.punct(",")
                val = _parse_value(r)
                r.punct(")")
                return (k, val)

            lras = r.seq(pair)
            r.punct(",")
            refs = r.seq(r.ident)
            r.punct(",")
            body = r.seq(lambda: _parse_stmt(r))
            v = LambdaType(params, lras, refs, body)
        case _:
            raise ScppSyntaxError(f"unknown value constructor {name!r}")
    r.punct(")")
    return v


def _parse_expr(r: _Reader) -> Expr:
    name = r.ident()
    if name == "self":
        return SELF
    r.punct("(")
    if name in BINARY_OPS:
        left = _parse_expr(r)
        r.punct(",")
        e = Binary(name, left, _parse_expr(r))
    else:
        match name:
            case "not":
                e = Not(_parse_expr(r))
            case "read":
                scope = _parse_scope(r)
                r.punct(",")
                e = Read(scope, r.ident())
            case "constant":
                e = Const(_parse_value(r))
            case "at":
                s = _parse_expr(r)
                r.punct(",")
                e = At(s, _parse_expr(r))
            case "ref_field" | "ref_global":
                owner = _parse_expr(r)
                r.punct(",")
                e = RefField(owner, r.ident())
            case "init_lambda":
                params = r.seq(r.ident)
                r.punct(",")
                copies = r.seq(r.ident)
                r.punct(",")
                refs = r.seq(r.ident)
                r.punct(",")
                e = InitLambda(params, copies, refs, r.seq(lambda: _parse_stmt(r)))
            case "init_list":
                e = InitList(r.seq(lambda: _parse_expr(r)))
            case _:
                raise ScppSyntaxError(f"unknown expression constructor {name!r}")
    r.punct(")")
    return e


def _parse_stmt(r: _Reader) -> Stmt:
    name = r.ident()
    if name == "throw":
        return Throw()
    r.punct("(")
    match name:
        case "return":
            s = Return(_parse_expr(r))
        case "assign":
            scope = _parse_scope(r)
            r.punct(",")
            var = r.ident()
            r.punct(",")
            s = Assign(scope, var, _parse_expr(r))
        case "call":
            res = r.ident()
            r.punct(",")
            owner = _parse_expr(r)
            r.punct(",")
            func = r.ident()
            r.punct(",")
            args = r.seq(lambda: _parse_expr(r))
            r.punct(",")
            s = Call(res, owner, func, args, r.seq(r.ident))
        case "ite":
            c = _parse_expr(r)
            r.punct(",")
            t = r.seq(lambda: _parse_stmt(r))
            r.punct(",")
            s = Ite(c, t, r.seq(lambda: _parse_stmt(r)))
        case "while":
            c = _parse_expr(r)
            r.punct(",")
            s = While(c, r.seq(lambda: _parse_stmt(r)))
        case "ref_load":
            var = r.ident()
            r.punct(",")
            s = RefLoad(var, _parse_expr(r))
        case "ref_assign":
            tgt = _parse_expr(r)
            r.punct(",")
            s = RefAssign(tgt, _parse_expr(r))
        case "jump" | "flag":
            flag = _parse_flag(r)
            r.punct(",")
            label = r.ident()
            s = Jump(flag, label) if name == "jump" else Flag(flag, label)
        case "catch":
            s = Catch(r.seq(lambda: _parse_stmt(r)))
        case "call_lambda":
            res = r.ident()
            r.punct(",")
            lam = r.ident()
            r.punct(",")
            args = r.seq(lambda: _parse_expr(r))
            r.punct(",")
            s = CallLambda(res, lam, args, r.seq(r.ident))
        case _:
            raise ScppSyntaxError(f"unknown statement constructor {name!r}")
    r.punct(")")
    return s


def parse_block(text: str) -> tuple:
    """Parse a ``[stmt, ...]`` block written in the pretty-print notation."""
    r = _Reader(text)
    block = r.seq(lambda: _parse_stmt(r))
    if r.peek()[0] != "eof":
        raise ScppSyntaxError(f"trailing input after block: {r.peek()[1]!r}")
    return block


def parse_expr(text: str) -> Expr:
    r = _Reader(text)
    e = _parse_expr(r)
    if r.peek()[0] != "eof":
        raise ScppSyntaxError(f"trailing input after expression: {r.peek()[1]!r}")
    return e


def parse_value(text: str) -> Value:
    r = _Reader(text)
    v = _parse_value(r)
    if r.peek()[0] != "eof":
        raise ScppSyntaxError(f"trailing input after value: {r.peek()[1]!r}")
    return v


# --------------------------------------------------------- alpha equality


def _fresh_kind(name: str) -> str | None:
    for prefix in RESERVED_PREFIXES:
        if name.startswith(prefix):
            return prefix
    return None


class _Bijection:
    def __init__(self):
        self.fwd: dict[str, str] = {}
        self.bwd: dict[str, str] = {}

    def names(self, a: str, b: str) -> bool:
        ka, kb = _fresh_kind(a), _fresh_kind(b)
        if ka is None and kb is None:
            return a == b
        if ka != kb:
            return False
        if self.fwd.get(a, b) != b or self.bwd.get(b, a) != a:
            return False
        self.fwd[a] = b
        self.bwd[b] = a
        return True


def _alpha(x, y, bij: _Bijection) -> bool:
    if type(x) is not type(y):
        return False
    if isinstance(x, str):
        return bij.names(x, y)
    if isinstance(x, StringType):
        return x.literal == y.literal
    if isinstance(x, tuple):
        return len(x) == len(y) and all(_alpha(a, b, bij) for a, b in zip(x, y))
    if is_dataclass(x):
        return all(_alpha(getattr(x, f.name), getattr(y, f.name), bij) for f in fields(x))
    return x == y


def alpha_equal(a: Sequence[Stmt], b: Sequence[Stmt]) -> bool:
    """Structural equality up to a bijective renaming of fresh names."""
    return _alpha(tuple(a), tuple(b), _Bijection())
