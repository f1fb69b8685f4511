"""Lowering of MOO method bodies to the intermediate language.

``MethodTransformer`` implements the statement, expression and argument
mappings; ``transform_class`` assembles a ``ClassModel`` from them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from . import scpp as S
from .frontend import ast as A
from .frontend.lexer import MooError
from .frontend.symbols import GLOBAL_NAMESPACE, LocalVar, ProgramIndex, Scopes, SymbolTable

_BINOPS = {
    "+": "plus", "-": "minus", "*": "multiply", "/": "divide",
    "==": "equals", "!=": "not_equals", "<": "smaller_than", "<=": "smaller_equal",
    ">": "greater_than", ">=": "greater_equal", "&": "and", "|": "or",
}

GLOBAL_OWNER = S.Const(S.PType(GLOBAL_NAMESPACE))


class TransformError(MooError):
    pass


class FreshNameGenerator:
    """Deterministic per-method supply of fresh variables and labels."""

    def __init__(self):
        self.vars = 0
        self.labels = 0

    def var(self) -> str:
        name = f"{S.FRESH_VAR_PREFIX}{self.vars}"
        self.vars += 1
        return name

    def label(self) -> str:
        name = f"{S.FRESH_LABEL_PREFIX}{self.labels}"
        self.labels += 1
        return name


class Labels(NamedTuple):
    cont: Optional[str] = None  # innermost loop
    brk: Optional[str] = None  # innermost loop or switch


NO_LABEL = Labels()


def value_type_of(t: Optional[A.TypeRef], index: ProgramIndex | None = None) -> str:
    if t is None:
        return "Unknown"
    simple = {"int": "Number", "bool": "Boolean", "void": "VoidType",
              "string": "StringType", "list": "OrderedSet"}
    if t.name in simple:
        return simple[t.name]
    if index is not None and t.name in index.enums:
        return "EnumType"
    if index is not None and t.name in index.classes:
        return "PType"
    return "Unknown"


class MethodTransformer:
    def __init__(self, index: ProgramIndex, cls: str, fng: FreshNameGenerator | None = None):
        self.index = index
        self.cls = cls
        self.scopes = Scopes(index, cls)
        self.fng = fng or FreshNameGenerator()
        self.warnings = []  # (message, loc) pairs that do not stop the method

    def error(self, message, node=None):
        loc = getattr(node, "loc", None) or A.NOLOC
        return TransformError(message, loc.line, loc.col, self.index.filename)

    # ------------------------------------------------------------ statements

    def stmts(self, stmts, lbl: Labels) -> list:
        out = []
        for s in stmts:
            out += self.stmt(s, lbl)
        return out

    def scoped(self, s, lbl: Labels) -> list:
        self.scopes.push()
        try:
            return self.stmt(s, lbl)
        finally:
            self.scopes.pop()

    def stmt(self, s, lbl: Labels = NO_LABEL) -> list:
        match s:
            case A.Block(stmts):
                self.scopes.push()
                try:
                    return self.stmts(stmts, lbl)
                finally:
                    self.scopes.pop()
            case A.Empty():
                return []
            case A.ReturnStmt(None):
                return [S.Return(S.Const(S.VOID))]
            case A.ReturnStmt(e):
                pre, t = self.expr(e)
                return pre + [S.Return(t)]
            case A.VarDecl(ty, name, init, by_ref):
                if by_ref:
                    raise self.error(f"reference variable '{name}' is not supported; use a reference parameter", s)
                out = []
                lam = None
                if init is not None:
                    pre, t = self.expr(init)
                    out = pre + [S.Assign(S.Scope.LOCAL, name, t)]
                    lam = init.params if isinstance(init, A.Lambda) else None
                self.scopes.declare(LocalVar(name, ty, False, lam), s.loc)
                return out
            case A.Assignment(target, value):
                return self.assignment(target, value, s)
            case A.ExprStmt(e):
                pre, _ = self.expr(e)
                return pre
            case A.If(c, then, orelse):
                pre, t = self.expr(c)
                st = self.scoped(then, lbl)
                sf = self.scoped(orelse, lbl) if orelse is not None else []
                return pre + [S.Ite(t, tuple(st), tuple(sf))]
            case A.WhileStmt(c, body):
                pre, t = self.expr(c)
                lw = self.fng.label()
                sb = self.scoped(body, Labels(lw, lw)) + [S.Flag(S.FlagKind.CONTINUE, lw)] + pre
                return pre + [S.While(t, tuple(sb)), S.Flag(S.FlagKind.BREAK, lw)]
            case A.ForStmt(init, cond, step, body):
                self.scopes.push()
                try:
                    si = self.stmt(init, lbl) if init is not None else []
                    pre_c, t_c = self.expr(cond) if cond is not None else ([], S.Const(S.TRUE))
                    lf = self.fng.label()
                    sb = self.scoped(body, Labels(lf, lf))
                    # the continue flag precedes the increment so that continue still steps
                    sb += [S.Flag(S.FlagKind.CONTINUE, lf)]
                    sb += self.stmt(step, lbl) if step is not None else []
                    sb += pre_c
                    return si + pre_c + [S.While(t_c, tuple(sb)), S.Flag(S.FlagKind.BREAK, lf)]
                finally:
                    self.scopes.pop()
            case A.Continue():
                if lbl.cont is None:
                    raise self.error("continue outside of a loop", s)
                return [S.Jump(S.FlagKind.CONTINUE, lbl.cont)]
            case A.Break():
                if lbl.brk is None:
                    raise self.error("break outside of a loop or switch", s)
                return [S.Jump(S.FlagKind.BREAK, lbl.brk)]
            case A.Switch():
                return self.switch(s, lbl)
            case A.TryCatch(body, handler):
                return self.stmt(body, lbl) + [S.Catch(tuple(self.stmt(handler, lbl)))]
            case A.ThrowStmt(e):
                pre = self.expr(e)[0] if e is not None else []
                return pre + [S.Throw()]
        raise self.error(f"unsupported statement {type(s).__name__}", s)

    def assignment(self, target, value, node) -> list:
        if isinstance(target, A.Member):
            pre_o, t_o = self.expr(target.obj)
            pre_v, t_v = self.expr(value)
            return pre_o + pre_v + [S.RefAssign(S.RefField(t_o, target.name), t_v)]
        if not isinstance(target, A.Name):
            raise self.error("unsupported assignment target", node)
        pre, t = self.expr(value)
        r = self.scopes.lookup(target.id, target.loc)
        match r.kind:
            case "local" | "field" | "member":
                if r.is_ref:
                    return pre + [S.RefAssign(S.Read(r.scope, r.name), t)]
                return pre + [S.Assign(r.scope, r.name, t)]
            case "global":
                return pre + [S.RefAssign(S.RefField(GLOBAL_OWNER, r.name), t)]
        raise self.error(f"cannot assign to '{target.id}'", node)

    def switch(self, s: A.Switch, lbl: Labels) -> list:
        pre, t = self.expr(s.subject)
        sid = self.fng.var()
        ls = self.fng.label()
        inner = Labels(lbl.cont, ls)
        conds, bodies = [], []
        self.scopes.push()
        try:
            for case in s.cases:
                cpre, ct = self.expr(case.value)
                if cpre:
                    raise self.error("case label must be a constant expression", case.value)
                conds.append(S.Binary("equals", S.Read(S.Scope.LOCAL, sid), ct))
                bodies.append(self.stmts(case.body, inner))
            sd = self.stmts(s.default, inner) if s.default is not None else []
        finally:
            self.scopes.pop()
        out = pre + [S.Assign(S.Scope.LOCAL, sid, t)]
        for i, c in enumerate(conds):
            fall = [st for b in bodies[i:] for st in b] + sd
            # leave after the fallthrough chain instead of re-entering later cases
            fall.append(S.Jump(S.FlagKind.BREAK, ls))
            out.append(S.Ite(c, tuple(fall), ()))
        return out + sd + [S.Flag(S.FlagKind.BREAK, ls)]

    # ----------------------------------------------------------- expressions

    def expr(self, e) -> tuple[list, S.Expr]:
        match e:
            case A.IntLit(v):
                return [], S.Const(S.Number(v))
            case A.BoolLit(v):
                return [], S.Const(S.Boolean(v))
            case A.StrLit(v):
                return [], S.Const(S.StringType(v))
            case A.This():
                return [], S.SELF
            case A.Unary("-", A.IntLit(v)):
                return [], S.Const(S.Number(-v))
            case A.Unary("-", operand):
                pre, t = self.expr(operand)
                return pre, S.Binary("minus", S.Const(S.Number(0)), t)
            case A.Unary("!", operand):
                pre, t = self.expr(operand)
                return pre, S.Not(t)
            case A.BinOp("&&", l, r):
                pre1, t1 = self.expr(l)
                pre2, t2 = self.expr(r)
                fv = self.fng.var()
                then = pre2 + [S.Assign(S.Scope.LOCAL, fv, t2)]
                orelse = [S.Assign(S.Scope.LOCAL, fv, S.Const(S.FALSE))]
                return pre1 + [S.Ite(t1, tuple(then), tuple(orelse))], S.Read(S.Scope.LOCAL, fv)
            case A.BinOp("||", l, r):
                pre1, t1 = self.expr(l)
                pre2, t2 = self.expr(r)
                fv = self.fng.var()
                then = [S.Assign(S.Scope.LOCAL, fv, S.Const(S.TRUE))]
                orelse = pre2 + [S.Assign(S.Scope.LOCAL, fv, t2)]
                return pre1 + [S.Ite(t1, tuple(then), tuple(orelse))], S.Read(S.Scope.LOCAL, fv)
            case A.BinOp(op, l, r):
                pre1, t1 = self.expr(l)
                pre2, t2 = self.expr(r)
                return pre1 + pre2, S.Binary(_BINOPS[op], t1, t2)
            case A.PostInc(name):
                pre_r, t_r = self.expr(A.Name(name, e.loc))
                fv = self.fng.var()
                incr = self.assignment(A.Name(name, e.loc), A.BinOp("+", A.Name(name, e.loc), A.IntLit(1)), e)
                return pre_r + [S.Assign(S.Scope.LOCAL, fv, t_r)] + incr, S.Read(S.Scope.LOCAL, fv)
            case A.Ternary(c, t, f):
                pre_c, t_c = self.expr(c)
                pre_t, t_t = self.expr(t)
                pre_f, t_f = self.expr(f)
                fv = self.fng.var()
                st = pre_t + [S.Assign(S.Scope.LOCAL, fv, t_t)]
                sf = pre_f + [S.Assign(S.Scope.LOCAL, fv, t_f)]
                return pre_c + [S.Ite(t_c, tuple(st), tuple(sf))], S.Read(S.Scope.LOCAL, fv)
            case A.Member(obj, name):
                pre, t = self.expr(obj)
                fv = self.fng.var()
                return pre + [S.RefLoad(fv, S.RefField(t, name))], S.Read(S.Scope.LOCAL, fv)
            case A.Name(name):
                return self.name(name, e)
            case A.Index(seq, idx):
                pre1, t1 = self.expr(seq)
                pre2, t2 = self.expr(idx)
                return pre1 + pre2, S.At(t1, t2)
            case A.CallExpr(func, args):
                return self.call_expr(func, args, e)
            case A.MethodCall(obj, func, args):
                pre_o, t_o = self.expr(obj)
                params = self.scopes.callee_params(self.scopes.static_class(obj), func, e.loc)
                return self.call(pre_o, t_o, func, params, args, e)
            case A.Lambda():
                return [], self.lambda_expr(e)
            case A.BraceList(items):
                pre, ts = [], []
                for item in items:
                    p, t = self.expr(item)
                    pre += p
                    ts.append(t)
                return pre, S.InitList(tuple(ts))
        raise self.error(f"unsupported expression {type(e).__name__}", e)

    def name(self, name, node):
        r = self.scopes.lookup(name, node.loc)
        match r.kind:
            case "enum":
                return [], S.Const(S.EnumType(name))
            case "local" | "field" | "member":
                if r.is_ref:
                    fv = self.fng.var()
                    return [S.RefLoad(fv, S.Read(r.scope, name))], S.Read(S.Scope.LOCAL, fv)
                return [], S.Read(r.scope, name)
            case "global":
                fv = self.fng.var()
                return [S.RefLoad(fv, S.RefField(GLOBAL_OWNER, name))], S.Read(S.Scope.LOCAL, fv)
        raise self.error(f"'{name}' cannot be used as a value", node)

    def call_expr(self, func, args, node):
        r = self.scopes.lookup(func, node.loc)
        if r.kind == "func":
            params = self.index.classes[self.cls].methods[func].params
            return self.call([], S.SELF, func, params, args, node)
        if r.kind == "globalfunc":
            params = self.index.global_funcs[func].params
            return self.call([], GLOBAL_OWNER, func, params, args, node)
        if r.kind == "local" and not r.is_ref:
            lam = r.local.lambda_params
            params = lam if lam is not None else [A.Param(A.TypeRef("auto"), f"_{i}") for i in range(len(args))]
            pre, ts, refs = self.arguments(func, params, args, node)
            fv = self.fng.var()
            stmt = S.CallLambda(fv, func, tuple(ts), tuple(refs))
            return pre + [stmt], S.Read(S.Scope.LOCAL, fv)
        raise self.error(f"'{func}' is not callable", node)

    def call(self, pre_o, t_o, func, params, args, node):
        pre, ts, refs = self.arguments(func, params, args, node)
        fv = self.fng.var()
        stmt = S.Call(fv, t_o, func, tuple(ts), tuple(refs))
        return pre_o + pre + [stmt], S.Read(S.Scope.LOCAL, fv)

    def lambda_expr(self, e: A.Lambda) -> S.InitLambda:
        outer = {c.name: self.scopes.lookup(c.name, e.loc) for c in e.captures}
        for c in e.captures:
            if outer[c.name].kind != "local":
                raise self.error(f"lambda can only capture locals, not '{c.name}'", e)
        pnames = {p.name for p in e.params}
        shadowed = [c for c in e.captures if c.name in pnames]
        for c in shadowed:
            self.warnings.append((f"lambda parameter '{c.name}' hides the capture of the same name", e.loc))
        captures = [c for c in e.captures if c.name not in pnames]
        self.scopes.push(barrier=True)
        try:
            for c in captures:
                r = outer[c.name]
                self.scopes.declare(LocalVar(c.name, r.type, c.by_ref, r.local.lambda_params), e.loc)
            for p in e.params:
                self.scopes.declare(LocalVar(p.name, p.type, p.by_ref), e.loc)
            body = self.stmts(e.body.stmts, NO_LABEL)
        finally:
            self.scopes.pop()
        copies = tuple(c.name for c in captures if not c.by_ref)
        refs = tuple(c.name for c in captures if c.by_ref)
        return S.InitLambda(tuple(p.name for p in e.params), copies, refs, tuple(body))

    # ------------------------------------------------------------- arguments

    def arguments(self, func, params, args, node) -> tuple[list, list, list]:
        if len(params) != len(args):
            raise self.error(f"'{func}' expects {len(params)} argument(s), got {len(args)}", node)
        pre, ts, ids = [], [], []
        for p, a in zip(params, args):
            if p.by_ref:
                sp, t, i = self.ref_argument(a)
            else:
                sp, t = self.expr(a)
                i = []
            pre += sp
            ts.append(t)
            ids += i
        return pre, ts, ids

    def ref_argument(self, a):
        match a:
            case A.Name(name):
                r = self.scopes.lookup(name, a.loc)
                match r.kind:
                    case "enum":
                        return [], S.Const(S.EnumType(name)), []
                    case "local" if r.is_ref:
                        return [], S.Read(S.Scope.LOCAL, name), [name]
                    case "local":
                        return [], S.Const(S.LocalRef(name)), [name]
                    case "field" | "member":
                        return [], S.RefField(S.SELF, name), []
                    case "global":
                        return [], S.RefField(GLOBAL_OWNER, name), []
                raise self.error(f"'{name}' cannot be passed by reference", a)
            case A.Member(obj, name):
                pre, t = self.expr(obj)
                fv = self.fng.var()
                return pre + [S.Assign(S.Scope.LOCAL, fv, t)], S.RefField(S.Read(S.Scope.LOCAL, fv), name), []
            case A.IntLit() | A.BoolLit() | A.StrLit() | A.Unary("-", A.IntLit()):
                raise self.error("a literal cannot be passed by reference", a)
        pre, t = self.expr(a)
        return pre, t, []


# ---------------------------------------------------------------- classes


@dataclass
class MethodInfo:
    name: str
    params: tuple
    param_refs: tuple
    param_types: tuple  # value type names
    return_type: str
    can_throw: bool = False


@dataclass
class Diagnostic:
    method: str
    line: int
    col: int
    cause: str
    severity: str = "error"

    def __str__(self):
        return f"{self.line}:{self.col}: {self.severity}: in '{self.method}': {self.cause}"


@dataclass
class ClassModel:
    class_name: str
    get_prog: dict = field(default_factory=dict)  # FuncId -> tuple of Stmt
    methods: dict = field(default_factory=dict)  # FuncId -> MethodInfo
    ctor_prog: tuple = ()
    fields: dict = field(default_factory=dict)  # name -> value type name
    members: dict = field(default_factory=dict)  # name -> class name
    enums: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def param_names(self, func) -> tuple:
        return self.methods[func].params

    def param_refs(self, func) -> tuple:
        return self.methods[func].param_refs

    def dump(self) -> str:
        lines = [f"class {self.class_name}"]
        for name, t in self.fields.items():
            lines.append(f"field {name} : {t}")
        for name, c in self.members.items():
            lines.append(f"member {name} : {c}")
        lines.append("constructor")
        if self.ctor_prog:
            lines.append(S.pretty_block(self.ctor_prog, 1))
        for name in self.get_prog:
            m = self.methods[name]
            params = ", ".join(("&" if r else "") + p for p, r in zip(m.params, m.param_refs))
            lines.append(f"method {name}({params}) returns {m.return_type} can_throw={str(m.can_throw).lower()}")
            lines.append(S.pretty_block(self.get_prog[name], 1) if self.get_prog[name] else "  []")
        for d in self.diagnostics:
            lines.append(f"diagnostic {d}")
        return "\n".join(lines) + "\n"


def _has_throw(prog) -> bool:
    for s in prog:
        match s:
            case S.Throw():
                return True
            case S.Ite(_, a, b):
                if _has_throw(a) or _has_throw(b):
                    return True
            case S.While(_, b) | S.Catch(b):
                if _has_throw(b):
                    return True
    return False


def _self_calls(prog, out: set) -> set:
    for s in prog:
        match s:
            case S.Call(_, S.SelfRef(), f):
                out.add(f)
            case S.Ite(_, a, b):
                _self_calls(a, out)
                _self_calls(b, out)
            case S.While(_, b) | S.Catch(b):
                _self_calls(b, out)
    return out


def _throws_uncaught(prog) -> bool:
    # a throw anywhere in a method counts unless every throw sits inside a try
    # body; the syntactic check keeps it simple and errs on the side of true
    return _has_throw(prog)


def transform_class(cd: A.ClassDecl | str, symtab: SymbolTable | None = None,
                    index: ProgramIndex | None = None) -> ClassModel:
    """Transform every method of a class, collecting per-method diagnostics."""
    if index is None:
        raise ValueError("transform_class needs the program index")
    name = cd if isinstance(cd, str) else cd.name
    info = index.classes[name]
    decl = info.decl
    model = ClassModel(name, enums=dict(index.enums))
    model.fields = {f: value_type_of(t, index) for f, t in info.fields.items()}
    model.members = dict(info.members)
    for m in decl.methods:
        model.methods[m.name] = MethodInfo(
            m.name, tuple(p.name for p in m.params), tuple(p.by_ref for p in m.params),
            tuple(value_type_of(p.type, index) for p in m.params), value_type_of(m.return_type, index))
        if m.body is None:
            continue
        try:
            mt = MethodTransformer(index, name)
            mt.scopes.push()
            for p in m.params:
                mt.scopes.declare(LocalVar(p.name, p.type, p.by_ref), m.loc)
            model.get_prog[m.name] = tuple(mt.stmt(m.body))
        except MooError as exc:
            model.diagnostics.append(Diagnostic(m.name, exc.line, exc.col, exc.message))
        for msg, loc in mt.warnings:
            model.diagnostics.append(Diagnostic(m.name, loc.line, loc.col, msg, "warning"))
    model.ctor_prog = _ctor_prog(index, info, model)
    # can_throw: direct throws, closed under calls to own methods
    throws = {f for f, prog in model.get_prog.items() if _throws_uncaught(prog)}
    calls = {f: _self_calls(prog, set()) for f, prog in model.get_prog.items()}
    changed = True
    while changed:
        changed = False
        for f, callees in calls.items():
            if f not in throws and callees & throws:
                throws.add(f)
                changed = True
    for f in throws:
        model.methods[f].can_throw = True
    return model


def _ctor_prog(index: ProgramIndex, info, model: ClassModel) -> tuple:
    decl = info.decl
    mt = MethodTransformer(index, decl.name)
    mt.scopes.push()
    out = []
    try:
        for f in decl.fields:
            if f.init is not None:
                pre, t = mt.expr(f.init)
                out += pre + [S.Assign(S.Scope.GLOBAL, f.name, t)]
        for k in decl.constructors:
            if k.params:
                model.diagnostics.append(Diagnostic(
                    k.name, k.loc.line, k.loc.col,
                    "constructor with parameters is not executed; only field initializers apply", "warning"))
                continue
            for fname, e in k.initializers:
                if fname in info.members:
                    continue  # members are wired by configuration
                if fname not in info.fields:
                    raise mt.error(f"initializer for unknown field '{fname}'", e)
                pre, t = mt.expr(e)
                out += pre + [S.Assign(S.Scope.GLOBAL, fname, t)]
            out += mt.stmt(k.body)
    except MooError as exc:
        model.diagnostics.append(Diagnostic(decl.name, exc.line, exc.col, exc.message))
    return tuple(out)


def transform_statement(st, symtab_or_scopes: Scopes, fng: FreshNameGenerator | None = None,
                        labels: Labels = NO_LABEL) -> list:
    mt = MethodTransformer(symtab_or_scopes.index, symtab_or_scopes.cls, fng)
    mt.scopes = symtab_or_scopes
    return mt.stmt(st, labels)


def transform_expression(e, scopes: Scopes, fng: FreshNameGenerator | None = None):
    mt = MethodTransformer(scopes.index, scopes.cls, fng)
    mt.scopes = scopes
    return mt.expr(e)


def transform_arguments(func, params, args, scopes: Scopes, fng: FreshNameGenerator | None = None):
    mt = MethodTransformer(scopes.index, scopes.cls, fng)
    mt.scopes = scopes
    return mt.arguments(func, params, args, None)


def transform_program(tu: A.TranslationUnit, classes=None, filename="<input>") -> dict:
    """Transform the named classes (all by default) into class models."""
    index = ProgramIndex(tu, filename)
    names = classes if classes is not None else list(index.classes)
    out = {}
    for name in names:
        out[name] = transform_class(name, index=index)
    return out
