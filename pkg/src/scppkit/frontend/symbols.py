"""Name resolution for MOO.

``ProgramIndex`` holds the declarations of a translation unit, ``Scopes`` is
the lexical resolver used while walking method bodies, and
``build_symbol_table`` flattens both into the predicate tables consumed by
the transformer (scope of a variable, reference-ness, enum literals,
function names and by-reference argument positions).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..scpp import Scope
from . import ast as A
from .lexer import MooError
from .parser import PRIMITIVE_TYPES

GLOBAL_NAMESPACE = "GlobalNamespace"


class SymbolError(MooError):
    pass


def _err(message, loc: A.Loc | None, filename="<input>"):
    loc = loc or A.NOLOC
    return SymbolError(message, loc.line, loc.col, filename)


@dataclass
class ClassInfo:
    decl: A.ClassDecl
    fields: dict  # name -> TypeRef
    members: dict  # name -> class name
    methods: dict  # name -> MethodDecl


class ProgramIndex:
    """All declarations of one translation unit, checked for duplicates."""

    def __init__(self, tu: A.TranslationUnit, filename: str = "<input>"):
        self.tu = tu
        self.filename = filename
        self.enums: dict[str, list] = {}
        self.enum_of: dict[str, str] = {}
        self.classes: dict[str, ClassInfo] = {}
        self.global_vars: dict[str, A.TypeRef] = {}
        self.global_funcs: dict[str, A.MethodDecl] = {}
        for e in tu.enums:
            self._fresh_type_name(e.name, e.loc)
            self.enums[e.name] = list(e.literals)
            for lit in e.literals:
                if lit in self.enum_of:
                    raise self.error(f"duplicate enumerator '{lit}'", e.loc)
                self.enum_of[lit] = e.name
        for c in tu.classes:
            self._fresh_type_name(c.name, c.loc)
            self.classes[c.name] = self._class_info(c)
        for g in tu.globals:
            if g.name in self.global_vars or g.name in self.global_funcs:
                raise self.error(f"duplicate global declaration '{g.name}'", g.loc)
            if g.name in self.enum_of:
                raise self.error(f"ambiguous identifier '{g.name}' is also an enumerator", g.loc)
            if isinstance(g, A.GlobalVar):
                self.check_type(g.type, g.loc)
                self.global_vars[g.name] = g.type
            else:
                self._check_params(g)
                self.global_funcs[g.name] = g
        for info in self.classes.values():
            for t in info.fields.values():
                self.check_type(t, info.decl.loc)
            for name, cls in info.members.items():
                if cls not in self.classes:
                    raise self.error(f"member '{name}' has unknown class type '{cls}'", info.decl.loc)

    def error(self, message, loc):
        return _err(message, loc, self.filename)

    def _fresh_type_name(self, name, loc):
        if name in self.enums or name in self.classes:
            raise self.error(f"duplicate type name '{name}'", loc)

    def _check_params(self, m):
        seen = set()
        for p in m.params:
            if p.name in seen:
                raise self.error(f"duplicate parameter '{p.name}' in '{m.name}'", m.loc)
            if p.name in self.enum_of:
                raise self.error(f"ambiguous identifier '{p.name}' is also an enumerator", m.loc)
            seen.add(p.name)
            self.check_type(p.type, m.loc)

    def _class_info(self, c: A.ClassDecl) -> ClassInfo:
        fields, members, methods = {}, {}, {}
        for f in c.fields + c.members:
            if f.name in fields or f.name in members:
                raise self.error(f"duplicate field '{f.name}' in class '{c.name}'", f.loc)
            if f.name in self.enum_of:
                raise self.error(f"ambiguous identifier '{f.name}' is also an enumerator", f.loc)
            if any(f is m for m in c.members):
                members[f.name] = f.type.name
            else:
                fields[f.name] = f.type
        for m in c.methods:
            if m.name in methods:
                raise self.error(f"method '{m.name}' declared twice (overloading is not supported)", m.loc)
            if m.name in fields or m.name in members:
                raise self.error(f"method '{m.name}' clashes with a field", m.loc)
            self._check_params(m)
            methods[m.name] = m
        if len(c.constructors) > 1:
            raise self.error(f"class '{c.name}' declares more than one constructor", c.constructors[1].loc)
        for k in c.constructors:
            self._check_params(k)
        return ClassInfo(c, fields, members, methods)

    def check_type(self, t: A.TypeRef, loc):
        if t.name == "list":
            if t.elem is None:
                raise self.error("list type without element type", loc)
            self.check_type(t.elem, loc)
        elif t.name not in PRIMITIVE_TYPES and t.name not in self.enums and t.name not in self.classes:
            raise self.error(f"unknown type '{t.name}'", loc)

    def is_class_type(self, t: Optional[A.TypeRef]) -> bool:
        return t is not None and t.name in self.classes

    def method(self, cls: Optional[str], func: str):
        if cls is None:
            return self.global_funcs.get(func)
        info = self.classes.get(cls)
        return info.methods.get(func) if info else None


@dataclass
class LocalVar:
    name: str
    type: Optional[A.TypeRef]
    by_ref: bool = False
    lambda_params: Optional[list] = None  # set when the local holds a lambda


@dataclass
class Resolved:
    kind: str  # local, field, member, global, enum, func, globalfunc
    name: str
    type: Optional[A.TypeRef] = None
    is_ref: bool = False
    local: Optional[LocalVar] = None

    @property
    def scope(self) -> Scope:
        return Scope.LOCAL if self.kind == "local" else Scope.GLOBAL


@dataclass
class _Frame:
    names: dict = field(default_factory=dict)
    barrier: bool = False  # lambda body: outer locals are invisible


class Scopes:
    """Lexical scopes of one method body of ``cls``."""

    def __init__(self, index: ProgramIndex, cls: str):
        self.index = index
        self.cls = cls
        self.info = index.classes[cls]
        self.frames: list[_Frame] = []

    def push(self, barrier=False):
        self.frames.append(_Frame(barrier=barrier))

    def pop(self):
        self.frames.pop()

    def _visible_frames(self):
        for fr in reversed(self.frames):
            yield fr
            if fr.barrier:
                return

    def declare(self, var: LocalVar, loc=None):
        name = var.name
        if name in self.index.enum_of:
            raise self.index.error(f"ambiguous identifier '{name}' is also an enumerator", loc)
        top = self.frames[-1]
        if name in top.names:
            raise self.index.error(f"duplicate declaration of '{name}'", loc)
        for fr in self._visible_frames():
            if name in fr.names:
                # frames share one flat local store, so nested shadowing would alias
                raise self.index.error(f"declaration of '{name}' shadows an enclosing local", loc)
        if var.type is not None and var.type.name != "auto":
            self.index.check_type(var.type, loc)
        top.names[name] = var

    def local(self, name) -> Optional[LocalVar]:
        for fr in self._visible_frames():
            if name in fr.names:
                return fr.names[name]
        return None

    def lookup(self, name: str, loc=None) -> Resolved:
        var = self.local(name)
        if var is not None:
            return Resolved("local", name, var.type, var.by_ref, var)
        if name in self.info.fields:
            return Resolved("field", name, self.info.fields[name])
        if name in self.info.members:
            return Resolved("member", name, A.TypeRef(self.info.members[name]))
        if name in self.index.global_vars:
            return Resolved("global", name, self.index.global_vars[name])
        if name in self.index.enum_of:
            return Resolved("enum", name, A.TypeRef(self.index.enum_of[name]))
        if name in self.info.methods:
            return Resolved("func", name)
        if name in self.index.global_funcs:
            return Resolved("globalfunc", name)
        raise self.index.error(f"use of undeclared identifier '{name}'", loc)

    def static_class(self, e) -> Optional[str]:
        """Best-effort class of an owner expression, for by-reference lookup."""
        t = self.static_type(e)
        return t.name if t is not None and t.name in self.index.classes else None

    def static_type(self, e) -> Optional[A.TypeRef]:
        match e:
            case A.This():
                return A.TypeRef(self.cls)
            case A.Name(n):
                try:
                    return self.lookup(n, e.loc).type
                except SymbolError:
                    return None
            case A.Member(obj, n):
                owner = self.static_class(obj)
                if owner is None:
                    return None
                info = self.index.classes[owner]
                if n in info.fields:
                    return info.fields[n]
                if n in info.members:
                    return A.TypeRef(info.members[n])
                return None
            case A.MethodCall(obj, f):
                m = self.index.method(self.static_class(obj), f)
                return m.return_type if m else None
            case A.CallExpr(f):
                m = self.info.methods.get(f) or self.index.global_funcs.get(f)
                return m.return_type if m else None
            case A.Index(seq):
                t = self.static_type(seq)
                return t.elem if t is not None and t.name == "list" else None
        return None

    def callee_params(self, owner_cls: Optional[str], func: str, loc=None) -> list:
        """Parameter declarations of ``owner_cls.func``.

        When the owner's class cannot be determined statically, every class
        declaring ``func`` must agree on which positions are by reference.
        """
        if owner_cls is not None:
            m = self.index.method(owner_cls, func)
            if m is None:
                raise self.index.error(f"class '{owner_cls}' has no method '{func}'", loc)
            return m.params
        candidates = [info.methods[func] for info in self.index.classes.values() if func in info.methods]
        if not candidates:
            raise self.index.error(f"no class declares a method '{func}'", loc)
        shapes = {tuple(p.by_ref for p in m.params) for m in candidates}
        if len(shapes) > 1:
            raise self.index.error(f"cannot determine which '{func}' is called", loc)
        return candidates[0].params


@dataclass
class SymbolTable:
    cls: str
    scope_of: dict  # VarId -> Scope
    is_ref: dict  # VarId -> bool
    enum_literals: dict  # literal -> enum name
    enums: dict  # enum name -> literals
    funcs: set
    ref_args: dict  # (class or None, FuncId, position) -> bool
    fields: dict
    members: dict
    global_vars: dict
    global_funcs: dict

    def is_enum_lit(self, name) -> bool:
        return name in self.enum_literals

    def is_func(self, name) -> bool:
        return name in self.funcs

    def ref_arg(self, func, pos, cls=None) -> bool:
        if cls is None:
            for (c, f, i), v in self.ref_args.items():
                if f == func and i == pos and (c == self.cls or c is None):
                    return v
            return False
        return self.ref_args.get((cls, func, pos), False)


class _Collector:
    """Walks every body of the target class, resolving each identifier."""

    def __init__(self, index: ProgramIndex, cls: str):
        self.index = index
        self.scopes = Scopes(index, cls)
        self.locals: dict[str, bool] = {}

    def declare(self, var, loc):
        self.scopes.declare(var, loc)
        self.locals[var.name] = self.locals.get(var.name, False) or var.by_ref

    def body(self, params, block):
        self.scopes.push()
        for p in params:
            self.declare(LocalVar(p.name, p.type, p.by_ref), None)
        self.stmts(block.stmts)
        self.scopes.pop()

    def stmts(self, stmts):
        for s in stmts:
            self.stmt(s)

    def stmt(self, s):
        match s:
            case A.Block(stmts):
                self.scopes.push()
                self.stmts(stmts)
                self.scopes.pop()
            case A.ReturnStmt(e) | A.ThrowStmt(e):
                if e is not None:
                    self.expr(e)
            case A.VarDecl(t, n, init, by_ref):
                if init is not None:
                    self.expr(init)
                lam = init.params if isinstance(init, A.Lambda) else None
                self.declare(LocalVar(n, t, by_ref, lam), s.loc)
            case A.Assignment(t, v):
                self.expr(t)
                self.expr(v)
            case A.ExprStmt(e):
                self.expr(e)
            case A.If(c, then, orelse):
                self.expr(c)
                self.scoped(then)
                if orelse is not None:
                    self.scoped(orelse)
            case A.WhileStmt(c, body):
                self.expr(c)
                self.scoped(body)
            case A.ForStmt(init, cond, step, body):
                self.scopes.push()
                if init is not None:
                    self.stmt(init)
                if cond is not None:
                    self.expr(cond)
                if step is not None:
                    self.stmt(step)
                self.scoped(body)
                self.scopes.pop()
            case A.Switch(subject, cases, default):
                self.expr(subject)
                self.scopes.push()
                for c in cases:
                    self.expr(c.value)
                    self.stmts(c.body)
                if default is not None:
                    self.stmts(default)
                self.scopes.pop()
            case A.TryCatch(body, handler):
                self.stmt(body)
                self.stmt(handler)

    def scoped(self, s):
        self.scopes.push()
        self.stmt(s)
        self.scopes.pop()

    def expr(self, e):
        match e:
            case A.Name(n):
                self.scopes.lookup(n, e.loc)
            case A.PostInc(n):
                self.scopes.lookup(n, e.loc)
            case A.BinOp(_, l, r):
                self.expr(l)
                self.expr(r)
            case A.Unary(_, o):
                self.expr(o)
            case A.Ternary(c, t, f):
                self.expr(c)
                self.expr(t)
                self.expr(f)
            case A.Member(o, _) | A.Index(o, _):
                self.expr(o)
                if isinstance(e, A.Index):
                    self.expr(e.index)
            case A.CallExpr(f, args):
                self.scopes.lookup(f, e.loc)
                for a in args:
                    self.expr(a)
            case A.MethodCall(o, _, args):
                self.expr(o)
                for a in args:
                    self.expr(a)
            case A.BraceList(items):
                for i in items:
                    self.expr(i)
            case A.Lambda(caps, params, body):
                outer = {}
                for c in caps:
                    r = self.scopes.lookup(c.name, e.loc)
                    if r.kind != "local":
                        raise self.index.error(f"lambda can only capture locals, not '{c.name}'", e.loc)
                    outer[c.name] = r
                self.scopes.push(barrier=True)
                for c in caps:
                    r = outer[c.name]
                    self.declare(LocalVar(c.name, r.type, c.by_ref, r.local.lambda_params), e.loc)
                for p in params:
                    self.declare(LocalVar(p.name, p.type, p.by_ref), e.loc)
                self.stmts(body.stmts)
                self.scopes.pop()


def build_symbol_table(tu: A.TranslationUnit, target: str, filename: str = "<input>",
                       index: ProgramIndex | None = None) -> SymbolTable:
    index = index or ProgramIndex(tu, filename)
    if target not in index.classes:
        raise SymbolError(f"class '{target}' is not declared", 0, 0, filename)
    info = index.classes[target]
    col = _Collector(index, target)
    for m in info.decl.methods:
        if m.body is not None:
            col.body(m.params, m.body)
    for k in info.decl.constructors:
        col.body(k.params, k.body)
    scope_of = {name: Scope.GLOBAL for name in list(info.fields) + list(info.members) + list(index.global_vars)}
    is_ref = {name: False for name in scope_of}
    for name, by_ref in col.locals.items():
        scope_of[name] = Scope.LOCAL
        is_ref[name] = by_ref
    funcs = set(info.methods)
    for cls in set(info.members.values()):
        funcs.update(index.classes[cls].methods)
    ref_args = {}
    for cname, cinfo in index.classes.items():
        for m in cinfo.methods.values():
            for i, p in enumerate(m.params):
                ref_args[(cname, m.name, i)] = p.by_ref
    for g in index.global_funcs.values():
        for i, p in enumerate(g.params):
            ref_args[(None, g.name, i)] = p.by_ref
    return SymbolTable(
        cls=target, scope_of=scope_of, is_ref=is_ref, enum_literals=dict(index.enum_of),
        enums=dict(index.enums), funcs=funcs, ref_args=ref_args, fields=dict(info.fields),
        members=dict(info.members), global_vars=dict(index.global_vars),
        global_funcs=dict(index.global_funcs),
    )
