"""Big-step reference interpreter for MOO programs.

Runs a script of top-level calls against a set of objects and logs every
externally visible interaction in the same label syntax the explorer
uses.  It works on source trees directly and shares nothing with the
transformation pipeline apart from the value types, so it can serve as an
oracle for it.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field

from . import scpp as S
from .frontend import ast as A
from .scpp import (VOID, Boolean, EnumType, FieldRef, LocalRef, Number, OrderedSet, Polarity, PType,
                   StringType)

MAX_DEPTH = 400


class InterpError(Exception):
    pass


class _Thrown(Exception):
    pass


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class _Return(Exception):
    def __init__(self, value):
        self.value = value


@dataclass
class Obj:
    proc: str
    cls: A.ClassDecl
    fields: dict


class Frame:
    def __init__(self, proc, vars_=None, refs=None):
        self.proc = proc
        self.vars = dict(vars_ or {})
        self.refs = dict(refs or {})  # name -> cell, for reference parameters and captures


@dataclass(frozen=True)
class LocalCell:
    frame: Frame
    name: str

    def __hash__(self):
        return hash((id(self.frame), self.name))


@dataclass(frozen=True)
class FieldCell:
    proc: str
    name: str


@dataclass
class Closure:
    params: list
    copies: dict
    cells: dict
    body: A.Block


@dataclass
class InterpResult:
    log: list = field(default_factory=list)
    fields: dict = field(default_factory=dict)


def _num(v, what):
    if not isinstance(v, Number):
        raise InterpError(f"{what}: expected a number, got {S.render_value(v)}")
    return v.value


def _truth(v, what):
    if not isinstance(v, Boolean):
        raise InterpError(f"{what}: expected a boolean, got {S.render_value(v)}")
    return v.value


def _mk(n):
    try:
        return Number(n)
    except OverflowError:
        raise InterpError("arithmetic overflow") from None


_CMP = {"<": lambda a, b: a < b, "<=": lambda a, b: a <= b, ">": lambda a, b: a > b, ">=": lambda a, b: a >= b}


class Interpreter:
    def __init__(self, tu: A.TranslationUnit):
        self.tu = tu
        self.enum_lits = {lit for e in tu.enums for lit in e.literals}
        self.objects: dict[str, Obj] = {}
        self.log: list[str] = []
        self.busy: list[str] = []
        self._stack: list[Frame] = []

    # ---------------------------------------------------------------- setup

    def instantiate(self, proc, cls_name, fields=None, members=None):
        cls = self.tu.cls(cls_name)
        if cls is None:
            raise InterpError(f"unknown class '{cls_name}'")
        obj = Obj(proc, cls, {})
        self.objects[proc] = obj
        members = members or {}
        for m in cls.members:
            if m.name not in members:
                raise InterpError(f"{proc}: member '{m.name}' is not wired")
            obj.fields[m.name] = PType(members[m.name])
        frame = Frame(proc)
        self.busy.append(proc)
        try:
            for f in cls.fields:
                obj.fields[f.name] = self.eval(f.init, frame) if f.init is not None else VOID
            for k in cls.constructors:
                if k.params:
                    continue
                for name, e in k.initializers:
                    if any(m.name == name for m in cls.members):
                        continue
                    obj.fields[name] = self.eval(e, frame)
                self.exec_block(k.body, frame)
        finally:
            self.busy.pop()
        for name, v in (fields or {}).items():
            obj.fields[name] = v
        return obj

    # ----------------------------------------------------------- variables

    def _field_owner(self, frame, name):
        obj = self.objects[frame.proc]
        return obj if name in obj.fields else None

    def read_cell(self, cell, frame):
        if isinstance(cell, LocalCell):
            return cell.frame.vars.get(cell.name, VOID)
        return self.read_field(cell.proc, cell.name, frame)

    def write_cell(self, cell, value, frame):
        if isinstance(cell, LocalCell):
            cell.frame.vars[cell.name] = value
        else:
            self.write_field(cell.proc, cell.name, value, frame)

    def _object(self, proc):
        obj = self.objects.get(proc)
        if obj is None:
            raise InterpError(f"process '{proc}' is not part of the program")
        return obj

    def read_field(self, proc, name, frame):
        obj = self._object(proc)
        v = obj.fields.get(name, VOID)
        if proc != frame.proc:
            if proc in self.busy:
                raise InterpError(f"field access on busy object {proc}")
            self.log.append(S.render_action(S.load_action(Polarity.COMM, proc, name, v)))
        return v

    def write_field(self, proc, name, value, frame):
        obj = self._object(proc)
        if proc != frame.proc:
            if proc in self.busy:
                raise InterpError(f"field access on busy object {proc}")
            self.log.append(S.render_action(S.store_action(Polarity.COMM, proc, name, value)))
        obj.fields[name] = value

    def lookup(self, name, frame):
        if name in frame.refs:
            return self.read_cell(frame.refs[name], frame)
        if name in frame.vars:
            return frame.vars[name]
        if self._field_owner(frame, name) is not None:
            return self.objects[frame.proc].fields[name]
        if name in self.enum_lits:
            return EnumType(name)
        raise InterpError(f"unbound name '{name}'")

    def assign(self, name, value, frame):
        if name in frame.refs:
            self.write_cell(frame.refs[name], value, frame)
        elif name in frame.vars:
            frame.vars[name] = value
        elif self._field_owner(frame, name) is not None:
            self.objects[frame.proc].fields[name] = value
        else:
            raise InterpError(f"assignment to undeclared '{name}'")

    def cell_of(self, e, frame):
        """Cell denoted by a reference argument, plus its LRA name and visible value."""
        match e:
            case A.Name(name) if name in frame.refs:
                return frame.refs[name], name
            case A.Name(name) if name in frame.vars:
                return LocalCell(frame, name), name
            case A.Name(name) if self._field_owner(frame, name) is not None:
                return FieldCell(frame.proc, name), None
            case A.Member(obj, name):
                p = self.eval(obj, frame)
                if not isinstance(p, PType):
                    raise InterpError("member access on a non-object")
                return FieldCell(p.proc, name), None
        raise InterpError("argument cannot be passed by reference")

    # --------------------------------------------------------- expressions

    def eval(self, e, frame):
        match e:
            case A.IntLit(v):
                return _mk(v)
            case A.BoolLit(v):
                return Boolean(v)
            case A.StrLit(v):
                return StringType(v)
            case A.This():
                return PType(frame.proc)
            case A.Name(name):
                return self.lookup(name, frame)
            case A.Unary("!", x):
                return Boolean(not _truth(self.eval(x, frame), "!"))
            case A.Unary("-", x):
                return _mk(-_num(self.eval(x, frame), "unary minus"))
            case A.BinOp("&&", l, r):
                return Boolean(_truth(self.eval(l, frame), "&&") and _truth(self.eval(r, frame), "&&"))
            case A.BinOp("||", l, r):
                return Boolean(_truth(self.eval(l, frame), "||") or _truth(self.eval(r, frame), "||"))
            case A.BinOp(op, l, r):
                return self.binop(op, self.eval(l, frame), self.eval(r, frame))
            case A.PostInc(name):
                old = self.lookup(name, frame)
                self.assign(name, _mk(_num(old, "++") + 1), frame)
                return old
            case A.Ternary(c, t, f):
                return self.eval(t, frame) if _truth(self.eval(c, frame), "?:") else self.eval(f, frame)
            case A.Member(obj, name):
                p = self.eval(obj, frame)
                if not isinstance(p, PType):
                    raise InterpError("member access on a non-object")
                return self.read_field(p.proc, name, frame)
            case A.Index(seq, idx):
                vs = self.eval(seq, frame)
                i = _num(self.eval(idx, frame), "subscript")
                if not isinstance(vs, OrderedSet):
                    raise InterpError("subscript on a non-list")
                if not 0 <= i < len(vs.items):
                    raise InterpError(f"index {i} out of range")
                return vs.items[i]
            case A.BraceList(items):
                return OrderedSet(tuple(self.eval(x, frame) for x in items))
            case A.Lambda(captures, params, body):
                copies, cells = {}, {}
                for c in captures:
                    if c.by_ref:
                        cells[c.name] = frame.refs.get(c.name) or LocalCell(frame, c.name)
                    else:
                        copies[c.name] = self.lookup(c.name, frame)
                return Closure(list(params), copies, cells, body)
            case A.CallExpr(func, args):
                target = frame.vars.get(func)
                if isinstance(target, Closure):
                    return self.call_closure(target, args, frame)
                return self.call_method(frame.proc, func, args, frame)
            case A.MethodCall(obj, func, args):
                p = self.eval(obj, frame)
                if not isinstance(p, PType):
                    raise InterpError(f"method call on a non-object {S.render_value(p)}")
                return self.call_method(p.proc, func, args, frame)
        raise InterpError(f"unsupported expression {type(e).__name__}")

    def binop(self, op, a, b):
        match op:
            case "==":
                return Boolean(a == b)
            case "!=":
                return Boolean(a != b)
            case "&":
                return Boolean(_truth(a, op) & _truth(b, op))
            case "|":
                return Boolean(_truth(a, op) | _truth(b, op))
        x, y = _num(a, op), _num(b, op)
        match op:
            case "+":
                return _mk(x + y)
            case "-":
                return _mk(x - y)
            case "*":
                return _mk(x * y)
            case "/":
                if y == 0:
                    raise InterpError("division by zero")
                q = abs(x) // abs(y)
                return _mk(q if (x < 0) == (y < 0) else -q)
        if op in _CMP:
            return Boolean(_CMP[op](x, y))
        raise InterpError(f"unknown operator {op}")

    # --------------------------------------------------------------- calls

    def _bind(self, params, args, caller):
        vars_, refs, shown, lras = {}, {}, [], []
        if len(params) != len(args):
            raise InterpError(f"expected {len(params)} argument(s), got {len(args)}")
        for p, a in zip(params, args):
            if p.by_ref and not (isinstance(a, A.Name) and a.id in self.enum_lits
                                 and a.id not in caller.vars and a.id not in caller.refs):
                cell, lra = self.cell_of(a, caller)
                refs[p.name] = cell
                if isinstance(cell, FieldCell):
                    shown.append(FieldRef(cell.proc, cell.name))
                    if lra is not None:
                        lras.append((lra, cell))
                else:
                    shown.append(LocalRef(lra))
                    lras.append((lra, cell))
            else:
                v = self.eval(a, caller)
                vars_[p.name] = v
                shown.append(v)
        return vars_, refs, shown, lras

    @staticmethod
    def _lra_values(lras, *_):
        out = []
        for name, cell in lras:
            if isinstance(cell, FieldCell):
                out.append((name, FieldRef(cell.proc, cell.name)))
            else:
                out.append((name, cell.frame.vars.get(cell.name, VOID)))
        return tuple(out)

    def call_closure(self, clo: Closure, args, caller: Frame):
        vars_, refs, _, _ = self._bind(clo.params, args, caller)
        frame = Frame(caller.proc, {**clo.copies, **vars_}, {**clo.cells, **refs})
        return self._run(clo.body, frame)

    def call_method(self, proc, func, args, caller: Frame):
        obj = self._object(proc)
        m = obj.cls.method(func)
        if m is None or m.body is None:
            raise InterpError(f"{obj.cls.name} has no method '{func}'")
        vars_, refs, shown, lras = self._bind(m.params, args, caller)
        frame = Frame(proc, vars_, refs)
        if proc == caller.proc:
            return self._run(m.body, frame)
        if proc in self.busy:
            raise InterpError(f"call to busy object {proc}")
        self.log.append(S.render_action(S.call_action(
            Polarity.COMM, proc, func, tuple(shown), self._lra_values(lras, caller, self))))
        self.busy.append(proc)
        try:
            v = self._run(m.body, frame)
        except _Thrown:
            self.busy.pop()
            self.log.append(S.render_action(S.throw_action(
                Polarity.COMM, proc, func, self._lra_values(lras, caller, self))))
            raise
        self.busy.pop()
        self.log.append(S.render_action(S.return_action(
            Polarity.COMM, proc, func, v, self._lra_values(lras, caller, self))))
        return v

    def _run(self, body, frame):
        if len(self.busy) + len(self._stack) > MAX_DEPTH:
            raise InterpError("call depth limit exceeded")
        self._stack.append(frame)
        try:
            self.exec_block(body, frame)
            return VOID
        except _Return as r:
            return r.value
        except (_Break, _Continue):
            raise InterpError("break or continue outside a loop") from None
        finally:
            self._stack.pop()

    # ---------------------------------------------------------- statements

    def exec_block(self, b, frame):
        for s in b.stmts:
            self.exec(s, frame)

    def exec(self, s, frame):
        match s:
            case A.Block():
                self.exec_block(s, frame)
            case A.Empty():
                pass
            case A.ReturnStmt(e):
                raise _Return(VOID if e is None else self.eval(e, frame))
            case A.VarDecl(_, name, init, by_ref):
                if by_ref:
                    raise InterpError("reference variables are not supported")
                if init is not None:
                    frame.vars[name] = self.eval(init, frame)
                else:
                    frame.vars.setdefault(name, VOID)
            case A.Assignment(A.Member(obj, name), value):
                p = self.eval(obj, frame)
                v = self.eval(value, frame)
                if not isinstance(p, PType):
                    raise InterpError("member access on a non-object")
                self.write_field(p.proc, name, v, frame)
            case A.Assignment(A.Name(name), value):
                self.assign(name, self.eval(value, frame), frame)
            case A.ExprStmt(e):
                self.eval(e, frame)
            case A.If(c, then, orelse):
                if _truth(self.eval(c, frame), "if"):
                    self.exec(then, frame)
                elif orelse is not None:
                    self.exec(orelse, frame)
            case A.WhileStmt(c, body):
                while _truth(self.eval(c, frame), "while"):
                    try:
                        self.exec(body, frame)
                    except _Break:
                        break
                    except _Continue:
                        continue
            case A.ForStmt(init, cond, step, body):
                if init is not None:
                    self.exec(init, frame)
                while cond is None or _truth(self.eval(cond, frame), "for"):
                    try:
                        self.exec(body, frame)
                    except _Break:
                        break
                    except _Continue:
                        pass
                    if step is not None:
                        self.exec(step, frame)
            case A.Continue():
                raise _Continue()
            case A.Break():
                raise _Break()
            case A.Switch(subject, cases, default):
                v = self.eval(subject, frame)
                start = next((i for i, c in enumerate(cases) if self.eval(c.value, frame) == v), None)
                bodies = [st for c in cases[start:] for st in c.body] if start is not None else []
                bodies += default or []
                try:
                    for st in bodies:
                        self.exec(st, frame)
                except _Break:
                    pass
            case A.TryCatch(body, handler):
                try:
                    self.exec(body, frame)
                except _Thrown:
                    self.exec(handler, frame)
            case A.ThrowStmt(e):
                if e is not None:
                    self.eval(e, frame)
                raise _Thrown()
            case _:
                raise InterpError(f"unsupported statement {type(s).__name__}")


def run_program(tu: A.TranslationUnit, script: dict) -> InterpResult:
    """Execute ``script`` (targetClass, targetProcId, instances, calls) against ``tu``.

    Call arguments and field values use the plain JSON value encoding.
    """
    from .environment import value_from_json

    interp = Interpreter(tu)
    target_cls = script["targetClass"]
    target = script.get("targetProcId", target_cls)
    instances = dict(script.get("instances", {}))
    instances.setdefault(target, {"class": target_cls})
    enums = {e.name: tuple(e.literals) for e in tu.enums}
    for proc in sorted(instances):
        inst = instances[proc]
        if inst.get("kind", "transformed") != "transformed":
            raise InterpError(f"{proc}: only transformed instances can be interpreted")
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20000))
    try:
        # construction order follows process ids, like the composition
        for proc in sorted(instances):
            inst = instances[proc]
            fields = {k: value_from_json(v, enums) for k, v in inst.get("fields", {}).items()}
            interp.instantiate(proc, inst.get("class", proc), fields, inst.get("members", {}))
        top = Frame("<top>")
        obj = interp.objects[target]
        for call in script.get("calls", ()):
            f = call["func"]
            m = obj.cls.method(f)
            if m is None or m.body is None:
                raise InterpError(f"{target_cls} has no method '{f}'")
            vals = [value_from_json(a, enums) for a in call.get("args", ())]
            if len(vals) != len(m.params):
                raise InterpError(f"'{f}' expects {len(m.params)} argument(s), got {len(vals)}")
            vars_, refs, shown, lras = {}, {}, [], []
            for i, (p, v) in enumerate(zip(m.params, vals)):
                if p.by_ref:
                    name = f"__top{i}"
                    top.vars[name] = v
                    cell = LocalCell(top, name)
                    refs[p.name] = cell
                    shown.append(LocalRef(name))
                    lras.append((name, cell))
                else:
                    vars_[p.name] = v
                    shown.append(v)
            interp.log.append(S.render_action(S.call_action(
                Polarity.COMM, target, f, tuple(shown), Interpreter._lra_values(lras, top, interp))))
            interp.busy.append(target)
            try:
                v = interp._run(m.body, Frame(target, vars_, refs))
            except _Thrown:
                interp.busy.pop()
                interp.log.append(S.render_action(S.throw_action(
                    Polarity.COMM, target, f, Interpreter._lra_values(lras, top, interp))))
                if call.get("throwsTerminates", False):
                    break
                continue
            interp.busy.pop()
            interp.log.append(S.render_action(S.return_action(
                Polarity.COMM, target, f, v, Interpreter._lra_values(lras, top, interp))))
    except RecursionError:
        raise InterpError("call depth limit exceeded") from None
    finally:
        sys.setrecursionlimit(limit)
    fields = {p: dict(o.fields) for p, o in interp.objects.items()}
    return InterpResult(interp.log, fields)
