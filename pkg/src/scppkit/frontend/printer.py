"""Pretty printer producing MOO source that parses back to the same tree.

Compound sub-expressions are always parenthesized, so the printer never
needs a precedence table.
"""
from __future__ import annotations

from . import ast as A


def _str_lit(text: str) -> str:
    out = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def _type(t: A.TypeRef) -> str:
    return str(t)


def _atomic(e) -> bool:
    return isinstance(e, (A.IntLit, A.BoolLit, A.StrLit, A.Name, A.This, A.PostInc,
                          A.Member, A.Index, A.CallExpr, A.MethodCall, A.BraceList))


def expr(e) -> str:
    match e:
        case A.IntLit(v):
            return str(v) if v >= 0 else f"({v})"
        case A.BoolLit(v):
            return "true" if v else "false"
        case A.StrLit(v):
            return _str_lit(v)
        case A.Name(i):
            return i
        case A.This():
            return "this"
        case A.BinOp(op, l, r):
            return f"({expr(l)} {op} {expr(r)})"
        case A.Unary(op, operand):
            return f"({op}{_sub(operand)})"
        case A.PostInc(t):
            return f"{t}++"
        case A.Ternary(c, t, f):
            return f"({expr(c)} ? {expr(t)} : {expr(f)})"
        case A.Member(o, n, arrow):
            return f"{_sub(o)}{'->' if arrow else '.'}{n}"
        case A.Index(s, i):
            return f"{_sub(s)}[{expr(i)}]"
        case A.CallExpr(f, args):
            return f"{f}({', '.join(expr(a) for a in args)})"
        case A.MethodCall(o, f, args, arrow):
            return f"{_sub(o)}{'->' if arrow else '.'}{f}({', '.join(expr(a) for a in args)})"
        case A.Lambda(caps, params, body):
            cs = ", ".join(("&" if c.by_ref else "") + c.name for c in caps)
            return f"[{cs}]({_params(params)}) {_block_inline(body)}"
        case A.BraceList(items):
            return "{" + ", ".join(expr(i) for i in items) + "}"
    raise TypeError(f"cannot print expression {e!r}")


def _sub(e) -> str:
    text = expr(e)
    if _atomic(e) or text.startswith("("):
        return text
    return f"({text})"


def _params(params) -> str:
    return ", ".join(f"{_type(p.type)}{'&' if p.by_ref else ''} {p.name}" for p in params)


def _block_inline(b: A.Block) -> str:
    return "{ " + " ".join(stmt(s, 0).strip() for s in b.stmts) + (" }" if b.stmts else "}")


def _simple(s) -> str:
    match s:
        case A.VarDecl(t, n, init, by_ref):
            head = f"{_type(t)}{'&' if by_ref else ''} {n}"
            return head if init is None else f"{head} = {expr(init)}"
        case A.Assignment(t, v):
            return f"{expr(t)} = {expr(v)}"
        case A.ExprStmt(e):
            return expr(e)
    raise TypeError(f"not a simple statement: {s!r}")


def stmt(s, indent: int = 0) -> str:
    pad = "    " * indent
    match s:
        case A.Block(stmts):
            inner = "".join(stmt(x, indent + 1) for x in stmts)
            return f"{pad}{{\n{inner}{pad}}}\n"
        case A.ReturnStmt(e):
            return f"{pad}return;\n" if e is None else f"{pad}return {expr(e)};\n"
        case A.VarDecl() | A.Assignment() | A.ExprStmt():
            return f"{pad}{_simple(s)};\n"
        case A.If(c, then, orelse):
            text = f"{pad}if ({expr(c)})\n{_body(then, indent)}"
            if orelse is not None:
                text += f"{pad}else\n{_body(orelse, indent)}"
            return text
        case A.WhileStmt(c, body):
            return f"{pad}while ({expr(c)})\n{_body(body, indent)}"
        case A.ForStmt(init, cond, step, body):
            i = _simple(init) if init is not None else ""
            c = expr(cond) if cond is not None else ""
            st = _simple(step) if step is not None else ""
            return f"{pad}for ({i}; {c}; {st})\n{_body(body, indent)}"
        case A.Continue():
            return f"{pad}continue;\n"
        case A.Break():
            return f"{pad}break;\n"
        case A.Switch(subject, cases, default):
            text = f"{pad}switch ({expr(subject)}) {{\n"
            for case in cases:
                text += f"{pad}case {expr(case.value)}:\n"
                text += "".join(stmt(x, indent + 1) for x in case.body)
            if default is not None:
                text += f"{pad}default:\n" + "".join(stmt(x, indent + 1) for x in default)
            return text + f"{pad}}}\n"
        case A.TryCatch(body, handler):
            return f"{pad}try\n{stmt(body, indent)}{pad}catch (...)\n{stmt(handler, indent)}"
        case A.ThrowStmt(e):
            return f"{pad}throw;\n" if e is None else f"{pad}throw {expr(e)};\n"
        case A.Empty():
            return f"{pad};\n"
    raise TypeError(f"cannot print statement {s!r}")


def _body(s, indent: int) -> str:
    if isinstance(s, A.Block):
        return stmt(s, indent)
    return stmt(s, indent + 1)


def _method(m: A.MethodDecl, indent: int) -> str:
    pad = "    " * indent
    head = f"{pad}{_type(m.return_type)} {m.name}({_params(m.params)})"
    if m.body is None:
        return head + ";\n"
    return head + "\n" + stmt(m.body, indent)


def _ctor(c: A.CtorDecl, indent: int) -> str:
    pad = "    " * indent
    head = f"{pad}{c.name}({_params(c.params)})"
    if c.initializers:
        head += " : " + ", ".join(f"{n}({expr(e)})" for n, e in c.initializers)
    return head + "\n" + stmt(c.body, indent)


def _field(f: A.FieldDecl, indent: int) -> str:
    pad = "    " * indent
    init = "" if f.init is None else f" = {expr(f.init)}"
    return f"{pad}{_type(f.type)} {f.name}{init};\n"


def _class(c: A.ClassDecl) -> str:
    out = [f"class {c.name} {{\n"]
    groups = [(f.visibility, _field(f, 1)) for f in c.fields + c.members]
    groups += [(k.visibility, _ctor(k, 1)) for k in c.constructors]
    groups += [(m.visibility, _method(m, 1)) for m in c.methods]
    current = "private"
    for vis, text in groups:
        if vis != current:
            out.append(f"{vis}:\n")
            current = vis
        out.append(text)
    out.append("};\n")
    return "".join(out)


def print_translation_unit(tu: A.TranslationUnit) -> str:
    parts = []
    for e in tu.enums:
        parts.append(f"enum {e.name} {{ {', '.join(e.literals)} }};\n")
    for g in tu.globals:
        if isinstance(g, A.GlobalVar):
            parts.append(f"{_type(g.type)} {g.name};\n")
        else:
            parts.append(_method(g, 0))
    for c in tu.classes:
        parts.append(_class(c))
    return "\n".join(parts)
