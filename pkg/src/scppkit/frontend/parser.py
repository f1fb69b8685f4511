"""Recursive-descent parser for MOO translation units."""
from __future__ import annotations

from ..scpp import RESERVED_PREFIXES
from . import ast as A
from .lexer import MooError, Token, tokenize

PRIMITIVE_TYPES = ("int", "bool", "void", "auto", "string", "list")
VISIBILITIES = ("public", "private", "protected")

# binary precedence table, loosest first
_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("|",),
    ("&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/"),
]


class ParseError(MooError):
    pass


class Parser:
    def __init__(self, tokens: list[Token], filename: str = "<input>"):
        self.tokens = tokens
        self.pos = 0
        self.filename = filename

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k=1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col, self.filename)

    def at(self, text, tok=None) -> bool:
        tok = tok or self.tok
        return tok.kind in ("punct", "kw") and tok.text == text

    def accept(self, text) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of file"
            raise self.error(f"expected '{text}' but found '{found}'")
        tok = self.tok
        self.pos += 1
        return tok

    def ident(self) -> str:
        tok = self.tok
        if tok.kind != "ident":
            raise self.error(f"expected identifier but found '{tok.text or 'end of file'}'")
        if tok.text.startswith(RESERVED_PREFIXES):
            raise self.error(f"identifier '{tok.text}' uses a reserved prefix")
        self.pos += 1
        return tok.text

    def loc(self) -> A.Loc:
        return A.Loc(self.tok.line, self.tok.col)

    # -- declarations

    def translation_unit(self) -> A.TranslationUnit:
        tu = A.TranslationUnit()
        while self.tok.kind != "eof":
            if self.at("enum"):
                tu.enums.append(self.enum_decl())
            elif self.at("class"):
                tu.classes.append(self.class_decl())
            else:
                tu.globals.append(self.global_decl())
        return tu

    def enum_decl(self) -> A.EnumDecl:
        loc = self.loc()
        self.expect("enum")
        self.accept("class")
        name = self.ident()
        self.expect("{")
        literals = []
        while not self.at("}"):
            literals.append(self.ident())
            if not self.accept(","):
                break
        self.expect("}")
        self.expect(";")
        return A.EnumDecl(name, literals, loc)

    def type_ref(self) -> A.TypeRef:
        tok = self.tok
        if tok.kind == "kw" and tok.text in PRIMITIVE_TYPES:
            self.pos += 1
            if tok.text == "list":
                self.expect("<")
                elem = self.type_ref()
                self.expect(">")
                return A.TypeRef("list", elem)
            return A.TypeRef(tok.text)
        if tok.kind == "ident":
            return A.TypeRef(self.ident())
        raise self.error(f"expected a type but found '{tok.text or 'end of file'}'")

    def params(self) -> list:
        self.expect("(")
        out = []
        while not self.at(")"):
            ty = self.type_ref()
            by_ref = self.accept("&")
            if self.at("*"):
                raise self.error("pointer types are not supported")
            out.append(A.Param(ty, self.ident(), by_ref))
            if not self.accept(","):
                break
        self.expect(")")
        return out

    def class_decl(self) -> A.ClassDecl:
        loc = self.loc()
        self.expect("class")
        name = self.ident()
        if self.at(":"):
            raise self.error("inheritance is not supported")
        cls = A.ClassDecl(name, [], [], [], [], loc)
        self.expect("{")
        visibility = "private"
        while not self.at("}"):
            if self.tok.kind == "kw" and self.tok.text in VISIBILITIES:
                visibility = self.tok.text
                self.pos += 1
                self.expect(":")
                continue
            mloc = self.loc()
            if self.tok.kind == "ident" and self.tok.text == name and self.at("(", self.peek()):
                self.pos += 1
                params = self.params()
                inits = []
                if self.accept(":"):
                    while True:
                        field_name = self.ident()
                        self.expect("(")
                        inits.append((field_name, self.expression()))
                        self.expect(")")
                        if not self.accept(","):
                            break
                cls.constructors.append(A.CtorDecl(name, params, inits, self.block(), visibility, mloc))
                continue
            ty = self.type_ref()
            if self.at("&") or self.at("*"):
                raise self.error("reference and pointer fields are not supported")
            member_name = self.ident()
            if self.at("("):
                params = self.params()
                body = None if self.accept(";") else self.block()
                cls.methods.append(A.MethodDecl(member_name, ty, params, body, visibility, mloc))
                continue
            init = self.expression() if self.accept("=") else None
            self.expect(";")
            cls.fields.append(A.FieldDecl(ty, member_name, visibility, init, mloc))
        self.expect("}")
        self.expect(";")
        return cls

    def global_decl(self):
        loc = self.loc()
        ty = self.type_ref()
        name = self.ident()
        if self.at("("):
            params = self.params()
            self.expect(";")
            return A.MethodDecl(name, ty, params, None, "public", loc)
        self.expect(";")
        return A.GlobalVar(ty, name, loc)

    # -- statements

    def block(self) -> A.Block:
        loc = self.loc()
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("expected '}' but found 'end of file'")
            stmts.append(self.statement())
        self.expect("}")
        return A.Block(stmts, loc)

    def _starts_decl(self) -> bool:
        tok = self.tok
        if tok.kind == "kw" and tok.text in PRIMITIVE_TYPES:
            return True
        if tok.kind == "ident":
            nxt = self.peek()
            if nxt.kind == "ident":
                return True
            if self.at("&", nxt) and self.peek(2).kind == "ident" and self.at("=", self.peek(3)):
                return True
        return False

    def var_decl(self) -> A.VarDecl:
        loc = self.loc()
        ty = self.type_ref()
        by_ref = self.accept("&")
        if self.at("*"):
            raise self.error("pointer types are not supported")
        name = self.ident()
        init = self.expression() if self.accept("=") else None
        return A.VarDecl(ty, name, init, by_ref, loc)

    def simple_statement(self):
        """Assignment or expression, without the trailing ';'."""
        loc = self.loc()
        expr = self.expression()
        if self.accept("="):
            if not isinstance(expr, (A.Name, A.Member)):
                raise self.error("left-hand side of assignment must be a variable or member")
            return A.Assignment(expr, self.expression(), loc)
        return A.ExprStmt(expr, loc)

    def statement(self):
        loc = self.loc()
        tok = self.tok
        if self.at("{"):
            return self.block()
        if self.accept(";"):
            return A.Empty(loc)
        if tok.kind == "kw":
            match tok.text:
                case "return":
                    self.pos += 1
                    expr = None if self.at(";") else self.expression()
                    self.expect(";")
                    return A.ReturnStmt(expr, loc)
                case "if":
                    self.pos += 1
                    self.expect("(")
                    cond = self.expression()
                    self.expect(")")
                    then = self.statement()
                    orelse = self.statement() if self.accept("else") else None
                    return A.If(cond, then, orelse, loc)
                case "while":
                    self.pos += 1
                    self.expect("(")
                    cond = self.expression()
                    self.expect(")")
                    return A.WhileStmt(cond, self.statement(), loc)
                case "for":
                    return self.for_statement()
                case "continue":
                    self.pos += 1
                    self.expect(";")
                    return A.Continue(loc)
                case "break":
                    self.pos += 1
                    self.expect(";")
                    return A.Break(loc)
                case "switch":
                    return self.switch_statement()
                case "try":
                    self.pos += 1
                    body = self.block()
                    self.expect("catch")
                    self.expect("(")
                    self.expect("...")
                    self.expect(")")
                    return A.TryCatch(body, self.block(), loc)
                case "throw":
                    self.pos += 1
                    expr = None if self.at(";") else self.expression()
                    self.expect(";")
                    return A.ThrowStmt(expr, loc)
        if self._starts_decl():
            decl = self.var_decl()
            self.expect(";")
            return decl
        stmt = self.simple_statement()
        self.expect(";")
        return stmt

    def for_statement(self) -> A.ForStmt:
        loc = self.loc()
        self.expect("for")
        self.expect("(")
        init = None
        if not self.at(";"):
            init = self.var_decl() if self._starts_decl() else self.simple_statement()
        self.expect(";")
        cond = None if self.at(";") else self.expression()
        self.expect(";")
        step = None if self.at(")") else self.simple_statement()
        self.expect(")")
        return A.ForStmt(init, cond, step, self.statement(), loc)

    def switch_statement(self) -> A.Switch:
        loc = self.loc()
        self.expect("switch")
        self.expect("(")
        subject = self.expression()
        self.expect(")")
        self.expect("{")
        cases, default = [], None
        while not self.at("}"):
            if default is not None:
                raise self.error("'default' must be the last label of a switch")
            if self.accept("case"):
                value = self.expression()
                self.expect(":")
                cases.append(A.Case(value, self._case_body()))
            elif self.accept("default"):
                self.expect(":")
                default = self._case_body()
            else:
                raise self.error(f"expected 'case' or 'default' but found '{self.tok.text}'")
        self.expect("}")
        return A.Switch(subject, cases, default, loc)

    def _case_body(self) -> list:
        body = []
        while not (self.at("case") or self.at("default") or self.at("}")):
            body.append(self.statement())
        return body

    # -- expressions

    def expression(self):
        loc = self.loc()
        cond = self.binary(0)
        if self.accept("?"):
            then = self.expression()
            self.expect(":")
            return A.Ternary(cond, then, self.expression(), loc)
        return cond

    def binary(self, level):
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        while self.tok.kind == "punct" and self.tok.text in _BINARY_LEVELS[level]:
            loc = self.loc()
            op = self.tok.text
            self.pos += 1
            left = A.BinOp(op, left, self.binary(level + 1), loc)
        return left

    def unary(self):
        loc = self.loc()
        if self.accept("!"):
            return A.Unary("!", self.unary(), loc)
        if self.accept("-"):
            return A.Unary("-", self.unary(), loc)
        return self.postfix()

    def args(self) -> list:
        self.expect("(")
        out = []
        while not self.at(")"):
            out.append(self.expression())
            if not self.accept(","):
                break
        self.expect(")")
        return out

    def postfix(self):
        expr = self.primary()
        while True:
            loc = self.loc()
            if self.at("++"):
                if not isinstance(expr, A.Name):
                    raise self.error("'++' is only supported on plain variables")
                self.pos += 1
                expr = A.PostInc(expr.id, expr.loc)
            elif self.at(".") or self.at("->"):
                arrow = self.tok.text == "->"
                self.pos += 1
                name = self.ident()
                if self.at("("):
                    expr = A.MethodCall(expr, name, self.args(), arrow, loc)
                else:
                    expr = A.Member(expr, name, arrow, loc)
            elif self.at("["):
                self.pos += 1
                index = self.expression()
                self.expect("]")
                expr = A.Index(expr, index, loc)
            elif self.at("(") and isinstance(expr, A.Name):
                expr = A.CallExpr(expr.id, self.args(), expr.loc)
            else:
                return expr

    def primary(self):
        loc = self.loc()
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            return A.IntLit(tok.value, loc)
        if tok.kind == "string":
            self.pos += 1
            return A.StrLit(tok.value, loc)
        if tok.kind == "ident":
            return A.Name(self.ident(), loc)
        if self.accept("true"):
            return A.BoolLit(True, loc)
        if self.accept("false"):
            return A.BoolLit(False, loc)
        if self.accept("this"):
            return A.This(loc)
        if self.accept("("):
            inner = self.expression()
            self.expect(")")
            return inner
        if self.at("["):
            return self.lambda_expr()
        if self.accept("{"):
            items = []
            while not self.at("}"):
                items.append(self.expression())
                if not self.accept(","):
                    break
            self.expect("}")
            return A.BraceList(items, loc)
        raise self.error(f"expected an expression but found '{tok.text or 'end of file'}'")

    def lambda_expr(self) -> A.Lambda:
        loc = self.loc()
        self.expect("[")
        captures = []
        while not self.at("]"):
            by_ref = self.accept("&")
            captures.append(A.Capture(self.ident(), by_ref))
            if not self.accept(","):
                break
        self.expect("]")
        params = self.params()
        return A.Lambda(captures, params, self.block(), loc)


def _split_members(tu: A.TranslationUnit) -> A.TranslationUnit:
    # class-typed fields are members; everything else stays a plain field
    enums = {e.name for e in tu.enums}
    for cls in tu.classes:
        plain, members = [], []
        for f in cls.fields:
            if f.type.name in PRIMITIVE_TYPES or f.type.name in enums:
                plain.append(f)
            else:
                members.append(f)
        cls.fields, cls.members = plain, members
    return tu


def parse_translation_unit(tokens: list[Token], filename: str = "<input>") -> A.TranslationUnit:
    return _split_members(Parser(tokens, filename).translation_unit())


def parse_source(source: str, filename: str = "<input>") -> A.TranslationUnit:
    return parse_translation_unit(tokenize(source, filename), filename)
