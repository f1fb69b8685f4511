"""Source-level syntax trees for the MOO mini-language.

Source locations are carried on every node but excluded from equality so
that a parse/print/parse round trip compares structurally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Loc:
    line: int = 0
    col: int = 0

    def __str__(self):
        return f"{self.line}:{self.col}"


NOLOC = Loc()


def _loc():
    return field(default=NOLOC, compare=False, repr=False)


@dataclass
class TypeRef:
    name: str  # int, bool, void, auto, string, list, or a class/enum name
    elem: Optional["TypeRef"] = None  # element type for list<T>

    def __str__(self):
        return f"{self.name}<{self.elem}>" if self.elem else self.name


# ------------------------------------------------------------ expressions


@dataclass
class IntLit:
    value: int
    loc: Loc = _loc()


@dataclass
class BoolLit:
    value: bool
    loc: Loc = _loc()


@dataclass
class StrLit:
    value: str
    loc: Loc = _loc()


@dataclass
class Name:
    id: str
    loc: Loc = _loc()


@dataclass
class This:
    loc: Loc = _loc()


@dataclass
class BinOp:
    op: str  # + - * / == != < <= > >= && || & |
    left: "ExprAst"
    right: "ExprAst"
    loc: Loc = _loc()


@dataclass
class Unary:
    op: str  # ! or -
    operand: "ExprAst"
    loc: Loc = _loc()


@dataclass
class PostInc:
    target: str
    loc: Loc = _loc()


@dataclass
class Ternary:
    cond: "ExprAst"
    then: "ExprAst"
    orelse: "ExprAst"
    loc: Loc = _loc()


@dataclass
class Member:
    obj: "ExprAst"
    name: str
    arrow: bool = False
    loc: Loc = _loc()


@dataclass
class Index:
    seq: "ExprAst"
    index: "ExprAst"
    loc: Loc = _loc()


@dataclass
class CallExpr:
    func: str
    args: list
    loc: Loc = _loc()


@dataclass
class MethodCall:
    obj: "ExprAst"
    func: str
    args: list
    arrow: bool = False
    loc: Loc = _loc()


@dataclass
class Capture:
    name: str
    by_ref: bool = False


@dataclass
class Lambda:
    captures: list
    params: list  # of Param
    body: "Block"
    loc: Loc = _loc()


@dataclass
class BraceList:
    items: list
    loc: Loc = _loc()


ExprAst = Union[IntLit, BoolLit, StrLit, Name, This, BinOp, Unary, PostInc, Ternary,
                Member, Index, CallExpr, MethodCall, Lambda, BraceList]

# ------------------------------------------------------------- statements


@dataclass
class Block:
    stmts: list
    loc: Loc = _loc()


@dataclass
class ReturnStmt:
    expr: Optional[ExprAst]
    loc: Loc = _loc()


@dataclass
class VarDecl:
    type: TypeRef
    name: str
    init: Optional[ExprAst] = None
    by_ref: bool = False
    loc: Loc = _loc()


@dataclass
class Assignment:
    target: ExprAst  # Name or Member
    value: ExprAst
    loc: Loc = _loc()


@dataclass
class If:
    cond: ExprAst
    then: "StmtAst"
    orelse: Optional["StmtAst"] = None
    loc: Loc = _loc()


@dataclass
class WhileStmt:
    cond: ExprAst
    body: "StmtAst"
    loc: Loc = _loc()


@dataclass
class ForStmt:
    init: Optional["StmtAst"]
    cond: Optional[ExprAst]
    step: Optional["StmtAst"]
    body: "StmtAst"
    loc: Loc = _loc()


@dataclass
class Continue:
    loc: Loc = _loc()


@dataclass
class Break:
    loc: Loc = _loc()


@dataclass
class Case:
    value: ExprAst
    body: list


@dataclass
class Switch:
    subject: ExprAst
    cases: list  # of Case
    default: Optional[list] = None
    loc: Loc = _loc()


@dataclass
class TryCatch:
    body: Block
    handler: Block
    loc: Loc = _loc()


@dataclass
class ThrowStmt:
    expr: Optional[ExprAst] = None
    loc: Loc = _loc()


@dataclass
class ExprStmt:
    expr: ExprAst
    loc: Loc = _loc()


@dataclass
class Empty:
    loc: Loc = _loc()


StmtAst = Union[Block, ReturnStmt, VarDecl, Assignment, If, WhileStmt, ForStmt, Continue,
                Break, Switch, TryCatch, ThrowStmt, ExprStmt, Empty]

# ----------------------------------------------------------- declarations


@dataclass
class Param:
    type: TypeRef
    name: str
    by_ref: bool = False


@dataclass
class FieldDecl:
    type: TypeRef
    name: str
    visibility: str = "private"
    init: Optional[ExprAst] = None
    loc: Loc = _loc()


@dataclass
class MethodDecl:
    name: str
    return_type: TypeRef
    params: list
    body: Optional[Block]  # None for prototypes (global functions only)
    visibility: str = "private"
    loc: Loc = _loc()


@dataclass
class CtorDecl:
    name: str
    params: list
    initializers: list  # of (name, ExprAst)
    body: Block
    visibility: str = "public"
    loc: Loc = _loc()


@dataclass
class EnumDecl:
    name: str
    literals: list
    loc: Loc = _loc()


@dataclass
class ClassDecl:
    name: str
    fields: list  # FieldDecl with primitive/enum type
    members: list  # FieldDecl with class type
    constructors: list
    methods: list
    loc: Loc = _loc()

    def method(self, name):
        for m in self.methods:
            if m.name == name:
                return m
        return None


@dataclass
class GlobalVar:
    type: TypeRef
    name: str
    loc: Loc = _loc()


@dataclass
class TranslationUnit:
    enums: list = field(default_factory=list)
    classes: list = field(default_factory=list)
    globals: list = field(default_factory=list)  # GlobalVar and prototype MethodDecl

    def cls(self, name) -> ClassDecl | None:
        for c in self.classes:
            if c.name == name:
                return c
        return None
