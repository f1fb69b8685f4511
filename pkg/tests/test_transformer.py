import pytest

from conftest import read_fixture
from scppkit import scpp as S
from scppkit.frontend import ProgramIndex, Scopes, parse_source, tokenize
from scppkit.frontend import ast as A
from scppkit.frontend.parser import Parser
from scppkit.frontend.symbols import LocalVar
from scppkit.scpp import alpha_equal, parse_block
from scppkit.transformer import (FreshNameGenerator, Labels, transform_arguments, transform_expression,
                                 transform_program, transform_statement)

PRELUDE = "enum Color { Red, Green };\n"


def models(body):
    return transform_program(parse_source(PRELUDE + body))


def prog(body, cls, func):
    m = models(body)[cls]
    assert not [d for d in m.diagnostics if d.severity == "error"], m.diagnostics
    return m.get_prog[func]


def same(got, text):
    want = parse_block(text)
    assert alpha_equal(got, want), S.pretty_block(got)


def scopes_for(body, cls, local_vars=()):
    tu = parse_source(PRELUDE + body)
    sc = Scopes(ProgramIndex(tu), cls)
    sc.push()
    for name, typ, by_ref in local_vars:
        sc.declare(LocalVar(name, A.TypeRef(typ), by_ref))
    return sc


def parse_expr(text):
    return Parser(tokenize(text)).expression()


def parse_stmt(text):
    return Parser(tokenize(text)).statement()


# ------------------------------------------------------------ entry points

def test_continue_becomes_jump():
    sc = scopes_for("class A { void f() {} };", "A")
    got = transform_statement(parse_stmt("continue;"), sc, FreshNameGenerator(), Labels("__lbl3", "__lbl3"))
    assert got == [S.Jump(S.FlagKind.CONTINUE, "__lbl3")]


def test_if_without_else():
    sc = scopes_for("class A { void f() {} };", "A", [("b", "bool", False), ("x", "int", False)])
    got = transform_statement(parse_stmt("if (b) x = 1;"), sc)
    same(got, "[ite(read(local, b), [assign(local, x, constant(Number(1)))], [])]")


def test_post_increment_expression():
    sc = scopes_for("class A { void f() {} };", "A", [("i", "int", False)])
    pre, e = transform_expression(parse_expr("i++"), sc, FreshNameGenerator())
    same(pre, "[assign(local, __fv0, read(local, i)),"
              " assign(local, i, plus(read(local, i), constant(Number(1))))]")
    assert e == S.Read(S.Scope.LOCAL, "__fv0")


def test_pure_expression_has_no_prefix():
    sc = scopes_for("class A { void f() {} };", "A")
    pre, e = transform_expression(parse_expr("2 + 3"), sc)
    assert pre == []
    assert e == S.Binary("plus", S.Const(S.Number(2)), S.Const(S.Number(3)))


def _params(*refs):
    return [A.Param(A.TypeRef("int"), f"p{i}", r) for i, r in enumerate(refs)]


def test_arguments_by_value_and_by_ref():
    sc = scopes_for("class A { void f() {} };", "A", [("d", "int", False), ("x", "int", False)])
    assert transform_arguments("move", _params(False), [parse_expr("d")], sc) == \
        ([], [S.Read(S.Scope.LOCAL, "d")], [])
    assert transform_arguments("f", _params(True), [parse_expr("x")], sc) == \
        ([], [S.Const(S.LocalRef("x"))], ["x"])
    assert transform_arguments("f", _params(True), [parse_expr("Red")], sc) == \
        ([], [S.Const(S.EnumType("Red"))], [])


def test_arguments_forward_ref_param():
    sc = scopes_for("class A { void f() {} };", "A", [("r", "int", True)])
    assert transform_arguments("f", _params(True), [parse_expr("r")], sc) == \
        ([], [S.Read(S.Scope.LOCAL, "r")], ["r"])


# ------------------------------------------------------------- class level

def test_actuator_model():
    m = transform_program(parse_source(read_fixture("actuator.moo")))["Actuator"]
    assert set(m.get_prog) == {"move"}
    assert m.param_names("move") == ("delta",)
    assert m.fields == {"length": "Number"}
    assert m.ctor_prog == (S.Assign(S.Scope.GLOBAL, "length", S.Const(S.Number(0))),)


def test_suspension_model():
    m = transform_program(parse_source(read_fixture("suspension.moo")))["SuspensionController"]
    assert m.members == {"act1": "Actuator", "act2": "Actuator"}
    assert set(m.get_prog) == {"movePlatform"}


def test_empty_method():
    assert prog("class A { void f() {} };", "A", "f") == ()


def test_while_with_continue_gets_flags():
    same(prog("class A { int n = 0; void f() { while (n < 3) { n = n + 1; if (n == 2) continue; } } };", "A", "f"),
         """[while(smaller_than(read(global, n), constant(Number(3))), [
               assign(global, n, plus(read(global, n), constant(Number(1)))),
               ite(equals(read(global, n), constant(Number(2))), [jump(continue, __lbl0)], []),
               flag(continue, __lbl0)]),
             flag(break, __lbl0)]""")


def test_for_loop_step_after_continue_flag():
    got = prog("class A { int f() { int s = 0; for (int k = 0; k < 3; k++) { if (k == 1) continue; s = s + k; }"
               " return s; } };", "A", "f")
    same(got, """[assign(local, s, constant(Number(0))),
         assign(local, k, constant(Number(0))),
         while(smaller_than(read(local, k), constant(Number(3))), [
           ite(equals(read(local, k), constant(Number(1))), [jump(continue, __lbl0)], []),
           assign(local, s, plus(read(local, s), read(local, k))),
           flag(continue, __lbl0),
           assign(local, __fv0, read(local, k)),
           assign(local, k, plus(read(local, k), constant(Number(1))))]),
         flag(break, __lbl0),
         return(read(local, s))]""")


def test_short_circuit_and_guards_second_call():
    got = prog("class A { bool t() { return true; } public: bool f() { return t() && t(); } };", "A", "f")
    same(got, """[call(__fv0, self, t, [], []),
         ite(read(local, __fv0),
           [call(__fv1, self, t, [], []), assign(local, __fv2, read(local, __fv1))],
           [assign(local, __fv2, constant(Boolean(false)))]),
         return(read(local, __fv2))]""")


def test_ternary_desugars_to_ite():
    same(prog("class A { int f(bool b) { return b ? 1 : 2; } };", "A", "f"),
         """[ite(read(local, b), [assign(local, __fv0, constant(Number(1)))],
                                [assign(local, __fv0, constant(Number(2)))]),
             return(read(local, __fv0))]""")


def test_switch_fallthrough_and_default():
    got = prog("class A { int n = 0; int f(Color c) { switch (c) { case Red: n = 1; case Green: n = 2; break;"
               " default: n = 3; } return n; } };", "A", "f")
    same(got, """[assign(local, __fv0, read(local, c)),
         ite(equals(read(local, __fv0), constant(EnumType(Red))),
           [assign(global, n, constant(Number(1))), assign(global, n, constant(Number(2))),
            jump(break, __lbl0), assign(global, n, constant(Number(3))), jump(break, __lbl0)], []),
         ite(equals(read(local, __fv0), constant(EnumType(Green))),
           [assign(global, n, constant(Number(2))), jump(break, __lbl0),
            assign(global, n, constant(Number(3))), jump(break, __lbl0)], []),
         assign(global, n, constant(Number(3))),
         flag(break, __lbl0),
         return(read(global, n))]""")


def test_try_catch_and_throw():
    same(prog("class A { int n = 0; void f() { try { throw; } catch (...) { n = 9; } } };", "A", "f"),
         "[throw, catch([assign(global, n, constant(Number(9)))])]")


def test_cross_object_call_with_ref_args():
    src = ("class B { public: int g(int &r) { r = r + 1; return r; } };"
           "class A { B b; public: int f(int x) { int y = b.g(x); return b.g(y); } };")
    same(prog(src, "A", "f"), """[call(__fv0, read(global, b), g, [constant(LocalRef(x))], [x]),
         assign(local, y, read(local, __fv0)),
         call(__fv1, read(global, b), g, [constant(LocalRef(y))], [y]),
         return(read(local, __fv1))]""")
    same(prog(src, "B", "g"), """[ref_load(__fv0, read(local, r)),
         ref_assign(read(local, r), plus(read(local, __fv0), constant(Number(1)))),
         ref_load(__fv1, read(local, r)),
         return(read(local, __fv1))]""")


def test_lambda_captures():
    got = prog("class A { int f(int x) { int w = 2; auto g = [x, &w](int z) { w = z; return x + z; };"
               " return g(1); } };", "A", "f")
    same(got, """[assign(local, w, constant(Number(2))),
         assign(local, g, init_lambda([z], [x], [w], [
           ref_assign(read(local, w), read(local, z)),
           return(plus(read(local, x), read(local, z)))])),
         call_lambda(__fv0, g, [constant(Number(1))], []),
         return(read(local, __fv0))]""")


def test_list_init_and_subscript():
    same(prog("class A { int f() { list<int> v = {4, 5}; return v[1]; } };", "A", "f"),
         """[assign(local, v, init_list([constant(Number(4)), constant(Number(5))])),
             return(at(read(local, v), constant(Number(1))))]""")


def test_member_assignment_through_this():
    same(prog("class A { int n = 0; void f() { this->n = 3; } };", "A", "f"),
         "[ref_assign(ref_field(self, n), constant(Number(3)))]")


def test_constructor_prologue():
    m = models("class A { int n = 0; public: A() : n(5) { n = n + 1; } };")["A"]
    same(m.ctor_prog, """[assign(global, n, constant(Number(0))),
         assign(global, n, constant(Number(5))),
         assign(global, n, plus(read(global, n), constant(Number(1))))]""")


def test_can_throw_propagates_through_self_calls():
    m = models("class C { public: void thr() { throw; } void call() { thr(); }"
               " void guarded() { try { thr(); } catch (...) {} } void plain() {} };")["C"]
    assert m.methods["thr"].can_throw and m.methods["call"].can_throw
    assert not m.methods["plain"].can_throw
    # the check is syntactic, so a guarded call still counts
    assert m.methods["guarded"].can_throw


@pytest.mark.parametrize("body, cause", [
    ("void f() { int a = 1; while (true) { int a = 2; } }", "shadows an enclosing local"),
    ("void f() { int a = 1; int &r = a; }", "reference variable 'r'"),
    ("void f() { auto g = [&n2]() { return 1; }; }", "undeclared identifier 'n2'"),
    ("void f() { g(); }", "g"),
])
def test_diagnostics_are_per_method(body, cause):
    m = models(f"class C {{ public: {body} void ok() {{}} }};")["C"]
    [d] = m.diagnostics
    assert d.method == "f" and d.severity == "error" and cause in d.cause
    assert "ok" in m.get_prog and "f" not in m.get_prog


def test_constructor_with_params_is_a_warning():
    m = models("class C { public: C(int z) {} };")["C"]
    [d] = m.diagnostics
    assert d.severity == "warning"
    assert str(d).startswith(f"{d.line}:{d.col}: warning: in 'C':")


def test_fresh_names_are_deterministic():
    a = models(read_fixture("suspension.moo"))["SuspensionController"].dump()
    b = models(read_fixture("suspension.moo"))["SuspensionController"].dump()
    assert a == b and "__fv" in a


def test_lambda_parameter_hides_capture():
    src = "class A { public: int f(int x) { auto h = [x](int x) { return x; }; return h(1); } };"
    m = models(src)["A"]
    [d] = m.diagnostics
    assert d.severity == "warning" and "hides the capture" in d.cause
    same(m.get_prog["f"], """[assign(local, h, init_lambda([x], [], [], [return(read(local, x))])),
         call_lambda(__fv0, h, [constant(Number(1))], []),
         return(read(local, __fv0))]""")
