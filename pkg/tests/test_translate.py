"""Scion-call IR construction, untranslation, and their round trip."""

import pytest

from sloop import (
    Call,
    Const,
    LambdaObj,
    Var,
    World,
    classify,
    print_sexpr,
    reconstruct_scion,
    sym,
    term_to_sugar,
    translate_loop,
    translate_term,
    untranslate,
)
from sloop.translate import FromToByExpr, ListExpr, TailsExpr, ZipExpr

from util import S, SQUARE_SRC, build_world, rd, spec_of

W0 = World()


def ir_of(src, bound=(), world=W0):
    return translate_loop(spec_of(src, world=world, bound=bound))


def sugar_text(src, bound=(), world=W0):
    return print_sexpr(untranslate(ir_of(src, bound=bound, world=world)))


def test_sum_squares_ir_golden():
    sc = ir_of("(LOOP$ FOR X IN LST SUM (* X X))", bound=[S("LST")])
    assert sc.op == "SUM"
    assert sc.globals is None
    assert sc.until is None and sc.when is None
    assert sc.target == ListExpr(Var(S("LST")))
    assert sc.fn == LambdaObj([S("X")], None,
                              Call(S("BINARY-*"), [Var(S("X")), Var(S("X"))]))
    assert sugar_text("(LOOP$ FOR X IN LST SUM (* X X))", bound=[S("LST")]) \
        == "(SUM$ (LAMBDA$ (X) (* X X)) LST)"


def test_five_clause_ir_nesting():
    txt = sugar_text("(LOOP$ FOR I FROM 0 TO 1000000 BY 5 UNTIL (> I 30)"
                     " WHEN (EVENP I) COLLECT (* I I))")
    assert txt == ("(COLLECT$ (LAMBDA$ (I) (* I I))"
                   " (WHEN$ (LAMBDA$ (I) (EVENP I))"
                   " (UNTIL$ (LAMBDA$ (I) (< 30 I))"
                   " (FROM-TO-BY 0 1000000 5))))")


def test_fancy_ir_golden():
    bound = [S("M"), S("N"), S("LST1"), S("LST2")]
    sc = ir_of("(LOOP$ FOR X1 IN LST1 AS X2 IN LST2 SUM (* M N X1 X2))",
               bound=bound)
    assert sc.op == "SUM"
    assert sc.globals == [Var(S("M")), Var(S("N"))]
    assert sc.target == ZipExpr([ListExpr(Var(S("LST1"))),
                                 ListExpr(Var(S("LST2")))])
    assert sc.fn.formals == [S("LOOP$-GVARS"), S("LOOP$-IVARS")]
    # the LET rebinds globals then iteration variables via CAR/CDR chains
    binding_sugar = print_sexpr(term_to_sugar(sc.fn.body))
    assert binding_sugar == ("(LET ((M (CAR LOOP$-GVARS))"
                             " (N (CAR (CDR LOOP$-GVARS)))"
                             " (X1 (CAR LOOP$-IVARS))"
                             " (X2 (CAR (CDR LOOP$-IVARS))))"
                             " (* M N X1 X2))")


def test_plain_ir_never_mentions_gvars():
    for src, bound in [
        ("(LOOP$ FOR X IN LST SUM (* X X))", [S("LST")]),
        ("(LOOP$ FOR I FROM 1 TO 9 UNTIL (> I 5) COLLECT I)", []),
        ("(LOOP$ FOR TL ON LST ALWAYS (CONSP TL))", [S("LST")]),
    ]:
        txt = sugar_text(src, bound=bound)
        assert "LOOP$-GVARS" not in txt and "LOOP$-IVARS" not in txt


def test_fancy_globals_match_classify():
    bound = [S("M"), S("N"), S("LST1"), S("LST2"), S("K")]
    for src in [
        "(LOOP$ FOR X1 IN LST1 AS X2 IN LST2 SUM (* M N X1 X2))",
        "(LOOP$ FOR X IN LST1 SUM (+ X K))",
        "(LOOP$ FOR X IN LST1 UNTIL (> X M) COLLECT (+ X N))",
    ]:
        spec = spec_of(src, bound=bound)
        sc = translate_loop(spec)
        globals_ = classify(spec)
        assert [g.name for g in sc.globals] == globals_


def test_fancy_lambda_signature_uniform_for_until():
    # until/when lambdas take (GVARS, IVARS) even when the test uses less
    bound = [S("M"), S("LST")]
    sc = ir_of("(LOOP$ FOR X IN LST UNTIL (EVENP X) SUM (+ X M))",
               bound=bound)
    assert sc.until.formals == [S("LOOP$-GVARS"), S("LOOP$-IVARS")]
    assert sc.fn.formals == [S("LOOP$-GVARS"), S("LOOP$-IVARS")]


def test_of_type_becomes_lambda_guard():
    sc = ir_of("(LOOP$ FOR I OF-TYPE INTEGER FROM 1 TO 5 COLLECT I)")
    assert sc.fn.guard == Call(S("INTEGERP"), [Var(S("I"))])
    sc = ir_of("(LOOP$ FOR I OF-TYPE T FROM 1 TO 5 COLLECT I)")
    assert sc.fn.guard is None


def test_explicit_guard_conjoined_with_of_type():
    sc = ir_of("(LOOP$ FOR I OF-TYPE INTEGER FROM 1 TO 9"
               " SUM :GUARD (EVENP I) I)")
    txt = print_sexpr(term_to_sugar(sc.fn.guard))
    assert txt == "(AND (INTEGERP I) (EVENP I))"


def test_untranslate_named_fn():
    from sloop.translate import ScionCall
    sc = ScionCall("COLLECT", __import__("sloop").NamedFn(S("SQUARE")),
                   None, None, None, ListExpr(Var(S("L"))))
    assert print_sexpr(untranslate(sc)) == "(COLLECT$ 'SQUARE L)"


ROUND_TRIP_CASES = [
    ("(LOOP$ FOR X IN LST SUM (* X X))", ("LST",)),
    ("(LOOP$ FOR I FROM 0 TO 100 BY 5 UNTIL (> I 30) WHEN (EVENP I)"
     " COLLECT (* I I))", ()),
    ("(LOOP$ FOR X1 IN LST1 AS X2 IN LST2 SUM (* M N X1 X2))",
     ("M", "N", "LST1", "LST2")),
    ("(LOOP$ FOR TL ON LST COLLECT (LEN TL))", ("LST",)),
    ("(LOOP$ FOR X OF-TYPE INTEGER IN LST UNTIL (> X M) WHEN (EVENP X)"
     " APPEND (LIST X X))", ("LST", "M")),
    ("(LOOP$ FOR X IN A AS Y FROM 1 TO 9 THEREIS (EQUAL X Y))",
     ("A",)),
]


@pytest.mark.parametrize("src,bound", ROUND_TRIP_CASES)
def test_untranslate_round_trips(src, bound):
    bound = {S(b) for b in bound}
    sc = translate_loop(spec_of(src, bound=bound))
    sugar = untranslate(sc)
    back = reconstruct_scion(rd(print_sexpr(sugar)), bound, W0)
    assert back == sc


def test_reconstruct_quoted_lambda():
    sc = reconstruct_scion(
        rd("(SUM$ '(LAMBDA (X) (BINARY-* X X)) '(1 2 3))"), set(), W0)
    assert sc.op == "SUM"
    assert sc.fn == LambdaObj([S("X")], None,
                              Call(S("BINARY-*"), [Var(S("X")), Var(S("X"))]))
    assert sc.target == ListExpr(Const([1, 2, 3]))


def test_distinct_loops_evaluate_distinctly():
    # translation injectivity at the observational level
    from sloop.kernel import EMPTY_ENV
    from sloop import eval_loop_reference, top_level
    pairs = [
        ("(LOOP$ FOR X IN '(1 2 3) SUM (* X X))",
         "(LOOP$ FOR X IN '(1 2 3) SUM (+ X X))"),
        ("(LOOP$ FOR I FROM 1 TO 5 COLLECT I)",
         "(LOOP$ FOR I FROM 1 TO 5 COLLECT (* I I))"),
        ("(LOOP$ FOR X IN '(1 2 3 4) WHEN (EVENP X) COLLECT X)",
         "(LOOP$ FOR X IN '(1 2 3 4) UNTIL (EVENP X) COLLECT X)"),
    ]
    for a, b in pairs:
        va = eval_loop_reference(translate_loop(spec_of(a)), EMPTY_ENV, W0,
                                 top_level())
        vb = eval_loop_reference(translate_loop(spec_of(b)), EMPTY_ENV, W0,
                                 top_level())
        assert va != vb


def test_term_sugar_round_trip():
    cases = ["(+ A B C)", "(* A (+ B 1))", "(- A B)", "(- A)",
             "(AND (INTEGERP A) (EVENP A) (< A 9))",
             "(OR (CONSP A) (EQUAL A B))",
             "(LIST A B)", "(IF (EVENP A) A B)",
             "(LET ((X (+ A 1))) (* X X))"]
    bound = {S("A"), S("B"), S("C")}
    for src in cases:
        t = translate_term(rd(src), bound, W0)
        again = translate_term(term_to_sugar(t), bound, W0)
        assert again == t, src
