"""Term translation, evaluation, apply$ and warrant discipline, and the
definition events."""

import pytest

from sloop import (
    Call,
    Const,
    Env,
    If,
    NamedFn,
    LambdaObj,
    Var,
    World,
    apply_fn,
    define,
    eval_term,
    proof_context,
    sym,
    top_level,
    translate_term,
)
from sloop import errors
from sloop.kernel import EMPTY_ENV, conjuncts_of, and_term, term_free_vars

from util import DOUBLE_SRC, SQUARE_SRC, SUM_SQUARES_2_SRC, F2_SRC, S, \
    build_world, ev, rd

W0 = World()


def xl(text, bound=(), world=W0):
    return translate_term(rd(text), {S(b) for b in bound}, world)


# --------------------------------------------------------------- translate

def test_translate_star_golden():
    assert xl("(* x x)", bound=["X"]) == \
        Call(S("BINARY-*"), [Var(S("X")), Var(S("X"))])


def test_translate_gt_swaps():
    assert xl("(> i 30)", bound=["I"]) == Call(S("<"), [Const(30), Var(S("I"))])


def test_translate_constant():
    assert xl("5") == Const(5)
    assert xl("T") == Const(S("T"))
    assert xl("NIL") == Const([])
    assert xl("'(1 2)") == Const([1, 2])


def test_translate_comparison_macros():
    assert xl("(<= a b)", bound=["A", "B"]) == \
        Call(S("NOT"), [Call(S("<"), [Var(S("B")), Var(S("A"))])])
    assert xl("(>= a b)", bound=["A", "B"]) == \
        Call(S("NOT"), [Call(S("<"), [Var(S("A")), Var(S("B"))])])


def test_translate_nary_arithmetic():
    t = xl("(* m n x1 x2)", bound=["M", "N", "X1", "X2"])
    assert t == Call(S("BINARY-*"), [
        Var(S("M")), Call(S("BINARY-*"), [
            Var(S("N")), Call(S("BINARY-*"), [Var(S("X1")), Var(S("X2"))])])])
    assert ev("(- 10 3)") == 7
    assert ev("(- 4)") == -4


def test_translate_and_or_list():
    t = xl("(and a b)", bound=["A", "B"])
    assert t == If(Var(S("A")), Var(S("B")), Const([]))
    t = xl("(or a b)", bound=["A", "B"])
    assert t == If(Var(S("A")), Var(S("A")), Var(S("B")))
    assert ev("(list 1 2 3)") == [1, 2, 3]


def test_translate_errors():
    with pytest.raises(errors.UnknownMacroOrFunction):
        xl("(frobnicate 1)")
    with pytest.raises(errors.ArityMismatch):
        xl("(car 1 2)")
    with pytest.raises(errors.UnboundVariable):
        xl("x")
    with pytest.raises(errors.UnknownMacroOrFunction):
        xl("(mv 1 2)")
    with pytest.raises(errors.UnknownMacroOrFunction):
        # lambda$ outside a function-argument position
        xl("(car (lambda$ (x) x))")


def test_translate_constant_reference():
    w = define(rd("(DEFCONST *K* (+ 1 2))"), W0)
    assert xl("*K*", world=w) == Const(3)


# -------------------------------------------------------------- evaluation

def test_eval_arithmetic():
    assert ev("(binary-* '3 '4)") == 12
    assert ev("(evenp '7)") == []
    assert ev("(floor 7 2)") == 3
    assert ev("(floor -7 2)") == -4
    assert ev("(floor 7 0)") == 0
    assert ev("(mod 7 0)") == 7
    assert ev("(mod -7 2)") == 1


def test_arithmetic_coerces_non_integers():
    assert ev("(+ 'a 3)") == 3
    assert ev("(* '(1 2) 5)") == 0
    assert ev("(< 'a 'b)") == []


def test_car_cdr_total():
    assert ev("(car 5)") == []
    assert ev("(cdr 'a)") == []
    assert ev("(car '(1 2))") == 1
    assert ev("(cdr '(1 2))") == [2]


def test_list_builtins():
    assert ev("(len '(a b c))") == 3
    assert ev("(true-listp '(1 2))") == S("T")
    assert ev("(true-listp '(1 . 2))") == []
    assert ev("(member-equal 2 '(1 2 3))") == [2, 3]
    assert ev("(member-equal 9 '(1 2 3))") == []
    assert ev("(revappend '(1 2) '(3))") == [2, 1, 3]
    assert ev("(reverse '(1 2 3))") == [3, 2, 1]


def test_square_body_evaluation():
    w = build_world(SQUARE_SRC)
    assert ev("(square 5)", world=w) == 25


def test_if_is_lazy_and_zero_is_true():
    assert ev("(if 0 'yes 'no)") == S("YES")
    assert ev("(if nil 'yes 'no)") == S("NO")
    assert ev("(let ((x 2)) (if (evenp x) x 'odd))") == 2
    # the untaken branch must not evaluate
    w = build_world("(DEFUN SPIN (N) (SPIN N))")
    assert ev("(if t 'fine (spin 0))", world=w) == S("FINE")


def test_recursion_depth_limit():
    w = build_world("(DEFUN SPIN (N) (SPIN (+ N 1)))")
    ctx = top_level()
    ctx.max_frames = 500
    with pytest.raises(errors.RecursionDepthExceeded):
        ev("(spin 0)", world=w, ctx=ctx)


# ------------------------------------------------------------------ apply$

def test_apply_named_function_top_level():
    w = build_world(SQUARE_SRC)
    assert apply_fn(NamedFn(S("SQUARE")), [3], w, top_level()) == 9
    # value-level coercion from a bare symbol
    assert apply_fn(S("SQUARE"), [3], w, top_level()) == 9


def test_apply_lambda_object():
    w = W0
    lam = rd("(LAMBDA (X) (BINARY-* X X))")
    assert apply_fn(lam, [4], w, top_level()) == 16


def test_apply_builtin():
    assert apply_fn(S("CAR"), [[7, 8]], W0, top_level()) == 7


def test_apply_forces_warrant_in_proof_context():
    w = build_world(SQUARE_SRC)
    ctx = proof_context()
    with pytest.raises(errors.ForcedWarrant) as ei:
        apply_fn(S("SQUARE"), [3], w, ctx)
    assert ei.value.name is S("SQUARE")
    assert S("SQUARE") in ctx.forced


def test_apply_with_assumed_warrant():
    w = build_world(SQUARE_SRC)
    assert apply_fn(S("SQUARE"), [3], w, proof_context([S("SQUARE")])) == 9


def test_apply_unwarranted_function():
    w = build_world("(DEFUN PLAIN (X) (+ X 1))")
    with pytest.raises(errors.UnwarrantedFunction):
        apply_fn(S("PLAIN"), [1], w, top_level())
    with pytest.raises(errors.UnwarrantedFunction):
        apply_fn(S("NO-SUCH"), [1], w, top_level())


def test_apply_arity_mismatch():
    w = build_world(SQUARE_SRC)
    with pytest.raises(errors.ArityMismatch):
        apply_fn(S("SQUARE"), [1, 2], w, top_level())


def test_apply_term_level():
    w = build_world(SQUARE_SRC)
    assert ev("(apply$ 'square (list 3))", world=w) == 9
    assert ev("(apply$ (lambda$ (x) (* x x)) (list 5))", world=w) == 25


def test_apply_equivalence_property():
    # apply$ of a warranted F equals direct invocation on its guard domain
    w = build_world(SQUARE_SRC, DOUBLE_SRC)
    import random
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(-50, 50)
        assert apply_fn(S("SQUARE"), [n], w, top_level()) == \
            ev(f"(square {n})", world=w)
        assert apply_fn(S("DOUBLE"), [n], w, top_level()) == \
            ev(f"(double {n})", world=w)


def test_context_monotonicity():
    w = build_world(SQUARE_SRC, F2_SRC)
    small = proof_context([S("SQUARE")])
    big = proof_context([S("SQUARE"), S("F2")])
    v1 = ev("(f2 1 3)", world=w, ctx=small)
    v2 = ev("(f2 1 3)", world=w, ctx=big)
    v3 = ev("(f2 1 3)", world=w, ctx=top_level())
    assert v1 == v2 == v3 == [1, 4, 9]


def test_eval_determinism():
    w = build_world(SQUARE_SRC, SUM_SQUARES_2_SRC)
    ctx = proof_context([S("SQUARE")])
    assert ev("(sum-squares-2 1 4)", world=w, ctx=ctx) == 30
    assert ev("(sum-squares-2 1 4)", world=w, ctx=ctx) == 30


# ------------------------------------------------------------- definitions

def test_defun_dollar_warrants():
    w = build_world(SQUARE_SRC)
    assert S("SQUARE") in w.warrants


def test_defwarrant_requires_definition():
    with pytest.raises(errors.WarrantForUndefined):
        define(rd("(DEFWARRANT F)"), W0)


def test_defwarrant_after_defun():
    w = build_world("(DEFUN TRIPLE (X) (* 3 X))")
    assert S("TRIPLE") not in w.warrants
    w = define(rd("(DEFWARRANT TRIPLE)"), w)
    assert S("TRIPLE") in w.warrants


def test_redefinition_rejected():
    w = build_world(SQUARE_SRC)
    with pytest.raises(errors.Redefinition):
        define(rd(SQUARE_SRC), w)
    with pytest.raises(errors.Redefinition):
        define(rd("(DEFUN CAR (X) X)"), w)


def test_malformed_defun():
    with pytest.raises(errors.MalformedDefun):
        define(rd("(DEFUN F)"), W0)
    with pytest.raises(errors.MalformedDefun):
        define(rd("(DEFUN F (X X) X)"), W0)


def test_defun_with_guard_t_and_loop_body():
    w = define(rd("(DEFUN F1 () (DECLARE (XARGS :GUARD T))"
                  " (LOOP$ FOR I FROM 1 TO 3 COLLECT I))"), W0)
    defn = w.defs[S("F1")]
    assert defn.guard == Const(S("T"))
    assert defn.guard_verified is None
    assert ev("(f1)", world=w) == [1, 2, 3]


def test_guard_conjuncts_flattened():
    w = build_world(SQUARE_SRC, F2_SRC)
    defn = w.defs[S("F2")]
    assert defn.guard_conjuncts == [
        Call(S("INTEGERP"), [Var(S("LOWER"))]),
        Call(S("INTEGERP"), [Var(S("UPPER"))])]


def test_recursive_defun_translates_and_runs():
    w = build_world("(DEFUN COUNT-DOWN (N)"
                    " (IF (NOT (< 0 N)) NIL (CONS N (COUNT-DOWN (- N 1)))))")
    assert ev("(count-down 4)", world=w) == [4, 3, 2, 1]


# ------------------------------------------------------------ term helpers

def test_and_term_conjuncts_inverse():
    ts = [Call(S("INTEGERP"), [Var(S("A"))]), Call(S("CONSP"), [Var(S("B"))])]
    assert conjuncts_of(and_term(ts)) == ts
    assert conjuncts_of(and_term([])) == []


def test_term_free_vars():
    assert term_free_vars(xl("(* x x)", bound=["X"])) == {S("X")}
    assert term_free_vars(xl("(* m (* n (* x1 x2)))",
                             bound=["M", "N", "X1", "X2"])) == \
        {S("M"), S("N"), S("X1"), S("X2")}
    assert term_free_vars(Const(5)) == set()
    assert term_free_vars(xl("(let ((a 1)) (+ a b))", bound=["B"])) == {S("B")}
