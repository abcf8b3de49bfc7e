"""Shared test helpers: tiny builders and the random loop$ generator used
by the differential suites."""

import random

from sloop import (
    Env,
    World,
    define,
    eval_loop_fast,
    eval_loop_reference,
    eval_term,
    parse_loop,
    read_sexpr,
    sym,
    top_level,
    translate_loop,
    translate_term,
)
from sloop.kernel import EMPTY_ENV

S = sym


def rd(text):
    form, _ = read_sexpr(text)
    return form


def build_world(*sources):
    w = World()
    for src in sources:
        w = define(rd(src), w)
    return w


def ev(text, world=None, env=None, ctx=None, bound=()):
    w = world if world is not None else World()
    t = translate_term(rd(text), set(bound), w)
    return eval_term(t, env if env is not None else EMPTY_ENV, w,
                     ctx if ctx is not None else top_level())


def spec_of(text, world=None, bound=()):
    w = world if world is not None else World()
    return parse_loop(rd(text), set(bound), w)


def both_paths(spec, env, world):
    """Evaluate a loop$ on the reference and fast paths; returns the pair."""
    ir = translate_loop(spec)
    ref = eval_loop_reference(ir, env, world, top_level())
    fast = eval_loop_fast(spec, env, world)
    return ref, fast


SQUARE_SRC = ("(DEFUN$ SQUARE (N)"
              " (DECLARE (XARGS :GUARD (INTEGERP N)))"
              " (* N N))")
DOUBLE_SRC = ("(DEFUN$ DOUBLE (N)"
              " (DECLARE (XARGS :GUARD (INTEGERP N)))"
              " (+ N N))")
F2_SRC = ("(DEFUN F2 (LOWER UPPER)"
          " (DECLARE (XARGS :GUARD (AND (INTEGERP LOWER) (INTEGERP UPPER))))"
          " (LOOP$ FOR I OF-TYPE INTEGER FROM LOWER TO UPPER"
          "  COLLECT (SQUARE I)))")
SUM_SQUARES_2_SRC = ("(DEFUN SUM-SQUARES-2 (LOWER UPPER)"
                     " (DECLARE (XARGS :GUARD (AND (INTEGERP LOWER)"
                     "                             (INTEGERP UPPER))))"
                     " (LOOP$ FOR I OF-TYPE INTEGER FROM LOWER TO UPPER"
                     "  SUM (SQUARE I)))")


# --------------------------------------------------- random loop$ generator

_OPS = ("SUM", "COLLECT", "APPEND", "ALWAYS", "THEREIS")
_VARS = ("X", "Y", "Z")
_OUTER_INTS = ("M", "N")
_OUTER_LISTS = ("LSTA", "LSTB")


def _rand_int_list(rng, lo=-6, hi=9, maxlen=8):
    return [rng.randint(lo, hi) for _ in range(rng.randint(0, maxlen))]


def _rand_value(rng, depth=1):
    k = rng.randrange(6)
    if k < 3:
        return rng.randint(-6, 9)
    if k == 3:
        return S(rng.choice("ABC"))
    if k == 4 and depth > 0:
        return [_rand_value(rng, depth - 1) for _ in range(rng.randint(0, 3))]
    return rng.randint(-20, 20)


def _quoted(v):
    return [S("QUOTE"), v]


def _rand_target(rng, mixed):
    k = rng.randrange(4)
    if k == 0:
        lo = rng.randint(-6, 6)
        return [S("FROM"), lo, S("TO"), lo + rng.randint(-2, 12),
                S("BY"), rng.randint(1, 4)], "int"
    if k == 1:
        lo = rng.randint(-6, 6)
        return [S("FROM"), lo, S("TO"), lo + rng.randint(-2, 12)], "int"
    lst = ([_rand_value(rng) for _ in range(rng.randint(0, 6))]
           if mixed else _rand_int_list(rng))
    kind = "any" if mixed else "int"
    if k == 2:
        return [S("ON"), _quoted(lst)], "tail"
    if rng.random() < 0.3:
        return [S("IN"), S(rng.choice(_OUTER_LISTS))], "int"
    return [S("IN"), _quoted(lst)], kind


def _rand_test(rng, var, kind, fancy_vars):
    v = S(var)
    choices = [
        [S("EVENP"), v],
        [S("ODDP"), v],
        [S("NOT"), [S("EVENP"), v]],
        [S("INTEGERP"), v],
        [S("CONSP"), v],
        [S(">"), v, rng.randint(-4, 8)],
        [S("<"), v, rng.randint(-4, 8)],
        [S("EQUAL"), v, rng.randint(-4, 8)],
    ]
    if fancy_vars:
        other = S(rng.choice(fancy_vars))
        choices += [[S(">"), v, other], [S("EQUAL"), v, other]]
    return rng.choice(choices)


def _rand_body(rng, op, var, kind, fancy_vars, fn_names=()):
    v = S(var)
    extra = [S(rng.choice(fancy_vars))] if fancy_vars else []
    if op == "SUM":
        choices = [[S("*"), v, v], [S("+"), v, 1], [S("LEN"), v],
                   [S("IF"), [S("EVENP"), v], v, 0], v,
                   [S("CAR"), v]]
        if extra:
            choices.append([S("*"), v, extra[0]])
        for fn in fn_names:
            choices.append([S(fn), [S("IF"), [S("INTEGERP"), v], v, 0]])
    elif op == "APPEND":
        choices = [[S("LIST"), v], [S("LIST"), v, v],
                   [S("CONS"), v, [S("QUOTE"), []]], v,
                   [S("IF"), [S("CONSP"), v], v, [S("LIST"), v]]]
        if extra:
            choices.append([S("LIST"), v, extra[0]])
    elif op in ("ALWAYS", "THEREIS"):
        choices = [[S("EVENP"), v], [S("INTEGERP"), v],
                   [S("<"), v, rng.randint(0, 12)],
                   [S("IF"), [S("EVENP"), v], v, [S("QUOTE"), []]],
                   [S("NOT"), [S("CONSP"), v]]]
        if extra:
            choices.append([S("EQUAL"), v, extra[0]])
    else:  # COLLECT
        choices = [[S("*"), v, v], [S("CONS"), v, [S("QUOTE"), []]],
                   [S("EVENP"), v], v, [S("CDR"), v],
                   [S("LIST"), v, v]]
        if extra:
            choices.append([S("LIST"), v, extra[0]])
        for fn in fn_names:
            choices.append([S(fn), [S("IF"), [S("INTEGERP"), v], v, 0]])
    return rng.choice(choices)


def random_loop_source(rng, fn_names=()):
    """A random valid loop$ source form over the test environment."""
    op = rng.choice(_OPS)
    nclauses = 2 if rng.random() < 0.35 else 1
    form = [S("LOOP$")]
    kinds = []
    vars_used = []
    for i in range(nclauses):
        form.append(S("FOR") if i == 0 else S("AS"))
        var = _VARS[i]
        vars_used.append(var)
        form.append(S(var))
        tgt, kind = _rand_target(rng, mixed=rng.random() < 0.4)
        if kind == "int" and rng.random() < 0.4:
            form.extend([S("OF-TYPE"), S("INTEGER")])
        elif rng.random() < 0.1:
            form.extend([S("OF-TYPE"), S("T")])
        form.extend(tgt)
        kinds.append(kind)
    # sometimes force fanciness through a free global
    fancy_vars = list(vars_used[1:])
    if rng.random() < 0.3:
        fancy_vars.append(rng.choice(_OUTER_INTS))
    tvar = rng.choice(vars_used)
    tkind = kinds[vars_used.index(tvar)]
    if rng.random() < 0.4:
        form.append(S("UNTIL"))
        form.append(_rand_test(rng, tvar, tkind, fancy_vars))
    if op not in ("ALWAYS", "THEREIS") and rng.random() < 0.4:
        form.append(S("WHEN"))
        form.append(_rand_test(rng, rng.choice(vars_used), tkind, fancy_vars))
    form.append(S(op))
    form.append(_rand_body(rng, op, rng.choice(vars_used), tkind, fancy_vars,
                           fn_names))
    return form


def random_env(rng):
    return Env({S("M"): rng.randint(-5, 8), S("N"): rng.randint(-5, 8),
                S("LSTA"): _rand_int_list(rng),
                S("LSTB"): _rand_int_list(rng)})


OUTER_BOUND = {S("M"), S("N"), S("LSTA"), S("LSTB")}


def run_differential(count, seed, world=None, outer_bound=None,
                     fn_names=()):
    """Generate `count` random loop$ forms and check path agreement.

    Returns (agreements, skips): skips counts generation artifacts that
    failed to parse; any evaluation disagreement raises AssertionError.
    """
    from sloop.errors import SloopError
    from sloop.sexpr import print_sexpr

    rng = random.Random(seed)
    w = world if world is not None else World()
    bound = outer_bound if outer_bound is not None else OUTER_BOUND
    agree = 0
    skipped = 0
    for _ in range(count):
        form = random_loop_source(rng, fn_names)
        env = random_env(rng)
        try:
            spec = parse_loop(form, bound, w)
        except SloopError:
            skipped += 1
            continue
        ref, fast = both_paths(spec, env, w)
        assert ref == fast, (
            f"paths disagree on {print_sexpr(form)}: "
            f"reference={print_sexpr(ref)} fast={print_sexpr(fast)}")
        agree += 1
    return agree, skipped
