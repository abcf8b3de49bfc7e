"""Fused single-pass loop$ evaluation and the dispatch between it and the
compositional reference path.

The fast path compiles terms into Python closures once, then runs one pass
over the targets: bind the iteration variables, test UNTIL, test WHEN,
fold the body value into the operator's accumulator.  FROM/TO/BY targets
stream without materializing the progression, user functions are invoked
directly (no apply$, no warrant accounting), and no intermediate lists are
built.  The reference path does the opposite on every count, which is
exactly the performance gap the bench operation measures.
"""

import time
from dataclasses import dataclass
from enum import Enum

from .errors import (
    GuardViolation,
    NonIntegerBound,
    NonPositiveStep,
    RecursionDepthExceeded,
    ResultMismatch,
    UnknownMacroOrFunction,
)
from .kernel import (
    BUILTINS,
    Call,
    Const,
    Env,
    If,
    LambdaConst,
    Let,
    LoopForm,
    Var,
    top_level,
)
from .loopsyntax import FromToBy, In, On
from .scions import eval_loop_reference, tails
from .sexpr import (
    NIL,
    T,
    bool_val,
    car,
    cdr,
    cons,
    consp,
    print_sexpr,
    proper_items,
    sym as _sym,
)
from .translate import term_to_sugar, translate_loop


class ExecMode(Enum):
    TRUSTED = "trusted"          # guard-verified: no dynamic checks
    CHECKED = "checked"          # of-type/:GUARD checked each iteration
    REFERENCE_ONLY = "reference-only"


# ---------------------------------------------------------- term compiler


def _in_add(afs):
    a, b = afs

    def run(env):
        x = a(env)
        y = b(env)
        return (x if type(x) is int else 0) + (y if type(y) is int else 0)
    return run


def _in_mul(afs):
    a, b = afs

    def run(env):
        x = a(env)
        y = b(env)
        return (x if type(x) is int else 0) * (y if type(y) is int else 0)
    return run


def _in_neg(afs):
    a, = afs

    def run(env):
        x = a(env)
        return -x if type(x) is int else 0
    return run


def _in_less(afs):
    a, b = afs

    def run(env):
        x = a(env)
        y = b(env)
        return T if (x if type(x) is int else 0) < (y if type(y) is int else 0) else NIL
    return run


def _in_equal(afs):
    a, b = afs
    return lambda env: T if a(env) == b(env) else NIL


def _in_car(afs):
    a, = afs
    return lambda env: car(a(env))


def _in_cdr(afs):
    a, = afs
    return lambda env: cdr(a(env))


def _in_cons(afs):
    a, b = afs
    return lambda env: cons(a(env), b(env))


def _in_not(afs):
    a, = afs

    def run(env):
        v = a(env)
        return T if type(v) is list and not v else NIL
    return run


def _in_consp(afs):
    a, = afs
    return lambda env: bool_val(consp(a(env)))


def _in_atom(afs):
    a, = afs
    return lambda env: bool_val(not consp(a(env)))


def _in_integerp(afs):
    a, = afs
    return lambda env: T if type(a(env)) is int else NIL


def _in_evenp(afs):
    a, = afs

    def run(env):
        v = a(env)
        return T if type(v) is int and v % 2 == 0 else NIL
    return run


def _in_oddp(afs):
    a, = afs

    def run(env):
        v = a(env)
        return T if type(v) is int and v % 2 == 1 else NIL
    return run


_INLINE = {
    _sym("BINARY-+"): _in_add,
    _sym("BINARY-*"): _in_mul,
    _sym("UNARY--"): _in_neg,
    _sym("<"): _in_less,
    _sym("EQUAL"): _in_equal,
    _sym("CAR"): _in_car,
    _sym("CDR"): _in_cdr,
    _sym("CONS"): _in_cons,
    _sym("NOT"): _in_not,
    _sym("CONSP"): _in_consp,
    _sym("ENDP"): _in_atom,
    _sym("ATOM"): _in_atom,
    _sym("INTEGERP"): _in_integerp,
    _sym("EVENP"): _in_evenp,
    _sym("ODDP"): _in_oddp,
}


def compile_term(t, world):
    """Compile a term into a closure over a mutable dict environment.

    The closure resolves callees against `world` at compile time; compile
    a fresh runner if the same term must run against an unrelated world.
    """
    cls = t.__class__
    if cls is Const:
        v = t.value
        return lambda env: v
    if cls is Var:
        name = t.name
        return lambda env: env[name]
    if cls is Call:
        afs = [compile_term(a, world) for a in t.args]
        mk = _INLINE.get(t.fn)
        if mk is not None:
            return mk(afs)
        b = BUILTINS.get(t.fn)
        if b is not None:
            f = b.fn
            if b.fn_ilks:
                # scions and apply$ re-enter the reference machinery, which
                # needs a live top-level context
                return lambda env: f([af(env) for af in afs], world, top_level())
            return lambda env: f([af(env) for af in afs], world, None)
        defn = world.defs.get(t.fn)
        if defn is None:
            raise UnknownMacroOrFunction(f"undefined function {t.fn}")
        formals = tuple(defn.formals)
        if len(formals) == 1:
            f0 = formals[0]
            a0 = afs[0]

            def run1(env):
                body = defn.compiled
                if body is None:
                    body = _compile_defn(defn, world)
                return body({f0: a0(env)})
            return run1

        def runN(env):
            body = defn.compiled
            if body is None:
                body = _compile_defn(defn, world)
            return body(dict(zip(formals, [af(env) for af in afs])))
        return runN
    if cls is If:
        tf = compile_term(t.test, world)
        nf = compile_term(t.then, world)
        ef = compile_term(t.els, world)

        def run_if(env):
            v = tf(env)
            if type(v) is list and not v:
                return ef(env)
            return nf(env)
        return run_if
    if cls is Let:
        binds = [(n, compile_term(v, world)) for n, v in t.bindings]
        bf = compile_term(t.body, world)

        def run_let(env):
            env2 = dict(env)
            for n, vf in binds:
                env2[n] = vf(env)
            return bf(env2)
        return run_let
    if cls is LambdaConst:
        v = t.fn.to_value()
        return lambda env: v
    if cls is LoopForm:
        spec = t.spec
        cell = []

        def run_loop(env):
            if not cell:
                cell.append(compile_loop_runner(spec, world, ExecMode.TRUSTED))
            return cell[0](dict(env))
        return run_loop
    raise TypeError(f"not a term: {t!r}")


def _compile_defn(defn, world):
    body = compile_term(defn.body, world)
    defn.compiled = body
    return body


# ------------------------------------------------------------- fused loop


def _pred_display(tspec):
    if tspec.kind == "RANGE":
        return print_sexpr(tspec.to_sexpr())
    return {"INTEGER": "INTEGERP", "RATIONAL": "RATIONALP",
            "CONS": "CONSP", "T": "T"}[tspec.kind]


def compile_loop_runner(spec, world, mode):
    """Build the fused single-pass runner for a loop$ at the given mode."""
    makers = []
    for c in spec.iters:
        tgt = c.target
        if isinstance(tgt, FromToBy):
            lof = compile_term(tgt.lo, world)
            hif = compile_term(tgt.hi, world)
            byf = compile_term(tgt.by, world)

            def mk(env, lof=lof, hif=hif, byf=byf):
                lo, hi, by = lof(env), hif(env), byf(env)
                if type(lo) is not int or type(hi) is not int or type(by) is not int:
                    raise NonIntegerBound(
                        f"FROM-TO-BY bounds must be integers: {lo!r} {hi!r} {by!r}")
                if by < 1:
                    raise NonPositiveStep(f"FROM-TO-BY step must be positive: {by}")
                return range(lo, hi + 1, by)
        elif isinstance(tgt, In):
            lf = compile_term(tgt.lst, world)

            def mk(env, lf=lf):
                return proper_items(lf(env))
        else:
            lf = compile_term(tgt.lst, world)

            def mk(env, lf=lf):
                return tails(lf(env))
        makers.append(mk)

    varnames = [c.var for c in spec.iters]
    var0 = varnames[0]
    nvars = len(varnames)
    op = spec.op

    checked = mode is ExecMode.CHECKED
    checks = []
    if checked:
        for c in spec.iters:
            if c.spec is not None and c.spec.kind != "T":
                checks.append((c.var, c.spec.check, _pred_display(c.spec)))

    def compile_opt(term):
        return compile_term(term, world) if term is not None else None

    until_f = compile_opt(spec.until_test)
    when_f = compile_opt(spec.when_test)
    body_f = compile_term(spec.body, world)
    until_gf = compile_opt(spec.until_guard) if checked else None
    when_gf = compile_opt(spec.when_guard) if checked else None
    body_gf = compile_opt(spec.body_guard) if checked else None

    def guard_display(term):
        return print_sexpr(term_to_sugar(term))

    guard_info = [(until_gf, spec.until_guard), (when_gf, spec.when_guard),
                  (body_gf, spec.body_guard)]
    guard_names = {id(f): guard_display(t) for f, t in guard_info if f is not None}

    plainest = (until_f is None and when_f is None and not checks
                and until_gf is None and when_gf is None and body_gf is None)

    def check_vars(env):
        for var, chk, pred in checks:
            v = env[var]
            if not chk(v):
                raise GuardViolation(var, v, pred)

    def check_guard(gf, env):
        v = gf(env)
        if type(v) is list and not v:
            vals = [env[v2] for v2 in varnames]
            raise GuardViolation(varnames[0] if nvars == 1 else tuple(varnames),
                                 vals[0] if nvars == 1 else vals,
                                 guard_names[id(gf)])

    def step_values(env, its):
        if nvars == 1:
            rows = its[0]
        else:
            rows = zip(*its)
        for row in rows:
            if nvars == 1:
                env[var0] = row
            else:
                for i in range(nvars):
                    env[varnames[i]] = row[i]
            if checks:
                check_vars(env)
            if until_f is not None:
                if until_gf is not None:
                    check_guard(until_gf, env)
                v = until_f(env)
                if not (type(v) is list and not v):
                    return
            if when_f is not None:
                if when_gf is not None:
                    check_guard(when_gf, env)
                v = when_f(env)
                if type(v) is list and not v:
                    continue
            if body_gf is not None:
                check_guard(body_gf, env)
            yield body_f(env)

    def runner(env):
        its = [mk(env) for mk in makers]
        if nvars == 1 and plainest:
            # tightest lane: no tests, no checks, one variable
            it = its[0]
            if op == "SUM":
                total = 0
                for x in it:
                    env[var0] = x
                    v = body_f(env)
                    if type(v) is int:
                        total += v
                return total
            if op == "COLLECT":
                out = []
                append = out.append
                for x in it:
                    env[var0] = x
                    append(body_f(env))
                return out
            if op == "APPEND":
                out = []
                extend = out.extend
                for x in it:
                    env[var0] = x
                    extend(proper_items(body_f(env)))
                return out
            if op == "ALWAYS":
                for x in it:
                    env[var0] = x
                    v = body_f(env)
                    if type(v) is list and not v:
                        return NIL
                return T
            for x in it:  # THEREIS
                env[var0] = x
                v = body_f(env)
                if not (type(v) is list and not v):
                    return v
            return NIL

        vals = step_values(env, its)
        if op == "SUM":
            total = 0
            for v in vals:
                if type(v) is int:
                    total += v
            return total
        if op == "COLLECT":
            return list(vals)
        if op == "APPEND":
            out = []
            for v in vals:
                out.extend(proper_items(v))
            return out
        if op == "ALWAYS":
            for v in vals:
                if type(v) is list and not v:
                    return NIL
            return T
        for v in vals:  # THEREIS
            if not (type(v) is list and not v):
                return v
        return NIL

    return runner


# ---------------------------------------------------------------- entries


def eval_loop_fast(spec, env, world, mode=ExecMode.TRUSTED):
    """Evaluate a loop$ through the fused single-pass runner."""
    if mode is ExecMode.REFERENCE_ONLY:
        raise ValueError("eval_loop_fast requires a fast execution mode")
    envd = env.flatten() if isinstance(env, Env) else dict(env)
    cache = spec.fast
    if cache is None:
        cache = spec.fast = {}
    entry = cache.get(mode)
    if entry is None or entry[0] is not world:
        entry = (world, compile_loop_runner(spec, world, mode))
        cache[mode] = entry
    try:
        return entry[1](envd)
    except RecursionError:
        raise RecursionDepthExceeded("Python stack exhausted") from None


def eval_loop(spec, env, world, ctx, fast_ok=False):
    """Dispatch a loop$ between the fast and reference paths.

    Proof contexts always take the reference path (scions with warrant
    accounting).  At top level the fast path is used when the enclosing
    definition is guard-verified (trusted, no dynamic checks) or when the
    context's top-level fast flag is set (checked mode).
    """
    if ctx.is_top and (fast_ok or ctx.top_fast):
        mode = ExecMode.TRUSTED if fast_ok else ExecMode.CHECKED
        return eval_loop_fast(spec, env, world, mode)
    ir = spec.ir
    if ir is None:
        ir = spec.ir = translate_loop(spec)
    return eval_loop_reference(ir, env, world, ctx)


# ------------------------------------------------------------------ bench


@dataclass
class BenchRecord:
    result: object
    reference_times: list
    fast_times: list

    @property
    def reference_s(self):
        return min(self.reference_times)

    @property
    def fast_s(self):
        return min(self.fast_times)

    @property
    def speedup(self):
        return self.reference_s / self.fast_s if self.fast_s > 0 else float("inf")

    def to_sexpr(self):
        from .sexpr import sym
        return [sym("BENCH"),
                [sym("REFERENCE"), round(self.reference_s * 1000)],
                [sym("FAST"), round(self.fast_s * 1000)],
                [sym("RESULT"), self.result]]


def bench(spec, env, world, reps=3):
    """Time the reference and fast paths over `reps` repetitions each.

    Results are compared on every repetition; a disagreement raises
    ResultMismatch, since the two paths must be observationally equal.
    """
    envk = env if isinstance(env, Env) else Env(dict(env))
    ir = translate_loop(spec)
    ref_val = eval_loop_reference(ir, envk, world, top_level())
    fast_val = eval_loop_fast(spec, envk, world, ExecMode.TRUSTED)
    if ref_val != fast_val:
        raise ResultMismatch(ref_val, fast_val)
    ref_times = []
    fast_times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        v = eval_loop_reference(ir, envk, world, top_level())
        ref_times.append(time.perf_counter() - t0)
        if v != ref_val:
            raise ResultMismatch(ref_val, v)
    for _ in range(reps):
        t0 = time.perf_counter()
        v = eval_loop_fast(spec, envk, world, ExecMode.TRUSTED)
        fast_times.append(time.perf_counter() - t0)
        if v != ref_val:
            raise ResultMismatch(ref_val, v)
    return BenchRecord(ref_val, ref_times, fast_times)
