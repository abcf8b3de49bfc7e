"""Guard proof obligations for loop$ forms, and a bounded checker that
sweeps them over finite domains instead of proving them.

Three classes of conjecture are generated per loop$:

  (a) every member of the target list satisfies the guard of the lambda
      it is fed to (always for the body; for UNTIL/WHEN only when they
      carry an explicit :GUARD);
  (b) on every member the body produces a result of the operator's type
      (an integer for SUM, a true list for APPEND);
  (c) boundary checks for typed targets: NIL for ON targets, and for a
      FROM i TO j BY k target the values i, j, k and one step past the
      stopping point, i + k*floor(j-i, k) + k.

Hypotheses are the enclosing definition's guard conjuncts, a warrant
hypothesis for every warranted function appearing in the loop's terms,
and (for classes a and b) membership of a fresh variable in the target.
A conjecture is never proved, only unfalsified over the given domains.
"""

from dataclasses import dataclass, field, replace
from itertools import product

from .errors import DomainMissing, MalformedDefun, SloopError
from .kernel import (
    Call,
    Const,
    Env,
    If,
    LambdaConst,
    Let,
    LoopForm,
    TRUE,
    Var,
    conjuncts_of,
    eval_term,
    subst_vars,
    term_free_vars,
    top_level,
)
from .loopsyntax import FromToBy, In, On
from .sexpr import Dotted, NIL, is_false, print_sexpr, proper_items, sym
from .translate import term_to_sugar, translate_loop

_S_MEMBER = sym("MEMBER-EQUAL")
_S_TAILS = sym("TAILS")
_S_FROM_TO_BY = sym("FROM-TO-BY")
_S_LOOP_AS = sym("LOOP$-AS")
_S_CONS = sym("CONS")
_S_CAR = sym("CAR")
_S_CDR = sym("CDR")
_S_INTEGERP = sym("INTEGERP")
_S_TRUE_LISTP = sym("TRUE-LISTP")
_S_FLOOR = sym("FLOOR")
_S_ADD = sym("BINARY-+")
_S_MUL = sym("BINARY-*")
_S_NEG = sym("UNARY--")
_S_IMPLIES = sym("IMPLIES")
_S_AND = sym("AND")

WARRANT_PREFIX = "APPLY$-WARRANT-"


def typespec_pred(tspec, x):
    """The type-spec's recognizer applied to term `x`."""
    return tspec.recognizer_term(x)


@dataclass(eq=True)
class GuardConjecture:
    klass: str           # "a", "b", or "c"
    hyps: list           # Terms; warrant hypotheses are 0-ary pseudo-calls
    concl: object        # Term
    source: str          # which clause produced this obligation
    newv: object = None  # fresh membership variable, when present
    target: object = None  # target term the membership hypothesis ranges over

    def to_sexpr(self):
        concl = term_to_sugar(self.concl)
        if not self.hyps:
            return concl
        if len(self.hyps) == 1:
            return [_S_IMPLIES, term_to_sugar(self.hyps[0]), concl]
        return [_S_IMPLIES, [_S_AND] + [term_to_sugar(h) for h in self.hyps],
                concl]


def _list_term(terms):
    out = Const(NIL)
    for t in reversed(terms):
        out = Call(_S_CONS, [t, out])
    return out


def _clause_target_term(clause):
    tgt = clause.target
    if isinstance(tgt, In):
        return tgt.lst
    if isinstance(tgt, On):
        return Call(_S_TAILS, [tgt.lst])
    return Call(_S_FROM_TO_BY, [tgt.lo, tgt.hi, tgt.by])


def _target_term(spec, fancy):
    if not fancy:
        return _clause_target_term(spec.iters[0])
    return Call(_S_LOOP_AS,
                [_list_term([_clause_target_term(c) for c in spec.iters])])


def _called_fns(t, out):
    cls = t.__class__
    if cls is Call:
        if t.fn not in out:
            out.append(t.fn)
        for a in t.args:
            _called_fns(a, out)
    elif cls is If:
        _called_fns(t.test, out)
        _called_fns(t.then, out)
        _called_fns(t.els, out)
    elif cls is Let:
        for _, v in t.bindings:
            _called_fns(v, out)
        _called_fns(t.body, out)
    elif cls is LambdaConst:
        if t.fn.guard is not None:
            _called_fns(t.fn.guard, out)
        _called_fns(t.fn.body, out)
    elif cls is LoopForm:
        inner = t.spec
        for c in inner.iters:
            _called_fns(_clause_target_term(c), out)
        for tt in inner.test_terms():
            _called_fns(tt, out)


def _warrant_hyps(spec, world):
    called = []
    for t in spec.test_terms():
        _called_fns(t, called)
    return [Call(sym(WARRANT_PREFIX + f.name), [])
            for f in called if f in world.warrants]


def _fresh_var(avoid):
    name = sym("NEWV")
    if name not in avoid:
        return name
    i = 0
    while sym(f"NEWV{i}") in avoid:
        i += 1
    return sym(f"NEWV{i}")


def _car_cdr_chain(base_term, k):
    t = base_term
    for _ in range(k):
        t = Call(_S_CDR, [t])
    return Call(_S_CAR, [t])


def generate_guard_conjectures(spec, context_guard, world):
    """All guard obligations for one loop$ under a context guard.

    `context_guard` may be a term, a list of conjunct terms, or None.
    """
    if context_guard is None:
        ctx_hyps = []
    elif isinstance(context_guard, list):
        ctx_hyps = list(context_guard)
    else:
        ctx_hyps = conjuncts_of(context_guard)
    ctx_hyps = [h for h in ctx_hyps if h != TRUE]

    warrants = _warrant_hyps(spec, world)
    sc = translate_loop(spec)
    fancy = sc.fancy

    avoid = set(spec.free) | set(spec.iter_vars())
    for h in ctx_hyps:
        avoid |= term_free_vars(h)
    newv = _fresh_var(avoid)
    target = _target_term(spec, fancy)
    member = Call(_S_MEMBER, [Var(newv), target])
    base_hyps = ctx_hyps + warrants + [member]

    if fancy:
        lam_map = {sym("LOOP$-GVARS"): _list_term(sc.globals),
                   sym("LOOP$-IVARS"): Var(newv)}
        body_map = {v: _car_cdr_chain(Var(newv), j)
                    for j, v in enumerate(spec.iter_vars())}
    else:
        lam_map = {spec.iters[0].var: Var(newv)}
        body_map = lam_map

    out = []

    def add_a(fnobj, which, explicit):
        if fnobj is None or fnobj.guard is None:
            return
        if which != "body" and not explicit:
            return
        concl = subst_vars(fnobj.guard, lam_map)
        if concl == TRUE:
            return
        out.append(GuardConjecture("a", list(base_hyps), concl,
                                   f"{which} guard over the target",
                                   newv=newv, target=target))

    add_a(sc.until, "until", spec.until_guard is not None)
    add_a(sc.when, "when", spec.when_guard is not None)
    add_a(sc.fn, "body", True)

    if spec.op in ("SUM", "APPEND"):
        pred = _S_INTEGERP if spec.op == "SUM" else _S_TRUE_LISTP
        concl = Call(pred, [subst_vars(spec.body, body_map)])
        out.append(GuardConjecture("b", list(base_hyps), concl,
                                   f"{spec.op} result type",
                                   newv=newv, target=target))

    c_hyps = ctx_hyps + warrants
    for c in spec.iters:
        if c.spec is None or c.spec.kind == "T":
            continue
        tgt = c.target
        if isinstance(tgt, On):
            out.append(GuardConjecture(
                "c", list(c_hyps), c.spec.recognizer_term(Const(NIL)),
                f"type-spec of {c.var} at NIL (ON target)"))
        elif isinstance(tgt, FromToBy):
            i, j, k = tgt.lo, tgt.hi, tgt.by
            past = Call(_S_ADD, [
                i, Call(_S_ADD, [
                    Call(_S_MUL, [k, Call(_S_FLOOR, [
                        Call(_S_ADD, [j, Call(_S_NEG, [i])]), k])]),
                    k])])
            for t, where in ((i, "FROM"), (j, "TO"), (k, "BY"),
                             (past, "one step past TO")):
                out.append(GuardConjecture(
                    "c", list(c_hyps), c.spec.recognizer_term(t),
                    f"type-spec of {c.var} at {where}"))
    return out


# ------------------------------------------------------------- the checker


@dataclass
class ConjectureResult:
    index: int
    conjecture: GuardConjecture
    status: str                      # "PASS" or "FAIL"
    counterexample: object = None    # dict symbol -> value
    errors: list = field(default_factory=list)

    def to_sexpr(self):
        out = [sym("CONJECTURE"), self.index, sym("CLASS"),
               sym(self.conjecture.klass), sym("STATUS"), sym(self.status)]
        if self.counterexample is not None:
            alist = [Dotted([k], v) for k, v in self.counterexample.items()]
            out.append([sym("COUNTEREXAMPLE"), alist])
        return out


@dataclass
class Report:
    results: list

    @property
    def all_passed(self):
        return all(r.status == "PASS" for r in self.results)

    @property
    def clean(self):
        return self.all_passed and not any(r.errors for r in self.results)

    def summary(self):
        lines = []
        for r in self.results:
            line = f"conjecture {r.index} [class ({r.conjecture.klass})] {r.status}"
            if r.counterexample is not None:
                binds = " ".join(f"{k}={print_sexpr(v)}"
                                 for k, v in r.counterexample.items())
                line += f"  counterexample: {binds}"
            if r.errors:
                line += f"  ({len(r.errors)} evaluation errors)"
            lines.append(line)
        return "\n".join(lines)


def _split_hyps(conjecture):
    warrants = []
    ordinary = []
    for h in conjecture.hyps:
        if (isinstance(h, Call) and not h.args
                and h.fn.name.startswith(WARRANT_PREFIX)):
            warrants.append(sym(h.fn.name[len(WARRANT_PREFIX):]))
        elif (conjecture.newv is not None and isinstance(h, Call)
              and h.fn is _S_MEMBER and h.args
              and h.args[0] == Var(conjecture.newv)):
            pass  # the membership hypothesis is replaced by enumeration
        else:
            ordinary.append(h)
    return warrants, ordinary


def check_conjectures(conjectures, domains, world):
    """Sweep each conjecture over the cartesian product of the domains.

    `domains` maps variable symbols to finite value lists.  The fresh
    membership variable is enumerated over the concrete target list per
    environment rather than needing a domain.  Evaluation errors are
    recorded per instance and do not abort the sweep.
    """
    results = []
    for idx, cj in enumerate(conjectures):
        results.append(_check_one(idx, cj, domains, world))
    return Report(results)


def _check_one(idx, cj, domains, world):
    res = ConjectureResult(idx, cj, "PASS")
    warrants, hyps = _split_hyps(cj)
    if any(wname not in world.warrants for wname in warrants):
        return res  # a false warrant hypothesis makes every instance vacuous

    free = set()
    for h in hyps:
        free |= term_free_vars(h)
    free |= term_free_vars(cj.concl)
    if cj.target is not None:
        free |= term_free_vars(cj.target)
    free.discard(cj.newv)
    free = sorted(free, key=lambda s: s.name)

    missing = [v for v in free if v not in domains]
    if missing:
        res.errors.append(("", str(DomainMissing(missing[0]))))
        res.status = "FAIL"
        return res

    for values in product(*(domains[v] for v in free)):
        bind = dict(zip(free, values))
        env = Env(dict(bind))
        ctx = top_level()
        try:
            if any(is_false(eval_term(h, env, world, ctx)) for h in hyps):
                continue
        except SloopError as e:
            res.errors.append((bind, str(e)))
            continue
        if cj.newv is None:
            instances = [None]
        else:
            try:
                instances = proper_items(eval_term(cj.target, env, world, ctx))
            except SloopError as e:
                res.errors.append((bind, str(e)))
                continue
        for inst in instances:
            ienv = env
            if cj.newv is not None:
                ienv = env.child({cj.newv: inst})
            try:
                v = eval_term(cj.concl, ienv, world, ctx)
            except SloopError as e:
                res.errors.append((bind, str(e)))
                continue
            if is_false(v):
                cex = dict(bind)
                if cj.newv is not None:
                    cex[cj.newv] = inst
                res.status = "FAIL"
                res.counterexample = cex
                return res
    return res


# -------------------------------------------------- world-level operation


def _loops_of_term(t, acc):
    cls = t.__class__
    if cls is Call:
        for a in t.args:
            _loops_of_term(a, acc)
    elif cls is If:
        _loops_of_term(t.test, acc)
        _loops_of_term(t.then, acc)
        _loops_of_term(t.els, acc)
    elif cls is Let:
        for _, v in t.bindings:
            _loops_of_term(v, acc)
        _loops_of_term(t.body, acc)
    elif cls is LambdaConst:
        _loops_of_term(t.fn.body, acc)
    elif cls is LoopForm:
        acc.append(t.spec)
        spec = t.spec
        for c in spec.iters:
            if isinstance(c.target, (In, On)):
                _loops_of_term(c.target.lst, acc)
            else:
                _loops_of_term(c.target.lo, acc)
                _loops_of_term(c.target.hi, acc)
                _loops_of_term(c.target.by, acc)
        for tt in spec.test_terms():
            _loops_of_term(tt, acc)


def collect_loop_specs(term):
    """Every loop$ occurring in a term, outermost first."""
    acc = []
    _loops_of_term(term, acc)
    return acc


def loop_specs_of_defn(defn):
    """Every loop$ occurring in a definition's body, outermost first."""
    return collect_loop_specs(defn.body)


DEFAULT_DOMAIN = list(range(-4, 5))


def verify_guards(world, name, domains=None):
    """Generate and check the loop$ guard conjectures of a definition.

    Returns (report, world).  When every conjecture passes cleanly the
    returned world carries the definition with its guard-verified flag
    set (recording the domains used), which licenses the trusted fast
    path for its loops.  Variables without an explicit domain default to
    integers in [-4, 4].
    """
    defn = world.defs.get(name)
    if defn is None:
        raise MalformedDefun(f"cannot verify guards of undefined {name}")
    conjectures = []
    for spec in loop_specs_of_defn(defn):
        conjectures += generate_guard_conjectures(spec, defn.guard_conjuncts,
                                                  world)
    free = set()
    for cj in conjectures:
        for h in cj.hyps:
            free |= term_free_vars(h)
        free |= term_free_vars(cj.concl)
        if cj.target is not None:
            free |= term_free_vars(cj.target)
        free.discard(cj.newv)
    domains = dict(domains) if domains else {}
    for v in free:
        domains.setdefault(v, DEFAULT_DOMAIN)
    report = check_conjectures(conjectures, domains, world)
    if report.clean:
        note = "verified over " + (", ".join(
            f"{v}[{min(d)}..{max(d)}]" for v, d in sorted(
                domains.items(), key=lambda kv: kv[0].name)
            if d) or "the empty domain")
        world = world.replace_defn(replace(defn, guard_verified=note,
                                           compiled=None))
    return report, world
