"""Parsing and validation of loop$ forms.

Grammar (clause order is fixed):

    (LOOP$ FOR v1 [OF-TYPE s1] target1
           {AS vi [OF-TYPE si] targeti}*
           [UNTIL [:GUARD gu] u]
           [WHEN  [:GUARD gw] w]
           op [:GUARD gb] body)

where op is ALWAYS, THEREIS, APPEND, COLLECT, or SUM, and a target is
IN lst, ON lst, or FROM lo TO hi [BY step].
"""

from dataclasses import dataclass, field

from . import kernel
from .errors import (
    DuplicateIterVar,
    MalformedLoop,
    MalformedOfType,
    MalformedTarget,
    MissingBody,
    UnknownLoopOperator,
    WhenWithAlwaysOrThereis,
)
from .kernel import (
    Call,
    Const,
    If,
    Let,
    LoopForm,
    TRUE,
    Var,
    and_term,
    term_free_vars,
    translate_term,
)
from .sexpr import Symbol, T, consp, sym

free_vars = term_free_vars

_S_LOOP = sym("LOOP$")
_S_FOR = sym("FOR")
_S_AS = sym("AS")
_S_OF_TYPE = sym("OF-TYPE")
_S_IN = sym("IN")
_S_ON = sym("ON")
_S_FROM = sym("FROM")
_S_TO = sym("TO")
_S_BY = sym("BY")
_S_UNTIL = sym("UNTIL")
_S_WHEN = sym("WHEN")
_S_KW_GUARD = sym(":GUARD")
_S_STAR = sym("*")

LOOP_OPS = ("ALWAYS", "THEREIS", "APPEND", "COLLECT", "SUM")
_OP_SYMS = {sym(op): op for op in LOOP_OPS}

_S_INTEGER = sym("INTEGER")
_S_RATIONAL = sym("RATIONAL")
_S_CONS = sym("CONS")


# -------------------------------------------------------------- type specs


@dataclass(eq=True)
class TypeSpec:
    """A loop$ of-type specification with a total recognizer."""

    kind: str                # INTEGER, RATIONAL, CONS, T, or RANGE
    lo: object = None        # RANGE bounds; None means unbounded
    hi: object = None

    def recognizer_term(self, x):
        """The recognizer predicate applied to term `x`."""
        if self.kind == "INTEGER":
            return Call(sym("INTEGERP"), [x])
        if self.kind == "RATIONAL":
            return Call(sym("RATIONALP"), [x])
        if self.kind == "CONS":
            return Call(sym("CONSP"), [x])
        if self.kind == "T":
            return TRUE
        conj = [Call(sym("INTEGERP"), [x])]
        if self.lo is not None:
            conj.append(Call(sym("NOT"), [Call(sym("<"), [x, Const(self.lo)])]))
        if self.hi is not None:
            conj.append(Call(sym("NOT"), [Call(sym("<"), [Const(self.hi), x])]))
        return and_term(conj)

    def check(self, v):
        """Python-level recognizer used by checked-mode execution."""
        if self.kind in ("INTEGER", "RATIONAL"):
            return type(v) is int
        if self.kind == "CONS":
            return consp(v)
        if self.kind == "T":
            return True
        return (type(v) is int
                and (self.lo is None or v >= self.lo)
                and (self.hi is None or v <= self.hi))

    def to_sexpr(self):
        if self.kind == "RANGE":
            star = _S_STAR
            return [_S_INTEGER,
                    star if self.lo is None else self.lo,
                    star if self.hi is None else self.hi]
        return sym(self.kind)


def parse_type_spec(e):
    if e is _S_INTEGER:
        return TypeSpec("INTEGER")
    if e is _S_RATIONAL:
        return TypeSpec("RATIONAL")
    if e is _S_CONS:
        return TypeSpec("CONS")
    if e is T:
        return TypeSpec("T")
    if type(e) is list and len(e) == 3 and e[0] is _S_INTEGER:
        lo, hi = e[1], e[2]
        if not (type(lo) is int or lo is _S_STAR):
            raise MalformedOfType(f"bad range bound {lo!r}")
        if not (type(hi) is int or hi is _S_STAR):
            raise MalformedOfType(f"bad range bound {hi!r}")
        return TypeSpec("RANGE",
                        None if lo is _S_STAR else lo,
                        None if hi is _S_STAR else hi)
    raise MalformedOfType(f"unsupported type-spec {e!r}")


# ----------------------------------------------------------------- targets


@dataclass(eq=True)
class In:
    lst: object  # Term


@dataclass(eq=True)
class On:
    lst: object  # Term


@dataclass(eq=True)
class FromToBy:
    lo: object
    hi: object
    by: object   # Terms; by defaults to Const(1)


@dataclass(eq=True)
class IterClause:
    var: Symbol
    spec: object    # TypeSpec or None
    target: object  # In, On, or FromToBy


def _target_terms(target):
    if isinstance(target, (In, On)):
        return [target.lst]
    return [target.lo, target.hi, target.by]


# --------------------------------------------------------------- loop spec


@dataclass(eq=True)
class LoopSpec:
    """A parsed loop$ form.  Equality is structural over the parsed content;
    the retained source form is for display only."""

    iters: list            # nonempty list of IterClause
    until_guard: object    # Term or None
    until_test: object     # Term or None
    when_guard: object
    when_test: object
    op: str                # one of LOOP_OPS
    body_guard: object
    body: object           # Term
    original: object = field(compare=False)
    free: frozenset = field(compare=False)
    ir: object = field(default=None, compare=False, repr=False)
    fast: object = field(default=None, compare=False, repr=False)

    def iter_vars(self):
        return [c.var for c in self.iters]

    def test_terms(self):
        """All until/when/body terms and their guards, in clause order."""
        out = []
        for t in (self.until_test, self.when_test, self.body,
                  self.until_guard, self.when_guard, self.body_guard):
            if t is not None:
                out.append(t)
        return out

    def substitute(self, mapping):
        ivars = set(self.iter_vars())
        inner = {k: v for k, v in mapping.items() if k not in ivars}

        def sub_t(t):
            return None if t is None else kernel.subst_vars(t, inner)

        iters = []
        for c in self.iters:
            tgt = c.target
            if isinstance(tgt, In):
                tgt = In(kernel.subst_vars(tgt.lst, mapping))
            elif isinstance(tgt, On):
                tgt = On(kernel.subst_vars(tgt.lst, mapping))
            else:
                tgt = FromToBy(kernel.subst_vars(tgt.lo, mapping),
                               kernel.subst_vars(tgt.hi, mapping),
                               kernel.subst_vars(tgt.by, mapping))
            iters.append(IterClause(c.var, c.spec, tgt))
        spec = LoopSpec(iters, sub_t(self.until_guard), sub_t(self.until_test),
                        sub_t(self.when_guard), sub_t(self.when_test),
                        self.op, sub_t(self.body_guard), sub_t(self.body),
                        original=self.original, free=frozenset())
        spec.free = _spec_free_vars(spec)
        spec.original = spec.render()
        return spec

    def render(self):
        """Reconstruct a loop$ source form from the parsed structure."""
        from .translate import term_to_sugar
        out = [sym("LOOP$")]
        for i, c in enumerate(self.iters):
            out.append(_S_FOR if i == 0 else _S_AS)
            out.append(c.var)
            if c.spec is not None:
                out.extend([_S_OF_TYPE, c.spec.to_sexpr()])
            tgt = c.target
            if isinstance(tgt, In):
                out.extend([_S_IN, term_to_sugar(tgt.lst)])
            elif isinstance(tgt, On):
                out.extend([_S_ON, term_to_sugar(tgt.lst)])
            else:
                out.extend([_S_FROM, term_to_sugar(tgt.lo),
                            _S_TO, term_to_sugar(tgt.hi)])
                if tgt.by != Const(1):
                    out.extend([_S_BY, term_to_sugar(tgt.by)])
        for kw, guard, test in ((_S_UNTIL, self.until_guard, self.until_test),
                                (_S_WHEN, self.when_guard, self.when_test)):
            if test is not None:
                out.append(kw)
                if guard is not None:
                    out.extend([_S_KW_GUARD, term_to_sugar(guard)])
                out.append(term_to_sugar(test))
        out.append(sym(self.op))
        if self.body_guard is not None:
            out.extend([_S_KW_GUARD, term_to_sugar(self.body_guard)])
        out.append(term_to_sugar(self.body))
        return out


def _spec_free_vars(spec):
    ivars = set(spec.iter_vars())
    out = set()
    for c in spec.iters:
        for t in _target_terms(c.target):
            out |= term_free_vars(t)
    for t in spec.test_terms():
        out |= term_free_vars(t) - ivars
    return frozenset(out)


# ------------------------------------------------------------------ parser


class _Cursor:
    __slots__ = ("items", "i")

    def __init__(self, items):
        self.items = items
        self.i = 0

    def peek(self):
        return self.items[self.i] if self.i < len(self.items) else None

    def next(self, what):
        if self.i >= len(self.items):
            raise MalformedLoop(f"loop$ form ended while expecting {what}")
        v = self.items[self.i]
        self.i += 1
        return v

    @property
    def done(self):
        return self.i >= len(self.items)


def parse_loop(e, outer_bound, world):
    """Parse and validate a (LOOP$ ...) form against `outer_bound` variables.

    All sub-terms are translated; UNTIL/WHEN/body terms (and their :GUARDs)
    may use the iteration variables, target terms may not.
    """
    if type(e) is not list or not e or e[0] is not _S_LOOP:
        raise MalformedLoop(f"not a loop$ form: {e!r}")
    cur = _Cursor(e[1:])
    outer_bound = set(outer_bound)

    if cur.peek() is not _S_FOR:
        raise MalformedLoop("loop$ must begin with a FOR clause")

    raw_iters = []
    while cur.peek() is _S_FOR or cur.peek() is _S_AS:
        kw = cur.next("FOR/AS")
        if kw is _S_FOR and raw_iters:
            raise MalformedLoop("only the first iteration clause may use FOR")
        var = cur.next("an iteration variable")
        if type(var) is not Symbol or var is T:
            raise MalformedLoop(f"bad iteration variable {var!r}")
        tspec = None
        if cur.peek() is _S_OF_TYPE:
            cur.next("OF-TYPE")
            tspec = parse_type_spec(cur.next("a type-spec"))
        raw_iters.append((var, tspec, _parse_raw_target(cur)))

    ivars = [v for v, _, _ in raw_iters]
    if len(set(ivars)) != len(ivars):
        raise DuplicateIterVar(f"duplicate iteration variables in {ivars}")
    ivar_set = set(ivars)
    bound_all = outer_bound | ivar_set

    def xl_target(src):
        t = translate_term(src, bound_all, world)
        used = term_free_vars(t) & ivar_set
        if used:
            raise MalformedTarget(
                f"target {src!r} references iteration variables {sorted(map(str, used))}")
        return t

    iters = []
    for var, tspec, raw in raw_iters:
        tag = raw[0]
        if tag is _S_IN:
            target = In(xl_target(raw[1]))
        elif tag is _S_ON:
            target = On(xl_target(raw[1]))
        else:
            lo, hi, by = raw[1], raw[2], raw[3]
            target = FromToBy(xl_target(lo), xl_target(hi),
                              Const(1) if by is None else xl_target(by))
        iters.append(IterClause(var, tspec, target))

    def xl_guarded(kw_name):
        guard = None
        if cur.peek() is _S_KW_GUARD:
            cur.next(":GUARD")
            guard = translate_term(cur.next(f"a :GUARD term for {kw_name}"),
                                   bound_all, world)
        test = translate_term(cur.next(f"the {kw_name} term"), bound_all, world)
        return guard, test

    until_guard = until_test = when_guard = when_test = None
    if cur.peek() is _S_UNTIL:
        cur.next("UNTIL")
        until_guard, until_test = xl_guarded("UNTIL")
    if cur.peek() is _S_WHEN:
        cur.next("WHEN")
        when_guard, when_test = xl_guarded("WHEN")

    if cur.done:
        raise MissingBody("loop$ has no operator and body")
    op_sym = cur.next("a loop operator")
    op = _OP_SYMS.get(op_sym)
    if op is None:
        raise UnknownLoopOperator(f"unknown loop operator {op_sym!r}")
    if when_test is not None and op in ("ALWAYS", "THEREIS"):
        raise WhenWithAlwaysOrThereis(
            f"a WHEN clause cannot be combined with {op}")

    body_guard = None
    if cur.peek() is _S_KW_GUARD:
        cur.next(":GUARD")
        body_guard = translate_term(cur.next("a :GUARD term for the body"),
                                    bound_all, world)
    if cur.done:
        raise MissingBody(f"loop$ operator {op} has no body")
    body = translate_term(cur.next("the loop body"), bound_all, world)
    if not cur.done:
        raise MalformedLoop(f"unexpected trailing forms {cur.items[cur.i:]!r}")

    spec = LoopSpec(iters, until_guard, until_test, when_guard, when_test,
                    op, body_guard, body, original=e, free=frozenset())
    spec.free = _spec_free_vars(spec)
    return spec


def _parse_raw_target(cur):
    tag = cur.next("a target clause (IN, ON, or FROM)")
    if tag is _S_IN or tag is _S_ON:
        return (tag, cur.next(f"the {tag} target term"))
    if tag is _S_FROM:
        lo = cur.next("the FROM term")
        if cur.next("TO") is not _S_TO:
            raise MalformedTarget("FROM must be followed by TO")
        hi = cur.next("the TO term")
        by = None
        if cur.peek() is _S_BY:
            cur.next("BY")
            by = cur.next("the BY term")
        return (tag, lo, hi, by)
    raise MalformedTarget(f"unknown target clause {tag!r}")


# -------------------------------------------------------------- classifier


def classify(spec):
    """Classify a loop as plain or fancy.

    Returns None for a plain loop (single iteration variable that is the
    only free variable of the tests, guards, and body).  Otherwise returns
    the loop's globals: every other free variable of those terms, in
    first-occurrence order (scanning until test, when test, body, then the
    :GUARD terms).
    """
    ivars = set(spec.iter_vars())
    ordered = []
    seen = set()
    for t in (spec.until_test, spec.when_test, spec.body,
              spec.until_guard, spec.when_guard, spec.body_guard):
        if t is not None:
            _ordered_vars(t, set(), seen, ordered)
    globals_ = [v for v in ordered if v not in ivars]
    if len(spec.iters) == 1 and not globals_:
        return None
    return globals_


def _ordered_vars(t, shadowed, seen, out):
    cls = t.__class__
    if cls is Var:
        if t.name not in shadowed and t.name not in seen:
            seen.add(t.name)
            out.append(t.name)
    elif cls is Call:
        for a in t.args:
            _ordered_vars(a, shadowed, seen, out)
    elif cls is If:
        _ordered_vars(t.test, shadowed, seen, out)
        _ordered_vars(t.then, shadowed, seen, out)
        _ordered_vars(t.els, shadowed, seen, out)
    elif cls is Let:
        for _, val in t.bindings:
            _ordered_vars(val, shadowed, seen, out)
        _ordered_vars(t.body, shadowed | {n for n, _ in t.bindings}, seen, out)
    elif cls is LoopForm:
        inner = t.spec
        for c in inner.iters:
            for tt in _target_terms(c.target):
                _ordered_vars(tt, shadowed, seen, out)
        ishadow = shadowed | set(inner.iter_vars())
        for tt in inner.test_terms():
            _ordered_vars(tt, ishadow, seen, out)
    # Const / LambdaConst contribute nothing
