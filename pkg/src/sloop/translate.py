"""Compilation of parsed loop$ forms into scion-call IR, and rendering of
that IR back into readable lambda$ sugar.

A plain loop becomes a chain of unary-lambda scions.  A fancy loop becomes
a chain of binary-lambda scions over (globals, locals): the lambdas take
the formals LOOP$-GVARS and LOOP$-IVARS and LET-bind each global and each
iteration variable to successive CARs of those lists, and the target is a
zip of the per-clause target lists.
"""

from dataclasses import dataclass

from .errors import UnknownMacroOrFunction
from .kernel import (
    Call,
    Const,
    If,
    LambdaConst,
    LambdaObj,
    Let,
    LoopForm,
    NamedFn,
    TRUE,
    Var,
    and_term,
    fn_object_of_value,
    subst_vars,
    translate_term,
)
from .loopsyntax import FromToBy, In, LOOP_OPS, On, classify
from .sexpr import NIL, Symbol, T, is_nil, sym

_S_CAR = sym("CAR")
_S_CDR = sym("CDR")
_S_LEN = sym("LEN")
_S_EQUAL = sym("EQUAL")
_S_TRUE_LISTP = sym("TRUE-LISTP")
_S_GVARS = sym("LOOP$-GVARS")
_S_IVARS = sym("LOOP$-IVARS")
_S_LIST = sym("LIST")
_S_QUOTE = sym("QUOTE")
_S_LAMBDA_D = sym("LAMBDA$")
_S_DECLARE = sym("DECLARE")
_S_XARGS = sym("XARGS")
_S_KW_GUARD = sym(":GUARD")
_S_FROM_TO_BY = sym("FROM-TO-BY")
_S_TAILS = sym("TAILS")
_S_LOOP_AS = sym("LOOP$-AS")
_S_IF = sym("IF")
_S_LET = sym("LET")
_S_AND = sym("AND")
_S_OR = sym("OR")
_S_ADD = sym("BINARY-+")
_S_MUL = sym("BINARY-*")
_S_NEG = sym("UNARY--")
_S_CONS_FN = sym("CONS")


# --------------------------------------------------------------------- IR


@dataclass(eq=True)
class FromToByExpr:
    lo: object
    hi: object
    by: object


@dataclass(eq=True)
class TailsExpr:
    lst: object


@dataclass(eq=True)
class ListExpr:
    lst: object


@dataclass(eq=True)
class ZipExpr:
    parts: list


@dataclass(eq=True)
class ScionCall:
    """The translated form of a loop$: an operator scion over an optional
    WHEN$ over an optional UNTIL$ over a target list."""

    op: str              # ALWAYS, THEREIS, APPEND, COLLECT, or SUM
    fn: object           # body FnObject
    until: object        # FnObject or None
    when: object         # FnObject or None
    globals: object      # list of Terms if fancy, None if plain
    target: object       # TargetExpr

    @property
    def fancy(self):
        return self.globals is not None


def _target_expr(target):
    if isinstance(target, In):
        return ListExpr(target.lst)
    if isinstance(target, On):
        return TailsExpr(target.lst)
    return FromToByExpr(target.lo, target.hi, target.by)


def _car_cdr_chain(base, k):
    t = Var(base)
    for _ in range(k):
        t = Call(_S_CDR, [t])
    return Call(_S_CAR, [t])


def _guard_conj(tspec, var_term):
    if tspec is None or tspec.kind == "T":
        return []
    return [tspec.recognizer_term(var_term)]


def translate_loop(spec):
    """Translate a parsed loop$ into its scion-call IR."""
    globals_ = classify(spec)
    if globals_ is None:
        return _translate_plain(spec)
    return _translate_fancy(spec, globals_)


def _translate_plain(spec):
    clause = spec.iters[0]
    var = clause.var

    def make_lambda(test, guard):
        conj = _guard_conj(clause.spec, Var(var))
        if guard is not None:
            conj.append(guard)
        return LambdaObj([var], and_term(conj) if conj else None, test)

    return ScionCall(
        op=spec.op,
        fn=make_lambda(spec.body, spec.body_guard),
        until=(make_lambda(spec.until_test, spec.until_guard)
               if spec.until_test is not None else None),
        when=(make_lambda(spec.when_test, spec.when_guard)
              if spec.when_test is not None else None),
        globals=None,
        target=_target_expr(clause.target),
    )


def _translate_fancy(spec, globals_):
    ivars = spec.iter_vars()
    bindings = [(g, _car_cdr_chain(_S_GVARS, i)) for i, g in enumerate(globals_)]
    bindings += [(v, _car_cdr_chain(_S_IVARS, j)) for j, v in enumerate(ivars)]
    chain_map = dict(bindings)

    structure = [
        Call(_S_TRUE_LISTP, [Var(_S_GVARS)]),
        Call(_S_EQUAL, [Call(_S_LEN, [Var(_S_GVARS)]), Const(len(globals_))]),
        Call(_S_TRUE_LISTP, [Var(_S_IVARS)]),
        Call(_S_EQUAL, [Call(_S_LEN, [Var(_S_IVARS)]), Const(len(ivars))]),
    ]
    recognizers = []
    for j, c in enumerate(spec.iters):
        recognizers += _guard_conj(c.spec, _car_cdr_chain(_S_IVARS, j))

    def make_lambda(test, guard):
        conj = list(structure) + list(recognizers)
        if guard is not None:
            conj.append(subst_vars(guard, chain_map))
        return LambdaObj([_S_GVARS, _S_IVARS], and_term(conj),
                         Let(list(bindings), test))

    return ScionCall(
        op=spec.op,
        fn=make_lambda(spec.body, spec.body_guard),
        until=(make_lambda(spec.until_test, spec.until_guard)
               if spec.until_test is not None else None),
        when=(make_lambda(spec.when_test, spec.when_guard)
              if spec.when_test is not None else None),
        globals=[Var(g) for g in globals_],
        target=ZipExpr([_target_expr(c.target) for c in spec.iters]),
    )


# ------------------------------------------------------------ untranslate


def term_to_sugar(t):
    """Render a term as source-level sugar: BINARY chains flattened back to
    + and *, IF chains restored to AND/OR, self-evaluating constants bare."""
    cls = t.__class__
    if cls is Const:
        v = t.value
        if type(v) is int or type(v) is str or v is T or is_nil(v):
            return v
        return [_S_QUOTE, v]
    if cls is Var:
        return t.name
    if cls is Call:
        if t.fn is _S_ADD:
            if isinstance(t.args[1], Call) and t.args[1].fn is _S_NEG:
                return [sym("-"), term_to_sugar(t.args[0]),
                        term_to_sugar(t.args[1].args[0])]
            args = [term_to_sugar(t.args[0])]
            rest = t.args[1]
            while (isinstance(rest, Call) and rest.fn is _S_ADD
                   and not (isinstance(rest.args[1], Call)
                            and rest.args[1].fn is _S_NEG)):
                args.append(term_to_sugar(rest.args[0]))
                rest = rest.args[1]
            args.append(term_to_sugar(rest))
            return [sym("+")] + args
        if t.fn is _S_MUL:
            args = [term_to_sugar(t.args[0])]
            rest = t.args[1]
            while isinstance(rest, Call) and rest.fn is _S_MUL:
                args.append(term_to_sugar(rest.args[0]))
                rest = rest.args[1]
            args.append(term_to_sugar(rest))
            return [sym("*")] + args
        if t.fn is _S_NEG:
            return [sym("-"), term_to_sugar(t.args[0])]
        if t.fn is _S_CONS_FN:
            items = [term_to_sugar(t.args[0])]
            rest = t.args[1]
            while isinstance(rest, Call) and rest.fn is _S_CONS_FN:
                items.append(term_to_sugar(rest.args[0]))
                rest = rest.args[1]
            if rest == Const(NIL):
                return [_S_LIST] + items
            return [_S_CONS_FN, term_to_sugar(t.args[0]),
                    term_to_sugar(t.args[1])]
        return [t.fn] + [term_to_sugar(a) for a in t.args]
    if cls is If:
        if t.els == Const(NIL) and t.then != Const(NIL):
            conj = [term_to_sugar(t.test)]
            rest = term_to_sugar(t.then)
            if type(rest) is list and rest and rest[0] is _S_AND:
                conj += rest[1:]
            else:
                conj.append(rest)
            return [_S_AND] + conj
        if t.test == t.then:
            disj = [term_to_sugar(t.test)]
            rest = term_to_sugar(t.els)
            if type(rest) is list and rest and rest[0] is _S_OR:
                disj += rest[1:]
            else:
                disj.append(rest)
            return [_S_OR] + disj
        return [_S_IF, term_to_sugar(t.test), term_to_sugar(t.then),
                term_to_sugar(t.els)]
    if cls is Let:
        return [_S_LET, [[n, term_to_sugar(v)] for n, v in t.bindings],
                term_to_sugar(t.body)]
    if cls is LambdaConst:
        return _fn_sugar(t.fn)
    if cls is LoopForm:
        return t.spec.original
    raise TypeError(f"not a term: {t!r}")


def _fn_sugar(fn):
    if isinstance(fn, NamedFn):
        return [_S_QUOTE, fn.name]
    out = [_S_LAMBDA_D, list(fn.formals)]
    if fn.guard is not None:
        out.append([_S_DECLARE, [_S_XARGS, _S_KW_GUARD,
                                 term_to_sugar(fn.guard)]])
    out.append(term_to_sugar(fn.body))
    return out


def _target_sugar(t):
    if isinstance(t, FromToByExpr):
        return [_S_FROM_TO_BY, term_to_sugar(t.lo), term_to_sugar(t.hi),
                term_to_sugar(t.by)]
    if isinstance(t, TailsExpr):
        return [_S_TAILS, term_to_sugar(t.lst)]
    if isinstance(t, ZipExpr):
        return [_S_LOOP_AS, [_S_LIST] + [_target_sugar(p) for p in t.parts]]
    return term_to_sugar(t.lst)


def scion_name(op, fancy, chain=""):
    base = (chain or op) + "$"
    return sym(base + "+" if fancy else base)


def untranslate(sc):
    """Render scion-call IR as nested lambda$ sugar, e.g.
    (COLLECT$ (LAMBDA$ (I) (* I I)) (WHEN$ ... (UNTIL$ ... target)))."""
    fancy = sc.fancy
    gl = [[_S_LIST] + [term_to_sugar(g) for g in sc.globals]] if fancy else []
    inner = _target_sugar(sc.target)
    if sc.until is not None:
        inner = [scion_name(sc.op, fancy, "UNTIL"), _fn_sugar(sc.until)] + gl + [inner]
    if sc.when is not None:
        inner = [scion_name(sc.op, fancy, "WHEN"), _fn_sugar(sc.when)] + gl + [inner]
    return [scion_name(sc.op, fancy), _fn_sugar(sc.fn)] + gl + [inner]


# ---------------------------------------------------------- reconstruction

_PLAIN_OPS = {sym(op + "$"): op for op in LOOP_OPS}
_FANCY_OPS = {sym(op + "$+"): op for op in LOOP_OPS}
_CHAINS = {sym(n + "$"): (n, False) for n in ("UNTIL", "WHEN")}
_CHAINS.update({sym(n + "$+"): (n, True) for n in ("UNTIL", "WHEN")})


def _fn_from_source(e, bound, world):
    t = translate_term(e, bound, world, fn_pos=True)
    if isinstance(t, LambdaConst):
        return t.fn
    if isinstance(t, Const):
        return fn_object_of_value(t.value, world)
    raise UnknownMacroOrFunction(
        f"cannot reconstruct a function object from {e!r}")


def reconstruct_scion(e, bound, world):
    """Parse untranslated scion sugar back into ScionCall IR (the inverse
    of untranslate on its image)."""
    if type(e) is not list or not e or type(e[0]) is not Symbol:
        raise UnknownMacroOrFunction(f"not a scion call: {e!r}")
    head = e[0]
    fancy = head in _FANCY_OPS
    op = _FANCY_OPS.get(head) if fancy else _PLAIN_OPS.get(head)
    if op is None:
        raise UnknownMacroOrFunction(f"not a loop operator scion: {head}")
    want = 4 if fancy else 3
    if len(e) != want:
        raise UnknownMacroOrFunction(f"malformed scion call {e!r}")
    fn = _fn_from_source(e[1], bound, world)
    globals_ = _globals_from_source(e[2], bound, world) if fancy else None
    until = when = None
    rest = e[-1]
    for expect in ("WHEN", "UNTIL"):
        if (type(rest) is list and rest and rest[0] in _CHAINS
                and _CHAINS[rest[0]] == (expect, fancy)):
            if len(rest) != want:
                raise UnknownMacroOrFunction(f"malformed scion call {rest!r}")
            f = _fn_from_source(rest[1], bound, world)
            if expect == "WHEN":
                when = f
            else:
                until = f
            rest = rest[-1]
    target = _target_from_source(rest, bound, world)
    return ScionCall(op, fn, until, when, globals_, target)


def _globals_from_source(e, bound, world):
    if is_nil(e) or (type(e) is list and len(e) == 2
                     and e[0] is _S_QUOTE and is_nil(e[1])):
        return []
    if type(e) is list and e and e[0] is _S_LIST:
        return [translate_term(g, bound, world) for g in e[1:]]
    raise UnknownMacroOrFunction(f"cannot reconstruct globals from {e!r}")


def _target_from_source(e, bound, world):
    if type(e) is list and e and type(e[0]) is Symbol:
        if e[0] is _S_FROM_TO_BY and len(e) == 4:
            return FromToByExpr(*(translate_term(a, bound, world) for a in e[1:]))
        if e[0] is _S_TAILS and len(e) == 2:
            return TailsExpr(translate_term(e[1], bound, world))
        if e[0] is _S_LOOP_AS and len(e) == 2:
            inner = e[1]
            if type(inner) is list and inner and inner[0] is _S_LIST:
                return ZipExpr([_target_from_source(p, bound, world)
                                for p in inner[1:]])
    return ListExpr(translate_term(e, bound, world))
