"""The loop$ scions and target builders: the compositional reference
semantics.  Every scion folds apply$ over an already-materialized target
list, so warrant accounting happens on every element application.
"""

from .errors import NonIntegerBound, NonPositiveStep
from .kernel import apply_fn, eval_term, fn_object_of_value, register_builtin
from .sexpr import Dotted, NIL, T, is_false, proper_items
from . import translate as _tr


def from_to_by(lo, hi, by):
    """The ascending progression lo, lo+by, ... stopping at hi."""
    if type(lo) is not int or type(hi) is not int or type(by) is not int:
        raise NonIntegerBound(
            f"FROM-TO-BY bounds must be integers: {lo!r} {hi!r} {by!r}")
    if by < 1:
        raise NonPositiveStep(f"FROM-TO-BY step must be positive: {by}")
    return list(range(lo, hi + 1, by))


def tails(v):
    """All non-empty tails of `v`, stopping at the first non-pair tail."""
    if type(v) is list:
        return [v[i:] for i in range(len(v))]
    if isinstance(v, Dotted):
        items = v.items
        return [Dotted(items[i:], v.last) for i in range(len(items))]
    return []


def loop_as(lists):
    """Zip several target lists into tuples, truncated at the shortest."""
    return [list(t) for t in zip(*[proper_items(l) for l in lists])]


SCION_KINDS = ("SUM", "COLLECT", "APPEND", "ALWAYS", "THEREIS", "UNTIL", "WHEN")


def _fold(kind, app, lst):
    if kind == "SUM":
        total = 0
        for e in lst:
            v = app(e)
            if type(v) is int:
                total += v
        return total
    if kind == "COLLECT":
        return [app(e) for e in lst]
    if kind == "APPEND":
        out = []
        for e in lst:
            out.extend(proper_items(app(e)))
        return out
    if kind == "ALWAYS":
        for e in lst:
            if is_false(app(e)):
                return NIL
        return T
    if kind == "THEREIS":
        for e in lst:
            v = app(e)
            if not is_false(v):
                return v
        return NIL
    if kind == "UNTIL":
        out = []
        for e in lst:
            if not is_false(app(e)):
                break
            out.append(e)
        return out
    if kind == "WHEN":
        return [e for e in lst if not is_false(app(e))]
    raise ValueError(f"unknown scion kind {kind}")


def plain_scion(kind, fn, lst, world, ctx):
    """Fold apply$(fn, (e)) over the elements of lst per the scion kind."""
    tr = ctx.trace
    if tr is not None:
        tr.enter(kind + "$", fn, lst)
    result = _fold(kind, lambda e: apply_fn(fn, [e], world, ctx), lst)
    if tr is not None:
        tr.exit(kind + "$", result)
    return result


def fancy_scion(kind, fn, globals_, lst, world, ctx):
    """Like plain_scion but each application is apply$(fn, (globals, e))."""
    tr = ctx.trace
    if tr is not None:
        tr.enter(kind + "$+", fn, lst)
    result = _fold(kind, lambda e: apply_fn(fn, [globals_, e], world, ctx), lst)
    if tr is not None:
        tr.exit(kind + "$+", result)
    return result


def eval_target(texpr, env, world, ctx):
    """Materialize the target list of a scion call."""
    cls = texpr.__class__
    if cls is _tr.ListExpr:
        return proper_items(eval_term(texpr.lst, env, world, ctx))
    if cls is _tr.TailsExpr:
        return tails(eval_term(texpr.lst, env, world, ctx))
    if cls is _tr.FromToByExpr:
        return from_to_by(eval_term(texpr.lo, env, world, ctx),
                          eval_term(texpr.hi, env, world, ctx),
                          eval_term(texpr.by, env, world, ctx))
    if cls is _tr.ZipExpr:
        return loop_as([eval_target(p, env, world, ctx) for p in texpr.parts])
    raise TypeError(f"not a target expression: {texpr!r}")


def eval_loop_reference(sc, env, world, ctx):
    """Evaluate scion-call IR compositionally: build the target list, then
    apply UNTIL$, then WHEN$, then the operator scion."""
    lst = eval_target(sc.target, env, world, ctx)
    if sc.fancy:
        gvals = [eval_term(g, env, world, ctx) for g in sc.globals]
        if sc.until is not None:
            lst = fancy_scion("UNTIL", sc.until, gvals, lst, world, ctx)
        if sc.when is not None:
            lst = fancy_scion("WHEN", sc.when, gvals, lst, world, ctx)
        return fancy_scion(sc.op, sc.fn, gvals, lst, world, ctx)
    if sc.until is not None:
        lst = plain_scion("UNTIL", sc.until, lst, world, ctx)
    if sc.when is not None:
        lst = plain_scion("WHEN", sc.when, lst, world, ctx)
    return plain_scion(sc.op, sc.fn, lst, world, ctx)


# ------------------------------------------------- term-level availability
#
# Registering the scions and target builders as builtins makes translated
# IR forms like (SUM$ '(LAMBDA (X) ...) LST) directly evaluable as terms.


def _register_scions():
    def plain_wrapper(kind):
        def fn(args, world, ctx):
            return plain_scion(kind, fn_object_of_value(args[0], world),
                               proper_items(args[1]), world, ctx)
        return fn

    def fancy_wrapper(kind):
        def fn(args, world, ctx):
            return fancy_scion(kind, fn_object_of_value(args[0], world),
                               args[1], proper_items(args[2]), world, ctx)
        return fn

    for kind in SCION_KINDS:
        register_builtin(kind + "$", 2, plain_wrapper(kind), fn_ilks={0})
        register_builtin(kind + "$+", 3, fancy_wrapper(kind), fn_ilks={0})

    register_builtin("FROM-TO-BY", 3,
                     lambda a, w, c: from_to_by(a[0], a[1], a[2]))
    register_builtin("TAILS", 1, lambda a, w, c: tails(a[0]))
    register_builtin("LOOP$-AS", 1,
                     lambda a, w, c: loop_as(proper_items(a[0])))


_register_scions()
