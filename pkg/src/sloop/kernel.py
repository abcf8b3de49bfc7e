"""The semantic substrate: terms, environments, the world of definitions,
warrants, apply$, and call-by-value evaluation.

Terms are the translated form of source expressions: macros expanded,
constants quoted, AND/OR lowered to IF.  Function application comes in two
flavors with different warrant discipline:

  * a Call term on a user-defined name invokes the definition directly;
  * apply$ on a named function demands a warrant: at top level every
    warrant is treated as true, while in a proof context the warrant must
    be among the assumed set or it is recorded and forced as an error.
"""

from dataclasses import dataclass, field

from .errors import (
    ArityMismatch,
    ForcedWarrant,
    MalformedDefun,
    MalformedLambda,
    Redefinition,
    RecursionDepthExceeded,
    UnboundVariable,
    UnknownMacroOrFunction,
    UnwarrantedFunction,
    WarrantForUndefined,
)
from .sexpr import (
    NIL,
    Dotted,
    Symbol,
    T,
    bool_val,
    car,
    cdr,
    cons,
    consp,
    is_nil,
    proper_items,
    sym,
    truthy,
)

# ----------------------------------------------------------------- terms


@dataclass(eq=True)
class Const:
    value: object

    def __repr__(self):
        return f"Const({self.value!r})"


@dataclass(eq=True)
class Var:
    name: Symbol


@dataclass(eq=True)
class Call:
    fn: Symbol
    args: list


@dataclass(eq=True)
class If:
    test: object
    then: object
    els: object


@dataclass(eq=True)
class Let:
    bindings: list  # of (Symbol, Term)
    body: object


@dataclass(eq=True)
class LambdaConst:
    """A lambda object in a function-argument position."""
    fn: object  # FnObject


@dataclass(eq=True)
class LoopForm:
    """An embedded loop$ form; evaluation dispatches to the loop evaluator."""
    spec: object  # loopsyntax.LoopSpec


TRUE = Const(T)
FALSE = Const(NIL)


# ------------------------------------------------------- function objects


@dataclass(eq=True)
class NamedFn:
    name: Symbol

    def to_value(self):
        return self.name


@dataclass(eq=True)
class LambdaObj:
    formals: list  # of Symbol
    guard: object  # Term or None
    body: object   # Term
    _value: object = field(default=None, compare=False, repr=False)

    def to_value(self):
        """The quoted-lambda s-expression this object denotes."""
        if self._value is None:
            decls = []
            if self.guard is not None:
                decls.append([sym("XARGS"), sym(":GUARD"),
                              term_to_sexpr(self.guard)])
            decls.append([sym("IGNORABLE")] + list(self.formals))
            self._value = [sym("LAMBDA"), list(self.formals),
                           [sym("DECLARE")] + decls,
                           term_to_sexpr(self.body)]
        return self._value


def term_to_sexpr(t):
    """Render a term in translated (fully expanded, constants quoted) form."""
    cls = t.__class__
    if cls is Const:
        return [sym("QUOTE"), t.value]
    if cls is Var:
        return t.name
    if cls is Call:
        return [t.fn] + [term_to_sexpr(a) for a in t.args]
    if cls is If:
        return [sym("IF"), term_to_sexpr(t.test), term_to_sexpr(t.then),
                term_to_sexpr(t.els)]
    if cls is Let:
        return [sym("LET"),
                [[name, term_to_sexpr(val)] for name, val in t.bindings],
                term_to_sexpr(t.body)]
    if cls is LambdaConst:
        return [sym("QUOTE"), t.fn.to_value()]
    if cls is LoopForm:
        return t.spec.original
    raise TypeError(f"not a term: {t!r}")


def term_free_vars(t):
    """The exact set of free variable symbols of a term."""
    out = set()
    _free(t, out)
    return out


def _free(t, out):
    cls = t.__class__
    if cls is Var:
        out.add(t.name)
    elif cls is Call:
        for a in t.args:
            _free(a, out)
    elif cls is If:
        _free(t.test, out)
        _free(t.then, out)
        _free(t.els, out)
    elif cls is Let:
        inner = set()
        _free(t.body, inner)
        bound = set()
        for name, val in t.bindings:
            _free(val, out)
            bound.add(name)
        out |= inner - bound
    elif cls is LoopForm:
        out |= t.spec.free
    # Const and LambdaConst are closed


def subst_vars(t, mapping):
    """Substitute terms for free variables; respects Let and loop$ shadowing."""
    cls = t.__class__
    if cls is Var:
        return mapping.get(t.name, t)
    if cls is Const or cls is LambdaConst:
        return t
    if cls is Call:
        return Call(t.fn, [subst_vars(a, mapping) for a in t.args])
    if cls is If:
        return If(subst_vars(t.test, mapping), subst_vars(t.then, mapping),
                  subst_vars(t.els, mapping))
    if cls is Let:
        bound = {name for name, _ in t.bindings}
        inner = {k: v for k, v in mapping.items() if k not in bound}
        return Let([(name, subst_vars(val, mapping)) for name, val in t.bindings],
                   subst_vars(t.body, inner) if inner else t.body)
    if cls is LoopForm:
        return LoopForm(t.spec.substitute(mapping))
    raise TypeError(f"not a term: {t!r}")


def and_term(conjuncts):
    """Conjoin terms the way the AND macro does (an IF chain)."""
    if not conjuncts:
        return TRUE
    out = conjuncts[-1]
    for c in reversed(conjuncts[:-1]):
        out = If(c, out, FALSE)
    return out


def conjuncts_of(t):
    """Flatten an AND-shaped IF chain back into its conjuncts."""
    out = []
    while isinstance(t, If) and t.els == FALSE:
        out.append(t.test)
        t = t.then
    if t != TRUE:
        out.append(t)
    return out


# ----------------------------------------------------------- environments


_MISSING = object()


class Env:
    """Ordered bindings from symbols to values; innermost frame wins."""

    __slots__ = ("vars", "parent")

    def __init__(self, vars=None, parent=None):
        self.vars = vars if vars is not None else {}
        self.parent = parent

    def lookup(self, name):
        e = self
        while e is not None:
            v = e.vars.get(name, _MISSING)
            if v is not _MISSING:
                return v
            e = e.parent
        raise UnboundVariable(f"unbound variable {name}")

    def child(self, vars):
        return Env(vars, self)

    def flatten(self):
        """All visible bindings as one dict (innermost shadowing outer)."""
        frames = []
        e = self
        while e is not None:
            frames.append(e.vars)
            e = e.parent
        out = {}
        for f in reversed(frames):
            out.update(f)
        return out


EMPTY_ENV = Env({})


# ----------------------------------------------------------------- world


@dataclass
class Defn:
    name: Symbol
    formals: list
    guard: object            # Term or None
    guard_conjuncts: list    # source-level conjuncts of the guard, as Terms
    body: object             # Term
    guard_verified: object = None   # None, or a note recording the domains used
    compiled: object = field(default=None, compare=False, repr=False)


class World:
    """Definitions, named constants, and the set of warranted symbols.

    Worlds are persistent: define and friends return a new World and never
    mutate an existing one, so older worlds stay valid."""

    __slots__ = ("defs", "constants", "warrants")

    def __init__(self, defs=None, constants=None, warrants=frozenset()):
        self.defs = defs if defs is not None else {}
        self.constants = constants if constants is not None else {}
        self.warrants = warrants

    def with_defn(self, defn):
        if defn.name in self.defs or defn.name in BUILTINS:
            raise Redefinition(f"{defn.name} is already defined")
        if defn.name in self.constants:
            raise Redefinition(f"{defn.name} names a constant")
        defs = dict(self.defs)
        defs[defn.name] = defn
        return World(defs, self.constants, self.warrants)

    def replace_defn(self, defn):
        defs = dict(self.defs)
        defs[defn.name] = defn
        return World(defs, self.constants, self.warrants)

    def with_constant(self, name, value):
        if name in self.constants or name in self.defs:
            raise Redefinition(f"{name} is already defined")
        constants = dict(self.constants)
        constants[name] = value
        return World(self.defs, constants, self.warrants)

    def with_warrant(self, name):
        if name not in self.defs:
            raise WarrantForUndefined(f"cannot warrant undefined function {name}")
        return World(self.defs, self.constants, self.warrants | {name})


# ------------------------------------------------------------- contexts


class EvalContext:
    """Where evaluation is happening.

    Top level treats every warrant as true.  A proof context carries the
    warrants assumed as hypotheses and accumulates the symbols whose
    warrants had to be forced.  A context also owns per-evaluation state
    (frame counter, optional scion trace hook), so evaluations running in
    different threads must use distinct contexts.
    """

    __slots__ = ("kind", "assumed", "forced", "trace", "top_fast",
                 "frames", "max_frames")

    def __init__(self, kind, assumed=frozenset(), top_fast=False,
                 max_frames=100_000):
        self.kind = kind
        self.assumed = frozenset(assumed)
        self.forced = set()
        self.trace = None
        self.top_fast = top_fast
        self.frames = 0
        self.max_frames = max_frames

    @property
    def is_top(self):
        return self.kind == "top"


def top_level(top_fast=False):
    return EvalContext("top", top_fast=top_fast)


def proof_context(warrants=()):
    return EvalContext("proof", assumed=warrants)


# ---------------------------------------------------------------- builtins


def fix(v):
    """Coerce to an integer the way the logic's arithmetic does."""
    return v if type(v) is int else 0


def _b_add(a, w, c):
    return fix(a[0]) + fix(a[1])


def _b_mul(a, w, c):
    return fix(a[0]) * fix(a[1])


def _b_neg(a, w, c):
    return -fix(a[0])


def _b_less(a, w, c):
    return bool_val(fix(a[0]) < fix(a[1]))


def _b_equal(a, w, c):
    return bool_val(a[0] == a[1])


def _b_car(a, w, c):
    return car(a[0])


def _b_cdr(a, w, c):
    return cdr(a[0])


def _b_cons(a, w, c):
    return cons(a[0], a[1])


def _b_consp(a, w, c):
    return bool_val(consp(a[0]))


def _b_atom(a, w, c):
    return bool_val(not consp(a[0]))


def _b_not(a, w, c):
    return bool_val(is_nil(a[0]))


def _b_integerp(a, w, c):
    return bool_val(type(a[0]) is int)


def _b_natp(a, w, c):
    return bool_val(type(a[0]) is int and a[0] >= 0)


def _b_evenp(a, w, c):
    return bool_val(type(a[0]) is int and a[0] % 2 == 0)


def _b_oddp(a, w, c):
    return bool_val(type(a[0]) is int and a[0] % 2 == 1)


def _b_floor(a, w, c):
    x, y = fix(a[0]), fix(a[1])
    return 0 if y == 0 else x // y


def _b_mod(a, w, c):
    x, y = fix(a[0]), fix(a[1])
    return x if y == 0 else x - y * (x // y)


def _b_len(a, w, c):
    return len(proper_items(a[0]))


def _b_true_listp(a, w, c):
    return bool_val(type(a[0]) is list)


def _b_member_equal(a, w, c):
    x, l = a
    items = proper_items(l)
    for i, item in enumerate(items):
        if item == x:
            if type(l) is list:
                return l[i:]
            return Dotted(items[i:], l.last)
    return NIL


def _b_revappend(a, w, c):
    x, y = a
    rev = list(reversed(proper_items(x)))
    if not rev:
        return y
    if type(y) is list:
        return rev + y
    if isinstance(y, Dotted):
        return Dotted(rev + y.items, y.last)
    return Dotted(rev, y)


def _b_reverse(a, w, c):
    v = a[0]
    if type(v) is str:
        return v[::-1]
    return list(reversed(proper_items(v)))


def _b_implies(a, w, c):
    return bool_val(is_nil(a[0]) or truthy(a[1]))


def _b_apply(a, w, c):
    return apply_fn(a[0], proper_items(a[1]), w, c)


class Builtin:
    __slots__ = ("name", "arity", "fn", "fn_ilks")

    def __init__(self, name, arity, fn, fn_ilks=()):
        self.name = name
        self.arity = arity
        self.fn = fn
        self.fn_ilks = frozenset(fn_ilks)


BUILTINS = {}


def register_builtin(name, arity, fn, fn_ilks=()):
    s = sym(name)
    BUILTINS[s] = Builtin(s, arity, fn, fn_ilks)
    return s


for _name, _arity, _fn in [
    ("BINARY-+", 2, _b_add),
    ("BINARY-*", 2, _b_mul),
    ("UNARY--", 1, _b_neg),
    ("<", 2, _b_less),
    ("EQUAL", 2, _b_equal),
    ("CAR", 1, _b_car),
    ("CDR", 1, _b_cdr),
    ("CONS", 2, _b_cons),
    ("CONSP", 1, _b_consp),
    ("ENDP", 1, _b_atom),
    ("ATOM", 1, _b_atom),
    ("NOT", 1, _b_not),
    ("INTEGERP", 1, _b_integerp),
    ("RATIONALP", 1, _b_integerp),  # integers are the only rationals here
    ("NATP", 1, _b_natp),
    ("EVENP", 1, _b_evenp),
    ("ODDP", 1, _b_oddp),
    ("FLOOR", 2, _b_floor),
    ("MOD", 2, _b_mod),
    ("LEN", 1, _b_len),
    ("TRUE-LISTP", 1, _b_true_listp),
    ("MEMBER-EQUAL", 2, _b_member_equal),
    ("REVAPPEND", 2, _b_revappend),
    ("REVERSE", 1, _b_reverse),
    ("IMPLIES", 2, _b_implies),
]:
    register_builtin(_name, _arity, _fn)

register_builtin("APPLY$", 2, _b_apply, fn_ilks={0})

# Multiple-value forms are rejected outright rather than misinterpreted.
_REJECTED = {sym("MV"), sym("MV-LET"), sym("MV-NTH")}


# -------------------------------------------------------------- translate

_S_QUOTE = sym("QUOTE")
_S_IF = sym("IF")
_S_LET = sym("LET")
_S_LAMBDA = sym("LAMBDA")
_S_LAMBDA_D = sym("LAMBDA$")
_S_LOOP_D = sym("LOOP$")
_S_DECLARE = sym("DECLARE")
_S_XARGS = sym("XARGS")
_S_KW_GUARD = sym(":GUARD")
_S_AND = sym("AND")
_S_OR = sym("OR")
_S_LIST = sym("LIST")
_S_PLUS = sym("+")
_S_STAR = sym("*")
_S_MINUS = sym("-")
_S_GT = sym(">")
_S_LE = sym("<=")
_S_GE = sym(">=")
_S_LT = sym("<")
_S_BINARY_ADD = sym("BINARY-+")
_S_BINARY_MUL = sym("BINARY-*")
_S_UNARY_NEG = sym("UNARY--")
_S_CONS = sym("CONS")
_S_NOT = sym("NOT")


def translate_term(e, bound, world, fn_pos=False):
    """Translate a source expression into a term.

    `bound` is the set of variable symbols in scope.  Macros are expanded
    ((* ...) to nested BINARY-*, comparisons to <, AND/OR to IF, LIST to
    CONS chains), constants become quoted, and LOOP$ forms become embedded
    loop terms.  A LAMBDA$ expression is only accepted when `fn_pos` says
    the expression sits in a function-argument position.
    """
    t = type(e)
    if t is int or t is str:
        return Const(e)
    if t is Symbol:
        if e is T:
            return TRUE
        if e in bound:
            return Var(e)
        if e in world.constants:
            return Const(world.constants[e])
        raise UnboundVariable(f"unbound variable {e}")
    if t is list:
        if not e:
            return FALSE
        return _translate_form(e, bound, world, fn_pos)
    raise UnknownMacroOrFunction(f"cannot translate {e!r}")


def _translate_form(e, bound, world, fn_pos):
    head = e[0]
    if type(head) is not Symbol:
        raise UnknownMacroOrFunction(
            f"call must begin with a function symbol: {head!r}")
    args = e[1:]
    n = len(args)

    if head is _S_QUOTE:
        if n != 1:
            raise ArityMismatch("QUOTE takes exactly one argument")
        return Const(args[0])

    if head is _S_IF:
        if n != 3:
            raise ArityMismatch("IF takes exactly three arguments")
        return If(*(translate_term(a, bound, world) for a in args))

    if head is _S_LET:
        return _translate_let(args, bound, world)

    if head is _S_LAMBDA_D:
        if not fn_pos:
            raise UnknownMacroOrFunction(
                "LAMBDA$ is only legal in a function-argument position")
        return LambdaConst(_parse_lambda_source(e, world))

    if head is _S_LOOP_D:
        from . import loopsyntax
        return LoopForm(loopsyntax.parse_loop(e, bound, world))

    if head in _REJECTED:
        raise UnknownMacroOrFunction(f"{head} forms are not supported")

    expanded = _expand_macro(head, args)
    if expanded is not None:
        return translate_term(expanded, bound, world)

    defn = world.defs.get(head)
    if defn is not None:
        if n != len(defn.formals):
            raise ArityMismatch(
                f"{head} takes {len(defn.formals)} arguments, got {n}")
        return Call(head, [translate_term(a, bound, world) for a in args])

    b = BUILTINS.get(head)
    if b is not None:
        if n != b.arity:
            raise ArityMismatch(f"{head} takes {b.arity} arguments, got {n}")
        return Call(head, [translate_term(a, bound, world, fn_pos=(i in b.fn_ilks))
                           for i, a in enumerate(args)])

    raise UnknownMacroOrFunction(f"unknown function or macro {head}")


def _expand_macro(head, args):
    n = len(args)
    if head is _S_PLUS:
        if n == 0:
            return [_S_QUOTE, 0]
        out = args[-1]
        for a in reversed(args[:-1]):
            out = [_S_BINARY_ADD, a, out]
        return out if n > 1 else [_S_BINARY_ADD, [_S_QUOTE, 0], args[0]]
    if head is _S_STAR:
        if n == 0:
            return [_S_QUOTE, 1]
        out = args[-1]
        for a in reversed(args[:-1]):
            out = [_S_BINARY_MUL, a, out]
        return out if n > 1 else [_S_BINARY_MUL, [_S_QUOTE, 1], args[0]]
    if head is _S_MINUS:
        if n == 1:
            return [_S_UNARY_NEG, args[0]]
        if n == 2:
            return [_S_BINARY_ADD, args[0], [_S_UNARY_NEG, args[1]]]
        raise ArityMismatch("- takes one or two arguments")
    if head is _S_GT:
        if n != 2:
            raise ArityMismatch("> takes two arguments")
        return [_S_LT, args[1], args[0]]
    if head is _S_LE:
        if n != 2:
            raise ArityMismatch("<= takes two arguments")
        return [_S_NOT, [_S_LT, args[1], args[0]]]
    if head is _S_GE:
        if n != 2:
            raise ArityMismatch(">= takes two arguments")
        return [_S_NOT, [_S_LT, args[0], args[1]]]
    if head is _S_AND:
        if n == 0:
            return [_S_QUOTE, T]
        if n == 1:
            return args[0]
        return [_S_IF, args[0], [_S_AND] + args[1:], [_S_QUOTE, NIL]]
    if head is _S_OR:
        if n == 0:
            return [_S_QUOTE, NIL]
        if n == 1:
            return args[0]
        return [_S_IF, args[0], args[0], [_S_OR] + args[1:]]
    if head is _S_LIST:
        out = [_S_QUOTE, NIL]
        for a in reversed(args):
            out = [_S_CONS, a, out]
        return out
    return None


def _translate_let(args, bound, world):
    if len(args) != 2 or type(args[0]) is not list:
        raise UnknownMacroOrFunction("LET takes a binding list and one body form")
    bindings = []
    names = set()
    for b in args[0]:
        if type(b) is not list or len(b) != 2 or type(b[0]) is not Symbol:
            raise UnknownMacroOrFunction(f"bad LET binding {b!r}")
        name = b[0]
        if name in names:
            raise UnknownMacroOrFunction(f"duplicate LET binding {name}")
        names.add(name)
        bindings.append((name, translate_term(b[1], bound, world)))
    body = translate_term(args[1], bound | names, world)
    return Let(bindings, body)


def _parse_declare_guard(decl, formals, world):
    """Pull the :GUARD term out of a (DECLARE ...) form; other declare
    entries (IGNORABLE, TYPE) are tolerated and ignored."""
    guard_src = None
    verify = True
    for entry in decl[1:]:
        if type(entry) is list and entry and entry[0] is _S_XARGS:
            plist = entry[1:]
            if len(plist) % 2 != 0:
                raise MalformedDefun("odd XARGS keyword list")
            for k, v in zip(plist[::2], plist[1::2]):
                if k is _S_KW_GUARD:
                    guard_src = v
                elif k is sym(":VERIFY-GUARDS"):
                    verify = truthy(v)
    guard = None
    conjuncts = []
    if guard_src is not None:
        guard = translate_term(guard_src, set(formals), world)
        srcs = guard_src[1:] if (type(guard_src) is list and guard_src
                                 and guard_src[0] is _S_AND) else [guard_src]
        conjuncts = [translate_term(s, set(formals), world) for s in srcs]
        conjuncts = [c for c in conjuncts if c != TRUE]
    return guard, conjuncts, verify


def _parse_lambda_source(e, world):
    # (LAMBDA$ (formals) (DECLARE ...)? body)
    if len(e) not in (3, 4) or type(e[1]) is not list:
        raise MalformedLambda(f"malformed LAMBDA$ {e!r}")
    formals = e[1]
    if not all(type(f) is Symbol for f in formals):
        raise MalformedLambda("LAMBDA$ formals must be symbols")
    if len(set(formals)) != len(formals):
        raise MalformedLambda("LAMBDA$ formals must be distinct")
    guard = None
    body_src = e[-1]
    if len(e) == 4:
        decl = e[2]
        if type(decl) is not list or not decl or decl[0] is not _S_DECLARE:
            raise MalformedLambda(f"expected DECLARE, got {decl!r}")
        guard, _, _ = _parse_declare_guard(decl, formals, world)
    body = translate_term(body_src, set(formals), world)
    return LambdaObj(list(formals), guard, body)


def fn_object_of_value(v, world):
    """Coerce a runtime function value (symbol or quoted lambda) to a
    function object, validating that lambda objects are closed."""
    if isinstance(v, (NamedFn, LambdaObj)):
        return v
    if type(v) is Symbol:
        return NamedFn(v)
    if type(v) is list and v and v[0] is _S_LAMBDA:
        if len(v) not in (3, 4) or type(v[1]) is not list:
            raise MalformedLambda(f"malformed lambda object {v!r}")
        formals = v[1]
        if not all(type(f) is Symbol for f in formals):
            raise MalformedLambda("lambda formals must be symbols")
        if len(set(formals)) != len(formals):
            raise MalformedLambda("lambda formals must be distinct")
        guard = None
        if len(v) == 4:
            decl = v[2]
            if type(decl) is not list or not decl or decl[0] is not _S_DECLARE:
                raise MalformedLambda(f"expected DECLARE, got {decl!r}")
            guard, _, _ = _parse_declare_guard(decl, formals, world)
        body = translate_term(v[-1], set(formals), world)
        return LambdaObj(list(formals), guard, body)
    raise MalformedLambda(f"not a function object: {v!r}")


# -------------------------------------------------------------- evaluation


def eval_term(t, env, world, ctx, fast_ok=False):
    """Call-by-value evaluation of a term.

    `fast_ok` tracks whether evaluation is inside the body of a
    guard-verified definition, which licenses the fused fast path for
    embedded loop$ forms at top level.
    """
    while True:
        cls = t.__class__
        if cls is Const:
            return t.value
        if cls is Var:
            return env.lookup(t.name)
        if cls is Call:
            b = BUILTINS.get(t.fn)
            if b is not None:
                return b.fn([eval_term(a, env, world, ctx, fast_ok)
                             for a in t.args], world, ctx)
            defn = world.defs.get(t.fn)
            if defn is None:
                raise UnknownMacroOrFunction(f"undefined function {t.fn}")
            args = [eval_term(a, env, world, ctx, fast_ok) for a in t.args]
            return call_defn(defn, args, world, ctx)
        if cls is If:
            t = (t.then if truthy(eval_term(t.test, env, world, ctx, fast_ok))
                 else t.els)
            continue
        if cls is Let:
            vars = {name: eval_term(val, env, world, ctx, fast_ok)
                    for name, val in t.bindings}
            env = env.child(vars)
            t = t.body
            continue
        if cls is LambdaConst:
            return t.fn.to_value()
        if cls is LoopForm:
            from .fastpath import eval_loop
            return eval_loop(t.spec, env, world, ctx, fast_ok=fast_ok)
        raise TypeError(f"not a term: {t!r}")


def call_defn(defn, args, world, ctx):
    """Invoke a definition directly on evaluated arguments."""
    ctx.frames += 1
    if ctx.frames > ctx.max_frames:
        ctx.frames -= 1
        raise RecursionDepthExceeded(
            f"more than {ctx.max_frames} activation frames")
    try:
        env = Env(dict(zip(defn.formals, args)))
        return eval_term(defn.body, env, world, ctx,
                         fast_ok=defn.guard_verified is not None)
    except RecursionError:
        # the Python stack can overflow before the frame counter trips
        raise RecursionDepthExceeded("Python stack exhausted") from None
    finally:
        ctx.frames -= 1


def apply_fn(fn, args, world, ctx):
    """apply$: apply a function object to a list of argument values.

    Lambda objects are applied by evaluating the body under the formals.
    Named built-ins are invoked directly.  A named user function must have
    a warrant; at top level the warrant is treated as true, and in a proof
    context it must be among the assumed warrants or the symbol is
    recorded and forced.
    """
    if not isinstance(fn, (NamedFn, LambdaObj)):
        fn = fn_object_of_value(fn, world)
    if isinstance(fn, LambdaObj):
        if len(args) != len(fn.formals):
            raise ArityMismatch(
                f"lambda of arity {len(fn.formals)} applied to {len(args)} args")
        return eval_term(fn.body, Env(dict(zip(fn.formals, args))), world, ctx)
    name = fn.name
    b = BUILTINS.get(name)
    if b is not None:
        if len(args) != b.arity:
            raise ArityMismatch(
                f"{name} takes {b.arity} arguments, got {len(args)}")
        return b.fn(args, world, ctx)
    defn = world.defs.get(name)
    if defn is None or name not in world.warrants:
        raise UnwarrantedFunction(name)
    if len(args) != len(defn.formals):
        raise ArityMismatch(
            f"{name} takes {len(defn.formals)} arguments, got {len(args)}")
    if ctx.is_top:
        return call_defn(defn, args, world, ctx)
    if name in ctx.assumed:
        return call_defn(defn, args, world, ctx)
    ctx.forced.add(name)
    raise ForcedWarrant(name)


# ------------------------------------------------------------ definitions

_S_DEFUN = sym("DEFUN")
_S_DEFUN_D = sym("DEFUN$")
_S_DEFWARRANT = sym("DEFWARRANT")
_S_DEFCONST = sym("DEFCONST")
_S_VERIFY_GUARDS = sym("VERIFY-GUARDS")

EVENT_HEADS = {_S_DEFUN, _S_DEFUN_D, _S_DEFWARRANT, _S_DEFCONST,
               _S_VERIFY_GUARDS}


def define(form, world):
    """Process one definition event and return the extended world.

    Accepted events: (DEFUN name (formals) (DECLARE ...)? body), DEFUN$
    (which also issues the warrant), (DEFWARRANT name), (DEFCONST name
    term), and (VERIFY-GUARDS name (var lo hi)...) which runs the bounded
    guard check and, on success, marks the definition guard-verified.
    """
    if type(form) is not list or not form or type(form[0]) is not Symbol:
        raise MalformedDefun(f"not a definition event: {form!r}")
    head = form[0]

    if head is _S_DEFWARRANT:
        if len(form) != 2 or type(form[1]) is not Symbol:
            raise MalformedDefun("DEFWARRANT takes one function name")
        return world.with_warrant(form[1])

    if head is _S_DEFCONST:
        if len(form) != 3 or type(form[1]) is not Symbol:
            raise MalformedDefun("DEFCONST takes a name and a term")
        t = translate_term(form[2], set(), world)
        value = eval_term(t, EMPTY_ENV, world, top_level())
        return world.with_constant(form[1], value)

    if head is _S_VERIFY_GUARDS:
        from .guards import verify_guards
        if len(form) < 2 or type(form[1]) is not Symbol:
            raise MalformedDefun("VERIFY-GUARDS takes a function name")
        domains = {}
        for entry in form[2:]:
            if (type(entry) is not list or len(entry) != 3
                    or type(entry[0]) is not Symbol
                    or type(entry[1]) is not int or type(entry[2]) is not int):
                raise MalformedDefun(f"bad VERIFY-GUARDS domain {entry!r}")
            domains[entry[0]] = list(range(entry[1], entry[2] + 1))
        report, new_world = verify_guards(world, form[1],
                                          domains if domains else None)
        if not report.all_passed:
            raise MalformedDefun(
                f"guard verification of {form[1]} failed:\n{report.summary()}")
        return new_world

    if head is _S_DEFUN or head is _S_DEFUN_D:
        if (len(form) < 4 or type(form[1]) is not Symbol
                or type(form[2]) is not list
                or not all(type(f) is Symbol for f in form[2])):
            raise MalformedDefun(f"malformed {head} event")
        name, formals = form[1], list(form[2])
        if len(set(formals)) != len(formals):
            raise MalformedDefun(f"duplicate formals in {name}")
        decls = form[3:-1]
        body_src = form[-1]
        guard, conjuncts = None, []
        for decl in decls:
            if (type(decl) is not list or not decl
                    or decl[0] is not _S_DECLARE):
                raise MalformedDefun(f"expected DECLARE, got {decl!r}")
        # arity must be visible while translating a recursive body
        placeholder = Defn(name, formals, None, [], FALSE)
        w2 = world.with_defn(placeholder)
        for decl in decls:
            g, cj, _ = _parse_declare_guard(decl, formals, w2)
            if g is not None:
                guard, conjuncts = g, cj
        body = translate_term(body_src, set(formals), w2)
        w2 = w2.replace_defn(Defn(name, formals, guard, conjuncts, body))
        if head is _S_DEFUN_D:
            w2 = w2.with_warrant(name)
        return w2

    raise MalformedDefun(f"unknown event {head}")
