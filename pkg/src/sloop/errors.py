"""Exception hierarchy shared by every sloop module.

Errors carry enough structure (offending symbol, position, value) for the
CLI to print a useful one-line report and for tests to assert on causes.
"""


class SloopError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------- reader

class ReaderError(SloopError):
    def __init__(self, message, pos, line=None, col=None):
        super().__init__(message)
        self.pos = pos
        self.line = line
        self.col = col

    def __str__(self):
        loc = f"{self.line}:{self.col}" if self.line is not None else str(self.pos)
        return f"{self.args[0]} (at {loc})"


class UnbalancedParen(ReaderError):
    pass


class IncompleteForm(UnbalancedParen):
    """Input ended in the middle of a form; a REPL may read more lines."""


class BadToken(ReaderError):
    pass


# ------------------------------------------------------------- translate

class TranslateError(SloopError):
    pass


class UnknownMacroOrFunction(TranslateError):
    pass


class ArityMismatch(TranslateError):
    pass


class UnboundVariable(TranslateError):
    """Also raised at evaluation time for a variable missing from the
    environment (which indicates an internal bug once translation passed)."""


class MalformedLambda(TranslateError):
    pass


# ------------------------------------------------------------ loop parse

class LoopParseError(SloopError):
    pass


class DuplicateIterVar(LoopParseError):
    pass


class WhenWithAlwaysOrThereis(LoopParseError):
    pass


class UnknownLoopOperator(LoopParseError):
    pass


class MalformedTarget(LoopParseError):
    pass


class MalformedOfType(LoopParseError):
    pass


class MissingBody(LoopParseError):
    pass


class MalformedLoop(LoopParseError):
    pass


# ----------------------------------------------------------- definitions

class DefineError(SloopError):
    pass


class Redefinition(DefineError):
    pass


class MalformedDefun(DefineError):
    pass


class WarrantForUndefined(DefineError):
    pass


# ------------------------------------------------------------ evaluation

class EvalError(SloopError):
    pass


class UnwarrantedFunction(EvalError):
    """apply$ was handed a named function that never received a warrant."""

    def __init__(self, name):
        super().__init__(f"no warrant was ever issued for {name}")
        self.name = name


class ForcedWarrant(EvalError):
    """apply$ needed a warrant hypothesis that is not assumed in the current
    proof context.  The context accumulates every symbol forced this way."""

    def __init__(self, name):
        super().__init__(f"forced warrant hypothesis (APPLY$-WARRANT-{name})")
        self.name = name


class GuardViolation(EvalError):
    def __init__(self, var, value, predicate):
        super().__init__(f"guard violation: {var} = {value!r} fails {predicate}")
        self.var = var
        self.value = value
        self.predicate = predicate


class RecursionDepthExceeded(EvalError):
    pass


class NonPositiveStep(EvalError):
    pass


class NonIntegerBound(EvalError):
    pass


# ------------------------------------------------------- guards checking

class DomainMissing(SloopError):
    def __init__(self, var):
        super().__init__(f"no enumeration domain given for {var}")
        self.var = var


# ------------------------------------------------------------ benchmarks

class ResultMismatch(SloopError):
    """The two evaluation paths disagreed; this is always a bug."""

    def __init__(self, reference, fast):
        super().__init__(
            f"reference and fast paths disagree: {reference!r} vs {fast!r}")
        self.reference = reference
        self.fast = fast
