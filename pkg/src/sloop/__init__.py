"""sloop: an iteration DSL over s-expressions.

loop$ forms are parsed, translated into higher-order scion calls (the
compositional semantics), and also executed by a fused single-pass fast
path.  apply$ enforces warrant discipline, guard obligations are generated
and checked by bounded enumeration, and the two evaluation paths are kept
observationally equal.

Importing the package wires up every submodule (the scions register
themselves as builtins, and the kernel dispatches embedded loop$ forms to
the fast-path module), so prefer `import sloop` over importing submodules
of an uninitialized package.
"""

from . import errors
from .sexpr import (
    Dotted,
    NIL,
    Symbol,
    T,
    print_sexpr,
    read_all,
    read_sexpr,
    sym,
)
from .kernel import (
    Call,
    Const,
    Env,
    EvalContext,
    If,
    LambdaConst,
    LambdaObj,
    Let,
    LoopForm,
    NamedFn,
    Var,
    World,
    apply_fn,
    define,
    eval_term,
    term_free_vars,
    term_to_sexpr,
    top_level,
    proof_context,
    translate_term,
)
from .loopsyntax import LoopSpec, TypeSpec, classify, free_vars, parse_loop
from .translate import (
    ScionCall,
    reconstruct_scion,
    term_to_sugar,
    translate_loop,
    untranslate,
)
from .scions import (
    eval_loop_reference,
    eval_target,
    fancy_scion,
    from_to_by,
    loop_as,
    plain_scion,
    tails,
)
from .guards import (
    GuardConjecture,
    Report,
    check_conjectures,
    generate_guard_conjectures,
    typespec_pred,
    verify_guards,
)
from .fastpath import (
    BenchRecord,
    ExecMode,
    bench,
    eval_loop,
    eval_loop_fast,
)

__version__ = "0.1.0"
