"""Command-line driver: file evaluation, translation display, guard
conjecture generation/checking, benchmarking, and an interactive REPL.

Input files hold one s-expression form per top-level expression.  DEFUN,
DEFUN$, DEFWARRANT, DEFCONST, and VERIFY-GUARDS forms extend the world;
any other form is evaluated and its value printed.
"""

import argparse
import sys

from . import __version__
from .errors import ForcedWarrant, IncompleteForm, ReaderError, SloopError
from .fastpath import bench as run_bench
from .guards import (
    check_conjectures,
    collect_loop_specs,
    generate_guard_conjectures,
    loop_specs_of_defn,
)
from .kernel import (
    EMPTY_ENV,
    EVENT_HEADS,
    LoopForm,
    World,
    define,
    eval_term,
    proof_context,
    top_level,
    translate_term,
)
from .loopsyntax import parse_loop
from .sexpr import Symbol, print_sexpr, read_all, sym
from .translate import translate_loop, untranslate

_S_LOOP = sym("LOOP$")
_S_WARRANT = sym("WARRANT")
_S_PROOF = sym("PROOF")
_S_TOP = sym("TOP")


class Tracer:
    """Prints scion entries and exits in the style of an evaluator trace."""

    def __init__(self, out):
        self.out = out
        self.depth = 0

    def enter(self, name, fn, lst):
        self.depth += 1
        fn_txt = print_sexpr(fn.to_value())
        print(f"{'  ' * (self.depth - 1)}{self.depth}> "
              f"({name} {fn_txt} {print_sexpr(lst)})", file=self.out)

    def exit(self, name, result):
        print(f"{'  ' * (self.depth - 1)}<{self.depth} "
              f"({name} {print_sexpr(result)})", file=self.out)
        self.depth -= 1


class Session:
    """A REPL/file-eval session: a world plus evaluation-context flags."""

    def __init__(self, out=None):
        self.world = World()
        self.proof_warrants = None   # None means top-level context
        self.trace = False
        self.top_fast = False
        self.out = out if out is not None else sys.stdout

    def make_ctx(self):
        if self.proof_warrants is None:
            ctx = top_level(top_fast=self.top_fast)
        else:
            ctx = proof_context(self.proof_warrants)
        if self.trace:
            ctx.trace = Tracer(self.out)
        return ctx

    def eval_form(self, form):
        """Process one form.  Returns (True, name) for events and
        (False, value) for evaluated expressions."""
        if (type(form) is list and form and type(form[0]) is Symbol
                and form[0] in EVENT_HEADS):
            self.world = define(form, self.world)
            return True, form[1]
        t = translate_term(form, set(), self.world)
        value = eval_term(t, EMPTY_ENV, self.world, self.make_ctx())
        return False, value


def _load_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return read_all(fh.read())
    except OSError as e:
        raise SloopError(f"cannot read {path}: {e}") from None


def _positioned(line, err):
    return f"line {line}: {err}"


def cmd_eval(args, out):
    session = Session(out)
    for form, line in _load_file(args.file):
        try:
            is_event, value = session.eval_form(form)
        except SloopError as e:
            print(_positioned(line, e), file=sys.stderr)
            return 1
        if not is_event:
            print(print_sexpr(value), file=out)
    return 0


def _collect_file_loops(path):
    """Yield (line, context-guard conjuncts, spec) for every loop$ in the
    file, building the world as events are processed."""
    world = World()
    found = []
    for form, line in _load_file(path):
        if (type(form) is list and form and type(form[0]) is Symbol
                and form[0] in EVENT_HEADS):
            world = define(form, world)
            if form[0].name in ("DEFUN", "DEFUN$"):
                defn = world.defs[form[1]]
                for spec in loop_specs_of_defn(defn):
                    found.append((line, defn.guard_conjuncts, spec))
        else:
            t = translate_term(form, set(), world)
            for spec in collect_loop_specs(t):
                found.append((line, [], spec))
    return world, found


def cmd_translate(args, out):
    try:
        _, loops = _collect_file_loops(args.file)
        for line, _, spec in loops:
            print(f"; line {line}: {print_sexpr(spec.original)}", file=out)
            print(print_sexpr(untranslate(translate_loop(spec))), file=out)
    except SloopError as e:
        print(e, file=sys.stderr)
        return 1
    return 0


def _parse_domain(txt):
    # VAR=LO..HI
    try:
        name, rng = txt.split("=", 1)
        lo, hi = rng.split("..", 1)
        return sym(name.strip()), list(range(int(lo), int(hi) + 1))
    except ValueError:
        raise SloopError(f"bad --domain {txt!r}; expected VAR=LO..HI") from None


def cmd_guards(args, out):
    try:
        world, loops = _collect_file_loops(args.file)
        conjectures = []
        for line, ctx_guard, spec in loops:
            cjs = generate_guard_conjectures(spec, ctx_guard, world)
            for cj in cjs:
                print(f"; conjecture {len(conjectures)} class ({cj.klass}): "
                      f"{cj.source} [line {line}]", file=out)
                print(print_sexpr(cj.to_sexpr()), file=out)
                conjectures.append(cj)
        if not args.check:
            return 0
        domains = dict(_parse_domain(d) for d in args.domain or [])
        report = check_conjectures(conjectures, domains, world)
        for res in report.results:
            print(print_sexpr(res.to_sexpr()), file=out)
        return 0 if report.all_passed else 1
    except SloopError as e:
        print(e, file=sys.stderr)
        return 1


def cmd_bench(args, out):
    try:
        session = Session(out)
        forms = _load_file(args.file)
        last = None
        for i, (form, _) in enumerate(forms):
            if type(form) is list and form and form[0] is _S_LOOP:
                last = i
        if last is None:
            raise SloopError("bench file must contain a loop$ form")
        for i, (form, _) in enumerate(forms):
            if i != last:
                session.eval_form(form)
        spec = parse_loop(forms[last][0], set(), session.world)
        record = run_bench(spec, EMPTY_ENV, session.world, reps=args.reps)
        print(print_sexpr(record.to_sexpr()), file=out)
        return 0
    except SloopError as e:
        print(e, file=sys.stderr)
        return 1


HELP_TEXT = """\
Forms are read and evaluated; definition events extend the world.
Commands (one line each):
  :TRANSLATE <form>      show the scion IR sugar of a loop$ (or the
                         translated term of any other form)
  :GUARDS <name>         print the guard conjectures of a definition
  :TRACE                 toggle scion tracing (reference path only)
  :FAST                  toggle the checked fast path for top-level loop$
  :CTX PROOF (WARRANT f) ...   switch to a proof context assuming warrants
  :CTX TOP               switch back to the top-level context
  :HELP                  this text
  :QUIT                  leave the REPL
"""


def _repl_command(session, forms, out):
    head = forms[0]
    name = head.name if type(head) is Symbol else ""
    if name == ":QUIT":
        return False
    if name == ":HELP":
        print(HELP_TEXT, file=out)
    elif name == ":TRACE":
        session.trace = not session.trace
        print(f"; trace {'on' if session.trace else 'off'}", file=out)
    elif name == ":FAST":
        session.top_fast = not session.top_fast
        print(f"; top-level fast path {'on' if session.top_fast else 'off'}",
              file=out)
    elif name == ":TRANSLATE":
        if len(forms) != 2:
            print("; usage: :TRANSLATE <form>", file=out)
            return True
        form = forms[1]
        if type(form) is list and form and form[0] is _S_LOOP:
            spec = parse_loop(form, set(), session.world)
            print(print_sexpr(untranslate(translate_loop(spec))), file=out)
        else:
            t = translate_term(form, set(), session.world)
            from .kernel import term_to_sexpr
            print(print_sexpr(term_to_sexpr(t)), file=out)
    elif name == ":GUARDS":
        if len(forms) != 2 or type(forms[1]) is not Symbol:
            print("; usage: :GUARDS <name>", file=out)
            return True
        defn = session.world.defs.get(forms[1])
        if defn is None:
            print(f"; {forms[1]} is not defined", file=out)
            return True
        for spec in loop_specs_of_defn(defn):
            for cj in generate_guard_conjectures(spec, defn.guard_conjuncts,
                                                 session.world):
                print(f"; class ({cj.klass}): {cj.source}", file=out)
                print(print_sexpr(cj.to_sexpr()), file=out)
    elif name == ":CTX":
        if len(forms) >= 2 and forms[1] is _S_TOP:
            session.proof_warrants = None
            print("; context: top level", file=out)
        elif len(forms) >= 2 and forms[1] is _S_PROOF:
            warrants = set()
            for w in forms[2:]:
                if (type(w) is list and len(w) == 2 and w[0] is _S_WARRANT
                        and type(w[1]) is Symbol):
                    warrants.add(w[1])
                else:
                    print(f"; expected (WARRANT name), got {print_sexpr(w)}",
                          file=out)
                    return True
            session.proof_warrants = frozenset(warrants)
            names = " ".join(sorted(w.name for w in warrants)) or "none"
            print(f"; context: proof, assumed warrants: {names}", file=out)
        else:
            print("; usage: :CTX TOP | :CTX PROOF (WARRANT f) ...", file=out)
    else:
        print(f"; unknown command {name}; try :HELP", file=out)
    return True


def repl(stdin=None, out=None):
    stdin = stdin if stdin is not None else sys.stdin
    out = out if out is not None else sys.stdout
    session = Session(out)
    print(f"; sloop {__version__} -- :HELP for commands", file=out)
    buffer = ""
    prompt = "sloop> "
    while True:
        print(prompt, end="", file=out, flush=True)
        line = stdin.readline()
        if not line:
            print("", file=out)
            return 0
        if not buffer and line.strip().startswith(":"):
            try:
                forms = [f for f, _ in read_all(line)]
            except ReaderError as e:
                print(f"; reader error: {e}", file=out)
                continue
            if forms and not _repl_command(session, forms, out):
                return 0
            continue
        buffer += line
        if not buffer.strip():
            buffer = ""
            continue
        try:
            forms = read_all(buffer)
        except IncompleteForm:
            prompt = "  ...> "
            continue
        except ReaderError as e:
            print(f"; reader error: {e}", file=out)
            buffer = ""
            prompt = "sloop> "
            continue
        buffer = ""
        prompt = "sloop> "
        for form, _ in forms:
            try:
                is_event, value = session.eval_form(form)
                if is_event:
                    print(f" {value}", file=out)
                else:
                    print(print_sexpr(value), file=out)
            except SloopError as e:
                print(f"; error: {e}", file=out)
                if isinstance(e, ForcedWarrant):
                    print(f"; missing warrant: {e.name}", file=out)


def main(argv=None):
    sys.setrecursionlimit(20_000)
    parser = argparse.ArgumentParser(
        prog="sloop",
        description="Evaluate, translate, guard-check, and benchmark "
                    "loop$ programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a file and print results")
    p.add_argument("file")

    p = sub.add_parser("translate",
                       help="print scion IR sugar for every loop$ in a file")
    p.add_argument("file")

    p = sub.add_parser("guards", help="print (and optionally check) guard "
                                      "conjectures for every loop$ in a file")
    p.add_argument("file")
    p.add_argument("--check", action="store_true",
                   help="run the bounded checker")
    p.add_argument("--domain", action="append", metavar="VAR=LO..HI",
                   help="enumeration domain for a free variable")

    p = sub.add_parser("bench", help="time the reference and fast paths on "
                                     "the file's final loop$ form")
    p.add_argument("file")
    p.add_argument("--reps", type=int, default=3)

    sub.add_parser("repl", help="interactive session")

    args = parser.parse_args(argv)
    out = sys.stdout
    if args.command == "eval":
        return cmd_eval(args, out)
    if args.command == "translate":
        return cmd_translate(args, out)
    if args.command == "guards":
        return cmd_guards(args, out)
    if args.command == "bench":
        return cmd_bench(args, out)
    return repl()


if __name__ == "__main__":
    sys.exit(main())
