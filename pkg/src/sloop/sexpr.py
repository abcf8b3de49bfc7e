"""The s-expression object universe: reader, printer, and value helpers.

Representation choices (shared by source text, terms, and runtime values):

  * integers      -> Python int (arbitrary precision)
  * symbols       -> interned Symbol objects, names upcased on read
  * strings       -> Python str
  * proper lists  -> Python list
  * NIL           -> the empty Python list (NIL is both the empty list and
                     falsity, so [] models all three roles at once)
  * dotted tails  -> Dotted(items, last): a nonempty proper prefix followed
                     by a non-list final cdr, e.g. (1 2 . 3)

Values must never be mutated after construction; every operation in the
package builds fresh lists.
"""

from .errors import BadToken, IncompleteForm, UnbalancedParen

NIL = []


class Symbol:
    """An interned symbol; equality and hashing are by identity."""

    __slots__ = ("name",)
    _table = {}

    def __new__(cls, name):
        obj = cls._table.get(name)
        if obj is None:
            obj = object.__new__(cls)
            obj.name = name
            cls._table[name] = obj
        return obj

    def __repr__(self):
        return self.name

    def __reduce__(self):
        return (Symbol, (self.name,))


def sym(name):
    """Intern `name` (upcased).  NIL is the empty list, not a Symbol."""
    name = name.upper()
    if name == "NIL":
        return NIL
    return Symbol(name)


T = sym("T")
QUOTE = sym("QUOTE")


class Dotted:
    """An improper list: a nonempty run of items ending in a non-list cdr."""

    __slots__ = ("items", "last")

    def __init__(self, items, last):
        self.items = items
        self.last = last

    def __eq__(self, other):
        return (isinstance(other, Dotted)
                and self.items == other.items and self.last == other.last)

    def __hash__(self):
        raise TypeError("Dotted values are not hashable")

    def __repr__(self):
        return print_sexpr(self)


def is_nil(v):
    return type(v) is list and not v


def is_false(v):
    return type(v) is list and not v


def truthy(v):
    return not (type(v) is list and not v)


def bool_val(b):
    return T if b else NIL


def consp(v):
    return (type(v) is list and bool(v)) or isinstance(v, Dotted)


def car(v):
    if type(v) is list:
        return v[0] if v else NIL
    if isinstance(v, Dotted):
        return v.items[0]
    return NIL


def cdr(v):
    if type(v) is list:
        return v[1:] if v else NIL
    if isinstance(v, Dotted):
        if len(v.items) > 1:
            return Dotted(v.items[1:], v.last)
        return v.last
    return NIL


def cons(head, tail):
    if type(tail) is list:
        return [head] + tail
    if isinstance(tail, Dotted):
        return Dotted([head] + tail.items, tail.last)
    return Dotted([head], tail)


def proper_items(v):
    """The longest proper prefix of `v` as a Python list (empty for atoms)."""
    if type(v) is list:
        return v
    if isinstance(v, Dotted):
        return v.items
    return []


# ------------------------------------------------------------------ reader

_DELIMS = set(" \t\n\r()'\";")
_INT_RE = None  # integers are validated by hand; see _token_to_value


def _line_col(text, pos):
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _err(cls, msg, text, pos):
    line, col = _line_col(text, min(pos, len(text)))
    return cls(msg, pos, line, col)


def _skip_blank(text, pos):
    n = len(text)
    while pos < n:
        c = text[pos]
        if c == ";":
            while pos < n and text[pos] != "\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    return pos


def _read_string(text, pos):
    start = pos
    pos += 1
    out = []
    n = len(text)
    while pos < n:
        c = text[pos]
        if c == '"':
            return "".join(out), pos + 1
        if c == "\\":
            if pos + 1 >= n:
                break
            nxt = text[pos + 1]
            if nxt not in ('"', "\\"):
                raise _err(BadToken, f"unsupported string escape \\{nxt}", text, pos)
            out.append(nxt)
            pos += 2
        else:
            out.append(c)
            pos += 1
    raise _err(IncompleteForm, "unterminated string", text, start)


def _token_to_value(tok, text, pos):
    c = tok[0]
    body = tok[1:] if c in "+-" else tok
    if body and body[0].isdigit():
        if body.isdigit():
            return int(tok)
        # digit-initial non-integers (floats, rationals like 11/2) are
        # rejected rather than read as odd symbols
        raise _err(BadToken, f"malformed number {tok!r}", text, pos)
    return sym(tok)


def _read_at(text, pos, depth):
    pos = _skip_blank(text, pos)
    n = len(text)
    if pos >= n:
        cls = IncompleteForm if depth else UnbalancedParen
        raise _err(cls, "unexpected end of input", text, pos)
    c = text[pos]
    if c == "(":
        return _read_list(text, pos, depth)
    if c == ")":
        raise _err(UnbalancedParen, "unexpected )", text, pos)
    if c == "'":
        quoted, pos = _read_at(text, pos + 1, depth + 1)
        return [QUOTE, quoted], pos
    if c == '"':
        return _read_string(text, pos)
    start = pos
    while pos < n and text[pos] not in _DELIMS:
        pos += 1
    tok = text[start:pos]
    if tok == ".":
        raise _err(BadToken, "misplaced dot", text, start)
    if tok == "#" or tok.startswith("#"):
        raise _err(BadToken, f"unsupported reader syntax {tok!r}", text, start)
    return _token_to_value(tok, text, start), pos


def _read_list(text, pos, depth):
    open_pos = pos
    pos += 1
    items = []
    n = len(text)
    while True:
        pos = _skip_blank(text, pos)
        if pos >= n:
            raise _err(IncompleteForm, "unclosed (", text, open_pos)
        c = text[pos]
        if c == ")":
            return items, pos + 1
        if c == "." and pos + 1 <= n and (pos + 1 == n or text[pos + 1] in _DELIMS):
            if not items:
                raise _err(BadToken, "dot with no preceding element", text, pos)
            last, pos = _read_at(text, pos + 1, depth + 1)
            pos = _skip_blank(text, pos)
            if pos >= n:
                raise _err(IncompleteForm, "unclosed (", text, open_pos)
            if text[pos] != ")":
                raise _err(BadToken, "more than one element after dot", text, pos)
            pos += 1
            if type(last) is list:
                return items + last, pos
            if isinstance(last, Dotted):
                return Dotted(items + last.items, last.last), pos
            return Dotted(items, last), pos
        item, pos = _read_at(text, pos, depth + 1)
        items.append(item)


def read_sexpr(text, pos=0):
    """Read one s-expression from `text` starting at `pos`.

    Returns (value, next_pos).  Comments (; to end of line) and whitespace
    are skipped.  Raises a positioned ReaderError on any malformed input.
    """
    return _read_at(text, pos, 0)


def read_all(text):
    """Read every top-level form in `text`; returns a list of (form, line)."""
    forms = []
    pos = 0
    while True:
        pos = _skip_blank(text, pos)
        if pos >= len(text):
            return forms
        line, _ = _line_col(text, pos)
        form, pos = read_sexpr(text, pos)
        forms.append((form, line))


# ----------------------------------------------------------------- printer

def _escape(s):
    return s.replace("\\", "\\\\").replace('"', '\\"')


def print_sexpr(v):
    """Render `v` in canonical form: upcased symbols, single spaces, no line
    breaks, NIL for the empty list, ' sugar for QUOTE forms.  The result
    reads back to an equal value."""
    out = []
    _print(v, out)
    return "".join(out)


def _print(v, out):
    t = type(v)
    if t is int:
        out.append(str(v))
    elif t is Symbol:
        out.append(v.name)
    elif t is str:
        out.append('"' + _escape(v) + '"')
    elif t is list:
        if not v:
            out.append("NIL")
        elif len(v) == 2 and v[0] is QUOTE:
            out.append("'")
            _print(v[1], out)
        else:
            out.append("(")
            for i, item in enumerate(v):
                if i:
                    out.append(" ")
                _print(item, out)
            out.append(")")
    elif t is Dotted:
        out.append("(")
        for i, item in enumerate(v.items):
            if i:
                out.append(" ")
            _print(item, out)
        out.append(" . ")
        _print(v.last, out)
        out.append(")")
    else:
        raise TypeError(f"not an s-expression value: {v!r}")
