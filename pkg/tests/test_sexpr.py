"""Reader/printer goldens and the round-trip property."""

import pytest
from hypothesis import given, settings, strategies as st

from sloop import Dotted, NIL, Symbol, print_sexpr, read_all, read_sexpr, sym
from sloop.errors import BadToken, IncompleteForm, ReaderError, UnbalancedParen
from sloop.sexpr import car, cdr, cons, proper_items

from util import rd


def test_reads_integer_list():
    assert rd("(1 2 3 4)") == [1, 2, 3, 4]


def test_reads_nil_atom():
    assert rd("NIL") == []
    assert rd("()") == []


def test_quote_sugar():
    assert rd("'(lambda (x) (sq x))") == \
        [sym("QUOTE"), [sym("LAMBDA"), [sym("X")], [sym("SQ"), sym("X")]]]


def test_symbols_upcased_and_interned():
    a = rd("foo")
    b = rd("FOO")
    assert a is b and a.name == "FOO"


def test_reader_skips_comments_and_whitespace():
    assert rd(" ; leading comment\n  ( 1 ;inline\n 2 )") == [1, 2]


def test_negative_and_big_integers():
    assert rd("-12") == -12
    assert rd("123456789012345678901234567890") == 123456789012345678901234567890


def test_plus_and_minus_are_symbols():
    assert rd("+") is sym("+")
    assert rd("-") is sym("-")


def test_reads_strings_with_escapes():
    assert rd('"a\\"b\\\\c"') == 'a"b\\c'


def test_dotted_pair_reads_and_merges():
    assert rd("(1 . 2)") == Dotted([1], 2)
    assert rd("(1 2 . 3)") == Dotted([1, 2], 3)
    # a dotted proper tail merges into a proper list
    assert rd("(1 2 . (3 4))") == [1, 2, 3, 4]
    assert rd("(1 . NIL)") == [1]


def test_read_sexpr_reports_position():
    with pytest.raises(UnbalancedParen) as ei:
        read_sexpr("  )")
    assert ei.value.col == 3


@pytest.mark.parametrize("txt", ["11/2", "1.5", "#'cddr", "(1 . )",
                                 "(. 2)", "(1 . 2 3)", "."])
def test_bad_tokens_rejected(txt):
    with pytest.raises(ReaderError):
        read_sexpr(txt)


def test_incomplete_input_distinguished():
    with pytest.raises(IncompleteForm):
        read_sexpr("(1 2")
    with pytest.raises(IncompleteForm):
        read_sexpr("'")
    with pytest.raises(IncompleteForm):
        read_sexpr('"abc')


def test_read_all_returns_lines():
    forms = read_all("(a)\n\n(b c)\n42")
    assert [line for _, line in forms] == [1, 3, 4]


def test_print_goldens():
    assert print_sexpr([0, 100, 400, 900]) == "(0 100 400 900)"
    assert print_sexpr([]) == "NIL"
    assert print_sexpr(cons(1, 2)) == "(1 . 2)"
    assert print_sexpr(sym("T")) == "T"
    assert print_sexpr([sym("QUOTE"), [1, 2]]) == "'(1 2)"
    assert print_sexpr("a\"b") == '"a\\"b"'


def test_cons_car_cdr_views():
    v = cons(1, cons(2, 3))
    assert car(v) == 1
    assert cdr(v) == Dotted([2], 3)
    assert cdr(cdr(v)) == 3
    assert proper_items(v) == [1, 2]


# ----------------------------------------------------------- round-trip

_symbols = st.sampled_from(
    [sym(n) for n in ("FOO", "BAR-BAZ", "X", "<=", "A1", "T", "LOOP$", ":KW")])
_atoms = st.one_of(
    st.integers(min_value=-10**12, max_value=10**12),
    _symbols,
    st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126),
            max_size=8),
)


def _values(depth):
    if depth == 0:
        return _atoms
    sub = _values(depth - 1)
    return st.one_of(
        _atoms,
        st.lists(sub, max_size=4),
        st.builds(lambda items, last: Dotted(items, last),
                  st.lists(sub, min_size=1, max_size=3),
                  st.one_of(st.integers(min_value=-99, max_value=99),
                            _symbols)),
    )


@settings(max_examples=300, deadline=None)
@given(_values(3))
def test_print_read_round_trip(value):
    text = print_sexpr(value)
    back, pos = read_sexpr(text)
    assert back == value
    assert pos == len(text)


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126),
               max_size=30))
def test_reader_totality(text):
    # every input yields a value or a positioned ReaderError, never a crash
    try:
        read_sexpr(text)
    except ReaderError as e:
        assert e.line is not None and e.col is not None
