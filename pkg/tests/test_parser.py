import pytest

from stverify.errors import ParseError
from stverify.formula import (Always, And, AtomicCompare, AtomicLabel,
                              Escape, Eventually, Implies, Not, Or, Reach,
                              Somewhere)
from stverify.parser import parse, parse_script


def test_parse_atom():
    assert parse("y > 500") == AtomicCompare("greater", 500.0)
    assert parse("y < 3.5") == AtomicCompare("less", 3.5)
    assert parse("y > -2e3") == AtomicCompare("greater", -2000.0)
    assert parse("label(hospital)") == AtomicLabel("hospital")


def test_parse_recovery_property_shape():
    phi = parse("(y > 500) -> F[1,3] !(y > 500)")
    atom = AtomicCompare("greater", 500.0)
    assert phi == Implies(atom, Eventually(1, 3, Not(atom)))


def test_parse_somewhere():
    phi = parse("somewhere[1] !(y>500)")
    assert phi == Somewhere(1, Not(AtomicCompare("greater", 500.0)))


def test_parse_escape_interval():
    phi = parse("escape[1,2] (y < 10)")
    assert phi == Escape(1, 2, AtomicCompare("less", 10.0))


def test_parse_reach_infix():
    phi = parse("!(y > 5) reach[2] label(hospital)")
    assert phi == Reach(Not(AtomicCompare("greater", 5.0)), 2,
                        AtomicLabel("hospital"))


def test_precedence_and_binds_tighter_than_or_than_implies():
    a = AtomicCompare("greater", 1.0)
    b = AtomicCompare("greater", 2.0)
    c = AtomicCompare("greater", 3.0)
    assert parse("y>1 & y>2 | y>3") == Or(And(a, b), c)
    assert parse("y>1 | y>2 -> y>3") == Implies(Or(a, b), c)
    # implication is right-associative
    assert parse("y>1 -> y>2 -> y>3") == Implies(a, Implies(b, c))


def test_precedence_temporal_over_conjunction():
    a = AtomicCompare("greater", 1.0)
    b = AtomicCompare("greater", 2.0)
    assert parse("F[0,2] y>1 & y>2") == And(Eventually(0, 2, a), b)
    assert parse("G[1,1] y>1 | y>2") == Or(Always(1, 1, a), b)


def test_precedence_spatial_under_temporal():
    a = AtomicCompare("greater", 1.0)
    b = AtomicCompare("greater", 2.0)
    assert parse("F[0,1] y>1 reach[2] y>2") == \
        Eventually(0, 1, Reach(a, 2, b))


def test_parentheses_override():
    a = AtomicCompare("greater", 1.0)
    b = AtomicCompare("greater", 2.0)
    c = AtomicCompare("greater", 3.0)
    assert parse("y>1 & (y>2 | y>3)") == And(a, Or(b, c))


def test_unary_binds_tightest():
    a = AtomicCompare("greater", 1.0)
    b = AtomicCompare("greater", 2.0)
    assert parse("!y>1 & y>2") == And(Not(a), b)
    assert parse("somewhere[1] y>1 reach[1] y>2") == \
        Reach(Somewhere(1, a), 1, b)


def test_syntax_error_reports_position():
    with pytest.raises(ParseError) as err:
        parse("y > 500 &")
    assert "line 1" in str(err.value)
    with pytest.raises(ParseError) as err:
        parse("(y > 500")
    assert "expected" in str(err.value)
    with pytest.raises(ParseError):
        parse("")
    with pytest.raises(ParseError):
        parse("y @ 500")


def test_malformed_interval():
    with pytest.raises(ParseError) as err:
        parse("F[3,1] y > 0")
    assert "interval" in str(err.value)
    with pytest.raises(ParseError):
        parse("F[1.5,2] y > 0")
    with pytest.raises(ParseError):
        parse("F[-1,2] y > 0")


def test_unknown_label_with_registry():
    with pytest.raises(ParseError) as err:
        parse("label(school)", known_labels={"hospital"})
    assert "school" in str(err.value)
    assert parse("label(hospital)", known_labels={"hospital"}) == \
        AtomicLabel("hospital")


def test_parse_script():
    text = """
    # crowdedness requirements
    recover := (y > 500) -> F[1,3] !(y > 500)   # P.1
    local := F[1,1] ((y > 500) -> somewhere[1] !(y > 500))
    """
    props = parse_script(text)
    assert list(props) == ["recover", "local"]
    assert props["recover"] == parse("(y > 500) -> F[1,3] !(y > 500)")


def test_parse_script_errors():
    with pytest.raises(ParseError):
        parse_script("just a line without define")
    with pytest.raises(ParseError):
        parse_script("a := y > 1\na := y > 2")
