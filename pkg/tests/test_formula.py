import numpy as np
import pytest

from helpers import random_formula
from stverify.formula import (Always, And, AtomicCompare, AtomicLabel,
                              Escape, Eventually, Implies, Not, Or, Reach,
                              Somewhere, expand_derived, temporal_depth,
                              to_text, true_formula)
from stverify.parser import parse


def test_node_invariants():
    with pytest.raises(ValueError):
        AtomicCompare("greater", float("inf"))
    with pytest.raises(ValueError):
        AtomicCompare("between", 1.0)
    with pytest.raises(ValueError):
        Eventually(3, 1, AtomicLabel("a"))
    with pytest.raises(ValueError):
        Always(-1, 2, AtomicLabel("a"))
    with pytest.raises(ValueError):
        Reach(AtomicLabel("a"), -1, AtomicLabel("b"))
    with pytest.raises(ValueError):
        Escape(2, 1, AtomicLabel("a"))


def test_structural_equality():
    a = Implies(AtomicCompare("greater", 1.0),
                Eventually(1, 3, Not(AtomicCompare("greater", 1.0))))
    b = Implies(AtomicCompare("greater", 1.0),
                Eventually(1, 3, Not(AtomicCompare("greater", 1.0))))
    assert a == b
    assert a != Implies(AtomicCompare("greater", 2.0), b.right)


def test_temporal_depth():
    atom = AtomicCompare("greater", 0.0)
    assert temporal_depth(atom) == 0
    assert temporal_depth(Eventually(1, 3, atom)) == 3
    assert temporal_depth(Always(0, 2, Eventually(1, 4, atom))) == 6
    assert temporal_depth(And(Eventually(0, 5, atom),
                              Always(1, 2, atom))) == 5
    assert temporal_depth(Somewhere(3, Eventually(2, 2, atom))) == 2


def test_expand_somewhere_to_reach():
    psi = Not(AtomicCompare("greater", 500.0))
    out = expand_derived(Somewhere(1, psi))
    assert out == Reach(true_formula(), 1, psi)


def test_expand_implies_and_or():
    a, b = AtomicLabel("a"), AtomicLabel("b")
    # Implies(a, b) -> Or(Not a, b), then Or -> negated conjunction
    assert expand_derived(Implies(a, b)) == Not(And(a, Not(b)))
    assert expand_derived(Or(a, b)) == Not(And(Not(a), Not(b)))
    # pre-existing double negations are core and stay untouched
    assert expand_derived(Not(Not(a))) == Not(Not(a))


def test_expand_core_formula_unchanged():
    phi = And(Not(AtomicCompare("less", 2.0)),
              Eventually(0, 2, Reach(AtomicLabel("a"), 1, AtomicLabel("b"))))
    assert expand_derived(phi) == phi


def test_expand_is_idempotent():
    rng = np.random.default_rng(12)
    for _ in range(100):
        phi = random_formula(rng, depth=4, horizon=5, labels=("hospital",))
        once = expand_derived(phi)
        assert expand_derived(once) == once


def _core_only(phi):
    if isinstance(phi, (AtomicCompare, AtomicLabel)):
        return True
    if isinstance(phi, Not):
        return _core_only(phi.child)
    if isinstance(phi, And):
        return _core_only(phi.left) and _core_only(phi.right)
    if isinstance(phi, (Eventually, Always)):
        return _core_only(phi.child)
    if isinstance(phi, Reach):
        return _core_only(phi.via) and _core_only(phi.target)
    if isinstance(phi, Escape):
        return _core_only(phi.child)
    return False


def test_expand_output_is_core_grammar():
    rng = np.random.default_rng(99)
    for _ in range(100):
        phi = random_formula(rng, depth=4, horizon=4, labels=("h",))
        assert _core_only(expand_derived(phi))


def test_to_text_round_trips_random_formulas():
    rng = np.random.default_rng(2024)
    for _ in range(300):
        phi = random_formula(rng, depth=6, horizon=8, labels=("hospital",),
                             value_scale=100.0)
        assert parse(to_text(phi)) == phi
