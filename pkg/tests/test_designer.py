import math

import numpy as np
import pytest

from cpgates import catalog
from cpgates.designer import (ConditionSet, DesignProblem, canonical, dedupe_solutions, design_residual,
                              design_symmetric, levenberg_marquardt, palindrome, rank_solutions, refine,
                              same_solution, to_sequence)
from cpgates.jets import derivative_norms
from cpgates.su2 import InvalidArgument

FIRST = ConditionSet(((1, 0), (0, 1), (1, 1)))


def half_of(name):
    s = catalog.get_sequence(name)
    return s.phases[: (len(s) + 1) // 2]


def test_condition_set_validation():
    c = ConditionSet(((1, 1), (0, 1), (1, 0)))
    assert c.orders == ((0, 1), (1, 0), (1, 1))
    assert c.max_order == 2
    for bad in (((0, 0),), ((1, 0), (1, 0)), ((-1, 2),)):
        with pytest.raises(InvalidArgument):
            ConditionSet(bad)


def test_problem_validation():
    assert DesignProblem(5, FIRST).center_constraint
    assert not DesignProblem(7, FIRST).center_constraint
    with pytest.raises(InvalidArgument):
        DesignProblem(4, FIRST)
    with pytest.raises(InvalidArgument):
        DesignProblem(7, FIRST, center_constraint=True)


def test_palindrome():
    assert np.array_equal(palindrome([1, 2, 3]), [1, 2, 3, 2, 1])
    assert to_sequence([0.1, 0.2]).symmetric


@pytest.mark.parametrize("name,orders", [("X5a", FIRST.orders), ("X5b", FIRST.orders),
                                         ("X9a", catalog.SECOND_ORDER), ("X7b", catalog.get("X7b").claimed_orders)])
def test_residual_vanishes_on_catalog_solutions(name, orders):
    half = half_of(name)
    prob = DesignProblem(2 * half.size - 1, ConditionSet(orders), center_constraint=False)
    assert np.abs(design_residual(half, prob)).max() < 1e-9


def test_residual_layout_and_errors():
    prob = DesignProblem(5, FIRST)
    r = design_residual(half_of("X5a") + 0.1, prob)
    # 2 gate entries + 4 entries per condition, real and imaginary parts
    assert r.shape == (2 * (2 + 4 * 3),)
    assert np.abs(r).max() > 1e-3
    with pytest.raises(InvalidArgument):
        design_residual([0.1, 0.2], prob)


def test_levenberg_marquardt_converges_from_nearby_start():
    prob = DesignProblem(5, FIRST)
    x0 = half_of("X5a")[:2][None, :] + 0.05
    x, res = levenberg_marquardt(x0, prob)
    assert res[0] < 1e-9


def test_dedupe_merges_mirrors_and_keeps_pi_offsets():
    a = np.array([2 / 3, -1 / 6, 1 / 3]) * math.pi
    b = a + np.array([0, math.pi, 0])
    sols = dedupe_solutions([a, -a, a + 1e-7, b])
    assert len(sols) == 2
    assert same_solution(a, -a) and not same_solution(a, b)
    assert np.allclose(canonical(a), canonical(-a))


def test_five_pulse_design_recovers_both_patterns():
    sols = design_symmetric(DesignProblem(5, FIRST), starts=256, seed=0)
    assert len(sols) == 2
    for name in ("X5a", "X5b"):
        assert any(same_solution(s, half_of(name), 1e-6) for s in sols)


def test_design_is_deterministic_per_seed():
    prob = DesignProblem(5, FIRST)
    a = design_symmetric(prob, starts=32, seed=4)
    b = design_symmetric(prob, starts=32, seed=4)
    assert len(a) == len(b) and all(np.array_equal(u, v) for u, v in zip(a, b))


def test_three_pulse_detuning_design_gives_b3d():
    sols = design_symmetric(DesignProblem(3, ConditionSet(((0, 1),))), starts=64, seed=1)
    assert any(same_solution(s, half_of("B3d"), 1e-6) for s in sols)


def test_seven_pulse_second_order_design_finds_x7a():
    prob = DesignProblem(7, ConditionSet(FIRST.orders + ((2, 0),)))
    sols = design_symmetric(prob, starts=128, seed=0)
    assert any(same_solution(s, half_of("X7a"), 1e-6) for s in sols)
    for s in sols:
        assert max(derivative_norms(to_sequence(s), prob.conditions.orders).values()) < 1e-8


def test_rank_orders_by_robust_fraction():
    a, b = half_of("X5a"), half_of("X5b")
    ranked = rank_solutions([b, a], resolution=41)
    assert len(ranked) == 2
    from cpgates.landscape import eval_grid, robust_fraction
    from cpgates.su2 import target_gate

    box = ((-0.3, 0.3), (-0.3, 0.3))
    f = [robust_fraction(eval_grid(to_sequence(h), target_gate("X"), box, (41, 41)), 1e-4) for h in ranked]
    assert f[0] >= f[1]


def test_refine_polishes_rounded_phases():
    rec = catalog.get("X13a")
    half = half_of("X13a")
    before = max(derivative_norms(rec.sequence, rec.claimed_orders).values())
    ref, res = refine(half, rec.claimed_orders)
    after = max(derivative_norms(to_sequence(ref), rec.claimed_orders).values())
    assert before > 1e-5 and after < 1e-9 and res < 1e-12
