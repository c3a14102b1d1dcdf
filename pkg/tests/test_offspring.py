import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from gwlimits.offspring import (
    OffspringDistribution,
    conjugate,
    extinction_prob,
    generation_size_distribution,
    gf_eval,
    gf_iterate,
    gf_orbit,
    mean,
)

laws = st.lists(st.floats(0.0, 1.0), min_size=2, max_size=6).filter(lambda w: sum(w) > 0.1).map(
    lambda w: np.asarray(w) / np.sum(w)
).filter(lambda p: p[1] < 0.99)


def test_validation():
    with pytest.raises(ValueError):
        OffspringDistribution([0.5, 0.6])
    with pytest.raises(ValueError):
        OffspringDistribution([-0.1, 1.1])
    with pytest.raises(ValueError):
        OffspringDistribution([0.0, 1.0])
    assert OffspringDistribution([0.5, 0.5, 0.0, 0.0]).max_children == 1


def test_json_round_trip(binary):
    assert OffspringDistribution.from_json(binary.to_json()) == binary


def test_from_scipy_poisson():
    p = OffspringDistribution.from_scipy(stats.poisson(1.5))
    assert mean(p) == pytest.approx(1.5, abs=1e-12)


def test_gf_values(binary):
    assert gf_eval(binary, 0.0) == 0.25
    assert gf_eval(binary, 1.0) == 1.0
    assert gf_eval(binary, 0.5) == pytest.approx(0.25 + 0.75 / 4)
    assert gf_iterate(binary, 0, 0.3) == 0.3
    assert gf_iterate(binary, 2, 0.0) == pytest.approx(gf_eval(binary, 0.25))
    orbit = gf_orbit(binary, 5)
    assert orbit[3] == pytest.approx(gf_iterate(binary, 3, 0.0), abs=1e-15)
    assert np.all(np.diff(orbit) > 0)


def test_extinction_binary_closed_form():
    for p2 in (0.55, 0.6, 0.75, 0.9):
        assert extinction_prob(OffspringDistribution([1 - p2, 0, p2])) == pytest.approx((1 - p2) / p2, abs=1e-13)


def test_extinction_near_critical():
    n = 10_000
    p = OffspringDistribution([(1 - 1 / n) / 2, 0, (1 + 1 / n) / 2])
    assert extinction_prob(p) == pytest.approx((n - 1) / (n + 1), abs=1e-12)


def test_extinction_special_cases():
    assert extinction_prob(OffspringDistribution([0.5, 0.5])) == 1.0
    assert extinction_prob(OffspringDistribution([0.5, 0, 0.5])) == 1.0
    assert extinction_prob(OffspringDistribution([0.0, 0.5, 0.5])) == 0.0


@settings(max_examples=60, deadline=None)
@given(laws)
def test_extinction_is_minimal_fixed_point(probs):
    p = OffspringDistribution(probs)
    f = extinction_prob(p)
    assert 0.0 <= f <= 1.0
    assert abs(gf_eval(p, f) - f) <= 1e-10
    if mean(p) > 1 + 1e-9:
        assert f < 1.0
        # no fixed point below f: g(s) > s on [0, f)
        s = np.linspace(0, f, 50)[:-1]
        assert np.all(gf_eval(p, s) - s > -1e-12)


def test_conjugate_example(binary):
    q = conjugate(binary)
    assert np.allclose(q.probs, [0.75, 0.0, 0.25], atol=1e-14)
    assert mean(q) < 1


def test_conjugate_of_critical_is_identity():
    p = OffspringDistribution([0.5, 0, 0.5])
    assert conjugate(p) == p


def test_conjugate_needs_p0():
    with pytest.raises(ValueError):
        conjugate(OffspringDistribution([0.0, 0.5, 0.5]))


@settings(max_examples=60, deadline=None)
@given(laws)
def test_conjugate_is_subcritical_law(probs):
    p = OffspringDistribution(probs)
    if p.probs[0] == 0:
        return
    q = conjugate(p)
    assert q.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert mean(q) <= 1 + 1e-9
    f = extinction_prob(p)
    k = np.arange(q.probs.size)
    assert np.allclose(q.probs[1:], f ** (k[1:] - 1) * p.probs[1:q.probs.size], atol=1e-12)


def test_generation_law_small_n(binary):
    m0, o0 = generation_size_distribution(binary, 0, 16)
    assert m0[1] == 1.0 and o0 == 0.0
    m1, _ = generation_size_distribution(binary, 1, 16)
    assert np.allclose(m1[:3], [0.25, 0, 0.75])
    m2, _ = generation_size_distribution(binary, 2, 16)
    # Y_2 = sum of two independent copies when Y_1 = 2
    expected = np.zeros(5)
    expected[0] = 0.25 + 0.75 * 0.25**2
    expected[2] = 0.75 * 2 * 0.25 * 0.75
    expected[4] = 0.75 * 0.75**2
    assert np.allclose(m2[:5], expected, atol=1e-15)


def test_generation_law_mass_conservation(binary):
    masses, overflow = generation_size_distribution(binary, 8, 64)
    assert masses.sum() + overflow == pytest.approx(1.0, abs=1e-13)
    assert overflow > 0


def test_generation_law_matches_gf(binary):
    masses, overflow = generation_size_distribution(conjugate(binary), 6, 4096)
    assert overflow < 1e-15
    s = 0.7
    assert np.polynomial.polynomial.polyval(s, masses) == pytest.approx(gf_iterate(conjugate(binary), 6, s), abs=1e-13)


def test_tilted_martingale_one_step(binary):
    q = conjugate(binary)
    masses, overflow = generation_size_distribution(q, 1, 64, tilt=3.0)
    assert masses.sum() == pytest.approx(3.0, abs=1e-14)
    assert overflow == 0.0
    # E[3^Y_1] = (3/4) 1 + (1/4) 9
    assert 0.75 + 0.25 * 9 == 3.0
    assert math.isclose(masses.sum(), 0.75 + 0.25 * 9)


def test_conjugate_with_denormal_p0():
    p = OffspringDistribution(np.array([5e-324, 1.0, 0.5]) / 1.5)
    q = conjugate(p)
    assert q.probs[1] == pytest.approx(2 / 3) and mean(q) < 1
