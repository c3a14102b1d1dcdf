import math

import numpy as np
import pytest

from gwlimits import limits
from gwlimits.mechanism import BranchingMechanism, u_quadratic
from gwlimits.offspring import extinction_prob, gf_eval, gf_iterate

CRIT = limits.family_near_critical_binary(0.0)
DRIFT = limits.family_near_critical_binary(1.0)


def test_integer_parts():
    assert limits.integer_part(2.7) == 2
    assert limits.strict_ceil(3) == 4
    assert limits.strict_ceil(3.2) == 4


def test_family_laws():
    p = DRIFT.offspring(100)
    assert np.allclose(p.probs, [0.495, 0.0, 0.505])
    assert DRIFT.gamma_n(100) == 100.0
    assert extinction_prob(DRIFT.offspring(1000)) == pytest.approx(999 / 1001, abs=1e-13)
    with pytest.raises(ValueError):
        DRIFT.offspring(1)


def test_family_from_config():
    fam = limits.family_from_config({"family": "near_critical_binary", "drift": 0.5})
    assert fam.target == BranchingMechanism(-0.5, 0.5)
    explicit = limits.family_from_config(
        {"family": "explicit", "table": {"10": [0.45, 0, 0.55]}, "target": {"alpha": -1, "beta": 0.5}}
    )
    assert explicit.offspring(10).probs[2] == 0.55
    with pytest.raises(ValueError):
        explicit.offspring(11)
    with pytest.raises(ValueError):
        limits.family_from_config({"family": "nope"})


def test_G_n_values():
    assert limits.G_n(CRIT, 100, 1.0) == pytest.approx(0.4950290, abs=5e-8)
    assert limits.G_n(CRIT, 100, 0.0) == 0.0
    lam = np.linspace(0, 10, 5)
    naive = 100 * 100 * (gf_eval(DRIFT.offspring(100), np.exp(-lam / 100)) - np.exp(-lam / 100))
    assert np.allclose(limits.G_n(DRIFT, 100, lam), naive, atol=1e-9)


def test_check_A1_trend():
    for fam in (CRIT, DRIFT):
        res = limits.check_A1(fam)
        assert len(res.values) == 3 and res.decreasing
        # the gap shrinks like 1/n
        assert res.values[1] / res.values[2] == pytest.approx(10.0, rel=0.02)
    with pytest.raises(ValueError):
        limits.check_A1(CRIT, lam_max=0.0)


def test_check_A3():
    value, target = limits.check_A3_laplace(CRIT, None, 10_000, 1.0)
    assert target == 0.5 and abs(value - target) < 1e-6
    value, target = limits.check_A3_laplace(DRIFT, None, 10_000, 4.0)
    assert target == 4.0 and abs(value - target) < 1e-4


def test_check_main1():
    res = limits.check_main1(DRIFT, 1.0, (100, 1000, 10000))
    assert res.limit == pytest.approx(math.exp(-2 / (1 - math.exp(-1))), rel=1e-10)
    errs = [abs(v - res.limit) for v in res.values]
    assert errs[2] < errs[1] < errs[0]
    assert res.bounded_below
    with pytest.raises(ValueError):
        limits.check_main1(DRIFT, 0.0)
    with pytest.raises(ValueError):
        limits.check_main1(DRIFT, 0.001, (100,))


def test_survival_mass():
    res = limits.survival_mass_limit(CRIT, 1.0)
    assert res.values == [1.0, 1.0, 1.0] and res.target == 1.0
    res = limits.survival_mass_limit(DRIFT, 1.0)
    assert res.decreasing and res.deviations[1] < 1e-3
    res2 = limits.survival_mass_limit(DRIFT, 2.0, (1000,))
    assert res2.values[0] == pytest.approx(res.values[1] ** 2, rel=1e-12)
    assert res2.target == pytest.approx(math.exp(-4))


@pytest.mark.parametrize("n", [100, 1000, 10000])
def test_conjugate_iterates_dominate(n):
    p = DRIFT.offspring(n)
    q = limits.conjugate_family(DRIFT).offspring(n)
    f = extinction_prob(p)
    for k in (1, 10, n // 2, n):
        gp, gq = gf_iterate(p, k, 0.0), gf_iterate(q, k, 0.0)
        # the per-generation identity is exact to rounding; the n-th power
        # only amplifies float error by a factor n
        assert abs(gq * f / gp - 1) <= 1e-12
        assert gq**n == pytest.approx(gp**n / f**n, rel=n * 1e-12)
        assert gq**n >= gp**n


def test_conjugate_exponent_identity():
    fam = limits.conjugate_family(DRIFT)
    for n in (100, 1000):
        p = DRIFT.offspring(n)
        f = extinction_prob(p)
        for lam in (0.1, 1.0, 5.0, 10.0):
            s = math.exp(-lam / n)
            rhs = n * n * (gf_eval(p, s * f) - s * f) / f
            assert abs(limits.G_n(fam, n, lam) - rhs) <= 1e-12 * max(1.0, abs(rhs)) * n


def test_conjugate_family_converges_to_shifted_mechanism():
    fam = limits.conjugate_family(DRIFT)
    assert fam.offspring(10).probs[0] == pytest.approx(0.55)
    res = limits.check_A1(fam)
    assert res.decreasing and res.values[-1] < 0.1
    lam = 1.5
    assert fam.target.psi(lam) == pytest.approx(lam**2 / 2 + lam)
    assert u_quadratic(1.0, 0.5, 1.0, lam) > 0
