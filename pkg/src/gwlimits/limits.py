"""Scaling families n -> (p^(n), gamma_n) and the numeric checks of their limits.

G_n(l) = n gamma_n [g(exp(-l/n)) - exp(-l/n)] is the discrete Laplace
exponent whose convergence to psi drives the scaling limit. Integer part
[x] is floor; the "strictly larger integer" ceiling used for heights is
`strict_ceil`, so strict_ceil(3) == 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from . import mechanism as mech_mod
from .mechanism import BranchingMechanism
from .offspring import OffspringDistribution, conjugate, extinction_prob, gf_iterate

DEFAULT_N_LIST = (100, 1000, 10000)
DEFAULT_DELTAS = (0.25, 0.5, 1.0)
LAMBDA_MAX = 10.0
GRID_SIZE = 256


def integer_part(x: float) -> int:
    return math.floor(x)


def strict_ceil(x: float) -> int:
    """Smallest integer strictly larger than x."""
    return math.floor(x) + 1


@dataclass(frozen=True)
class ScalingFamily:
    generator: Callable[[int], OffspringDistribution]
    gamma: Callable[[int], float]
    target: object
    name: str = "custom"
    descriptor: dict = field(default_factory=dict)

    def offspring(self, n: int) -> OffspringDistribution:
        return self.generator(n)

    def gamma_n(self, n: int) -> float:
        g = float(self.gamma(n))
        if g <= 0:
            raise ValueError("gamma_n must be positive")
        return g


def family_near_critical_binary(drift: float) -> ScalingFamily:
    """p^(n) = {(1 - a/n)/2 at 0, (1 + a/n)/2 at 2}, gamma_n = n, target l^2/2 - a l."""

    @lru_cache(maxsize=None)
    def gen(n: int) -> OffspringDistribution:
        if n < 1 or abs(drift) / n >= 1:
            raise ValueError(f"n = {n} too small for drift {drift}")
        return OffspringDistribution([(1 - drift / n) / 2, 0.0, (1 + drift / n) / 2])

    return ScalingFamily(
        gen,
        float,
        BranchingMechanism(-drift, 0.5),
        name="near_critical_binary",
        descriptor={"family": "near_critical_binary", "drift": drift},
    )


def family_explicit(table: dict, target: BranchingMechanism, gamma_table: Optional[dict] = None) -> ScalingFamily:
    """User-supplied laws keyed by n (gamma_n = n unless a table is given)."""
    laws = {int(n): OffspringDistribution(p) for n, p in table.items()}
    gammas = {int(n): float(g) for n, g in (gamma_table or {}).items()}

    def gen(n: int) -> OffspringDistribution:
        try:
            return laws[n]
        except KeyError:
            raise ValueError(f"no offspring law given for n = {n}") from None

    return ScalingFamily(
        gen,
        lambda n: gammas.get(n, float(n)),
        target,
        name="explicit",
        descriptor={"family": "explicit", "table": {str(k): v.probs.tolist() for k, v in laws.items()}},
    )


def family_from_config(cfg: dict) -> ScalingFamily:
    kind = cfg.get("family")
    if kind == "near_critical_binary":
        return family_near_critical_binary(float(cfg.get("drift", 0.0)))
    if kind == "explicit":
        target = BranchingMechanism.from_json(cfg["target"])
        return family_explicit(cfg["table"], target, cfg.get("gamma"))
    raise ValueError(f"unknown family {kind!r}")


def gf_gap(p: OffspringDistribution, s: np.ndarray | float, log_s: Optional[np.ndarray] = None):
    """g(s) - s, computed as sum_k p_k s expm1((k-1) log s) to avoid cancellation near s = 1."""
    s = np.asarray(s, dtype=float)
    ls = np.log(s) if log_s is None else np.asarray(log_s, dtype=float)
    k = p.support
    terms = p.probs[k][:, None] * np.expm1(np.outer(k - 1.0, np.atleast_1d(ls)))
    out = np.atleast_1d(s) * terms.sum(axis=0)
    return out.reshape(s.shape)


def G_n(fam: ScalingFamily, n: int, lam):
    lam = np.asarray(lam, dtype=float)
    if n < 1:
        raise ValueError("n must be >= 1")
    p = fam.offspring(n)
    out = n * fam.gamma_n(n) * gf_gap(p, np.exp(-lam / n), -lam / n)
    return float(out) if out.ndim == 0 else out


@dataclass
class TrendResult:
    n_list: list
    values: list
    decreasing: bool


def check_A1(
    fam: ScalingFamily,
    mech=None,
    lam_max: float = LAMBDA_MAX,
    grid_size: int = GRID_SIZE,
    n_list: Sequence[int] = DEFAULT_N_LIST,
) -> TrendResult:
    """sup over a lambda grid on [0, lam_max] of |G_n - psi|, per n."""
    if lam_max <= 0:
        raise ValueError("lam_max must be positive")
    mech = fam.target if mech is None else mech
    grid = np.linspace(0.0, lam_max, grid_size)
    target = mech.psi(grid)
    devs = [float(np.max(np.abs(G_n(fam, n, grid) - target))) for n in n_list]
    return TrendResult(list(n_list), devs, all(b < a for a, b in zip(devs, devs[1:])))


def check_A3_laplace(fam: ScalingFamily, mech, n: int, lam: float) -> tuple:
    """(log L_n(lam), psi(lam)) with log L_n = [n g_n] log(1 + exp(lam/n) G_n / (n g_n))."""
    mech = fam.target if mech is None else mech
    scale = n * fam.gamma_n(n)
    arg = math.exp(lam / n) * G_n(fam, n, lam) / scale
    if arg <= -1.0:
        raise ValueError(f"log argument {1 + arg} is not positive at n={n}, lambda={lam}")
    return integer_part(scale) * math.log1p(arg), float(mech.psi(lam))


@dataclass
class Main1Result:
    delta: float
    n_list: list
    steps: list
    values: list
    limit: float
    bounded_below: bool


def check_main1(fam: ScalingFamily, delta: float, n_list: Sequence[int] = DEFAULT_N_LIST, x: float = 1.0) -> Main1Result:
    """g_{[delta gamma_n]}(0)^[nx] per n, against P(extinction by delta) of the target."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    steps, values = [], []
    for n in n_list:
        k = integer_part(delta * fam.gamma_n(n))
        if k < 1:
            raise ValueError(f"[delta gamma_n] = 0 at n = {n}; choose larger delta or n")
        steps.append(k)
        values.append(float(gf_iterate(fam.offspring(n), k, 0.0)) ** integer_part(n * x))
    limit = mech_mod.extinction_cdf(fam.target, x, delta)
    return Main1Result(delta, list(n_list), steps, values, float(limit), min(values) > 0)


def conjugate_family(fam: ScalingFamily) -> ScalingFamily:
    """Family of conjugate laws q^(n) with the same gamma_n and target psi_gamma."""
    gamma = mech_mod.largest_root(fam.target)

    @lru_cache(maxsize=None)
    def gen(n: int) -> OffspringDistribution:
        return conjugate(fam.offspring(n))

    target = fam.target if gamma == 0 else mech_mod.shift(fam.target, gamma)
    return ScalingFamily(gen, fam.gamma, target, name=f"conjugate({fam.name})", descriptor=dict(fam.descriptor, conjugate=True))


@dataclass
class SurvivalMassResult:
    x: float
    n_list: list
    values: list
    target: float
    deviations: list
    decreasing: bool


def survival_mass_limit(fam: ScalingFamily, x: float, n_list: Sequence[int] = DEFAULT_N_LIST) -> SurvivalMassResult:
    """f(p^(n))^[nx] per n, against exp(-gamma x)."""
    if x <= 0:
        raise ValueError("x must be positive")
    gamma = mech_mod.largest_root(fam.target)
    target = math.exp(-gamma * x)
    values = [extinction_prob(fam.offspring(n)) ** integer_part(n * x) for n in n_list]
    devs = [abs(v - target) for v in values]
    return SurvivalMassResult(x, list(n_list), values, target, devs, all(b < a for a, b in zip(devs, devs[1:])))
