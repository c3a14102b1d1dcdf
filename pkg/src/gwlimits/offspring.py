"""Offspring laws on {0, 1, ..., K} and their generating-function numerics.

Everything here is exact up to floating point: generating functions are
polynomials, the extinction probability is the minimal fixed point of the
generating function, and the law of the generation sizes is obtained by
compounding the offspring law generation after generation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

MAX_CHILDREN = 2**16
SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OffspringDistribution:
    """Probability vector indexed by the number of children k = 0..K."""

    probs: np.ndarray
    cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).ravel()
        if probs.size == 0:
            raise ValueError("empty offspring law")
        if np.any(~np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("offspring probabilities must be finite and nonnegative")
        if abs(probs.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"offspring probabilities sum to {probs.sum()!r}, not 1")
        last = np.flatnonzero(probs)[-1]
        probs = probs[: last + 1].copy()
        if probs.size - 1 > MAX_CHILDREN:
            raise ValueError(f"support exceeds {MAX_CHILDREN} children")
        if probs.size > 1 and probs[1] >= 1.0:
            raise ValueError("degenerate law p_1 = 1 is excluded")
        probs.setflags(write=False)
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
        cdf.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "cdf", cdf)

    @classmethod
    def from_scipy(cls, dist, tail_mass: float = 1e-14) -> "OffspringDistribution":
        """Truncate an infinite-support frozen scipy law where its tail drops below `tail_mass`."""
        kmax = int(dist.isf(tail_mass))
        while dist.sf(kmax) >= tail_mass:
            kmax += 1
        if kmax > MAX_CHILDREN:
            raise ValueError("tail truncation needs more than MAX_CHILDREN states")
        probs = dist.pmf(np.arange(kmax + 1))
        return cls(probs / probs.sum())

    @classmethod
    def from_json(cls, text: str) -> "OffspringDistribution":
        return cls(json.loads(text))

    def to_json(self) -> str:
        return json.dumps([float(v) for v in self.probs])

    @property
    def max_children(self) -> int:
        return self.probs.size - 1

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs)

    def __eq__(self, other):
        if not isinstance(other, OffspringDistribution):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())

    def __repr__(self):
        return f"OffspringDistribution({[float(v) for v in self.probs]})"


def _check_unit(s):
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("generating function argument must lie in [0, 1]")
    return arr


def gf_eval(p: OffspringDistribution, s):
    """g(s) = sum_k p_k s^k for s in [0, 1] (scalar or array)."""
    s = _check_unit(s)
    out = np.polynomial.polynomial.polyval(s, p.probs)
    return float(out) if out.ndim == 0 else out


def gf_iterate(p: OffspringDistribution, k: int, s):
    """k-fold composition g_k(s); g_0 is the identity."""
    if k < 0:
        raise ValueError("iteration count must be nonnegative")
    s = _check_unit(s)
    for _ in range(k):
        s = np.polynomial.polynomial.polyval(s, p.probs)
    return float(s) if np.ndim(s) == 0 else s


def gf_orbit(p: OffspringDistribution, kmax: int, s: float = 0.0) -> np.ndarray:
    """Array (g_0(s), g_1(s), ..., g_kmax(s))."""
    out = np.empty(kmax + 1)
    out[0] = float(_check_unit(s))
    for k in range(kmax):
        out[k + 1] = np.polynomial.polynomial.polyval(out[k], p.probs)
    return out


def mean(p: OffspringDistribution) -> float:
    return float(np.dot(np.arange(p.probs.size), p.probs))


def extinction_prob(p: OffspringDistribution, tol: float = 1e-14, warmup: int = 64) -> float:
    """Minimal root of g(s) = s on [0, 1].

    A short monotone iteration from 0 gives a point below the root, then
    bisection on [s, 1) pins it down. The sign of g(s) - s is positive left of
    the minimal root and negative between it and 1 in the supercritical case,
    so the bisection never needs a derivative.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    probs = p.probs
    if probs[0] == 0.0:
        return 0.0
    if mean(p) <= 1.0:
        return 1.0

    def h(s):
        return np.polynomial.polynomial.polyval(s, probs) - s

    lo = 0.0
    for _ in range(warmup):
        nxt = float(np.polynomial.polynomial.polyval(lo, probs))
        if nxt <= lo:
            break
        lo = nxt
    hi = 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        val = h(mid)
        if val > 0:
            lo = mid
        elif val < 0:
            hi = mid
        else:
            lo = hi = mid
            break
    root = lo if abs(h(lo)) <= abs(h(hi)) or hi == 1.0 else hi
    if abs(h(root)) > tol:
        raise ArithmeticError(
            f"extinction probability did not converge: |g(f) - f| = {abs(h(root)):.3e}"
        )
    return float(root)


def conjugate(p: OffspringDistribution, tol: float = 1e-14) -> OffspringDistribution:
    """The law q_k = f^(k-1) p_k (k >= 1), q_0 = 1 - sum_{k>=1} q_k."""
    f = extinction_prob(p, tol)
    if f == 0.0:
        raise ValueError("conjugate undefined: p_0 = 0 so the extinction probability is 0")
    if f == 1.0:
        return p
    k = np.arange(1, p.probs.size)
    q = np.empty(p.probs.size)
    q[1:] = p.probs[1:] * f ** (k - 1.0)
    q[0] = 1.0 - q[1:].sum()
    # q_0 f - p_0 = f - g(f): the fixed-point residual, meaningful even when f is tiny
    if abs(q[0] * f - p.probs[0]) > 1e-12:
        raise ArithmeticError("conjugate q_0 disagrees with p_0 / f")
    out = OffspringDistribution(q)
    if mean(out) >= 1.0:
        raise ArithmeticError("conjugate law is not subcritical")
    return out


def _tilted_kernel(p: OffspringDistribution, tilt: float):
    """Normalised kernel r_k proportional to p_k tilt^k, and log of its mass sum_k p_k tilt^k."""
    if tilt == 1.0:
        return p.probs, 0.0
    k = np.arange(p.probs.size)
    with np.errstate(divide="ignore"):
        logw = np.log(p.probs) + k * np.log(tilt)
    log_mass = float(logsumexp(logw))
    return np.exp(logw - log_mass), log_mass


def generation_size_laws(p: OffspringDistribution, n_max: int, cap: int, tilt: float = 1.0):
    """Yield (n, masses, overflow) for n = 0..n_max.

    masses[j] = E[tilt^Y_n ; Y_n = j, Y_m <= cap for all m <= n] for j = 0..cap, and
    overflow = E[tilt^Y_tau ; tau <= n] where tau is the first generation whose
    size exceeds `cap`. With tilt = 1 these are plain probabilities and
    masses.sum() + overflow = 1.

    A tilt other than 1 is carried in normalised form (kernel r proportional to
    p_k tilt^k, times a per-individual factor) so large tilts never overflow.
    """
    if n_max < 0 or cap < 1:
        raise ValueError("need n_max >= 0 and cap >= 1")
    if tilt <= 0:
        raise ValueError("tilt must be positive")
    kernel, log_mass = _tilted_kernel(p, tilt)
    log_factor = log_mass - np.log(tilt)

    dist = np.zeros(cap + 1)
    dist[1] = tilt
    overflow = 0.0
    yield 0, dist.copy(), overflow
    for n in range(1, n_max + 1):
        live = np.flatnonzero(dist)
        out = np.zeros(cap + 1)
        escaped = 0.0
        row = np.ones(1)
        row_escape = 0.0
        top = int(live[-1]) if live.size else -1
        for j in range(top + 1):
            if j > 0:
                full = np.convolve(row, kernel)
                row = full[: cap + 1]
                row_escape += full[cap + 1 :].sum()
            w = dist[j]
            if w == 0.0:
                continue
            w = w * np.exp(j * log_factor) if log_factor != 0.0 else w
            out[: row.size] += w * row
            escaped += w * row_escape
        dist = out
        overflow += escaped
        yield n, dist.copy(), overflow


def generation_size_distribution(p: OffspringDistribution, n: int, cap: int, tilt: float = 1.0):
    """Law of Y_n (single ancestor) on {0..cap} plus the mass that escaped past `cap`."""
    for k, masses, overflow in generation_size_laws(p, n, cap, tilt):
        if k == n:
            return masses, overflow
    raise AssertionError("unreachable")
