"""Contour paths: the Euler-tour height profile of trees and forests.

A path is a sorted list of knots (time, value) joined by straight segments,
with value 0 after the last knot. Knots are kept in raw lattice units; the
`time_scale` and `space_scale` metadata turn raw coordinates into scaled
ones (scaled time = raw time / time_scale, scaled value = raw / space_scale).
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gwtree import Forest, OrderedTree


@dataclass(frozen=True, eq=False)
class ContourPath:
    times: np.ndarray
    values: np.ndarray
    time_scale: float = 1.0
    space_scale: float = 1.0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).ravel().copy()
        v = np.asarray(self.values, dtype=float).ravel().copy()
        if t.size == 0 or t.size != v.size:
            raise ValueError("times and values must be nonempty and of equal length")
        if t[0] != 0.0 or v[0] != 0.0:
            raise ValueError("a contour path starts at (0, 0)")
        if v[-1] != 0.0:
            raise ValueError("a contour path ends at 0")
        if np.any(np.diff(t) < 0) or np.any(v < 0):
            raise ValueError("knot times must be sorted and values nonnegative")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def active_duration(self) -> float:
        """Scaled length of the encoded interval; the path is 0 afterwards."""
        return float(self.times[-1]) / self.time_scale

    def knots(self) -> np.ndarray:
        """Knots in scaled coordinates, shape (m, 2)."""
        return np.column_stack([self.times / self.time_scale, self.values / self.space_scale])

    def same_knots(self, other: "ContourPath", atol: float = 1e-12) -> bool:
        a, b = self.knots(), other.knots()
        return a.shape == b.shape and bool(np.allclose(a, b, rtol=0, atol=atol))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("time,value\n")
        for t, v in self.knots().tolist():
            buf.write(f"{t!r},{v!r}\n")
        return buf.getvalue()


def _dedupe(times: np.ndarray, values: np.ndarray):
    keep = np.ones(times.size, dtype=bool)
    keep[1:] = (np.diff(times) != 0) | (np.diff(values) != 0)
    return times[keep], values[keep]


def dyck_heights(t: OrderedTree) -> np.ndarray:
    """Heights of the Euler tour of t at unit time steps, length 2(#t - 1) + 1."""
    counts = t.child_counts
    # first child index (in breadth-first numbering) of every node with a recorded count
    first_child = np.empty(counts.size, dtype=np.int64)
    if counts.size:
        first_child[:] = 1 + np.concatenate([[0], np.cumsum(counts)[:-1]])

    def kids(node: int) -> int:
        return int(counts[node]) if node < counts.size else 0

    heights = [0]
    stack = [(0, 0)]  # (node, next child offset)
    depth = 0
    while stack:
        node, nxt = stack[-1]
        if nxt < kids(node):
            stack[-1] = (node, nxt + 1)
            stack.append((int(first_child[node]) + nxt, 0))
            depth += 1
            heights.append(depth)
        else:
            stack.pop()
            if stack:
                depth -= 1
                heights.append(depth)
    return np.asarray(heights, dtype=float)


def contour_of(t: OrderedTree) -> ContourPath:
    h = dyck_heights(t)
    return ContourPath(np.arange(h.size, dtype=float), h)


def concat(paths: Sequence[ContourPath], total_duration: float | None = None, pad: float = 0.0) -> ContourPath:
    """Lay paths end to end; each is followed by `pad` raw time units at 0.

    With `total_duration` (scaled), a final stretch at 0 extends the encoded
    interval to that length.
    """
    if not paths:
        raise ValueError("nothing to concatenate")
    ts, ss = paths[0].time_scale, paths[0].space_scale
    if any(p.time_scale != ts or p.space_scale != ss for p in paths):
        raise ValueError("paths must share scales")
    times, values = [np.zeros(1)], [np.zeros(1)]
    offset = 0.0
    for p in paths:
        times.append(p.times[1:] + offset)
        values.append(p.values[1:])
        offset += p.times[-1]
        if pad:
            offset += pad
            times.append(np.array([offset]))
            values.append(np.zeros(1))
    if total_duration is not None:
        end = total_duration * ts
        if end < offset:
            raise ValueError("total_duration shorter than the concatenated paths")
        times.append(np.array([end]))
        values.append(np.zeros(1))
    t, v = _dedupe(np.concatenate(times), np.concatenate(values))
    return ContourPath(t, v, ts, ss)


def forest_contour(forest: Forest, padded: bool = True) -> ContourPath:
    """Concatenated contour of a forest; with `padded` each tree occupies 2 #t time units."""
    return concat([contour_of(t) for t in forest.trees], pad=2.0 if padded else 0.0)


def truncate(f: ContourPath, a: float) -> ContourPath:
    """pi_a(f): cut out the time spent strictly above level a (scaled units) and close the gaps."""
    if a < 0:
        raise ValueError("level must be nonnegative")
    level = a * f.space_scale
    t, v = f.times, f.values
    if v.max() <= level:
        return f
    t0, t1, v0, v1 = t[:-1], t[1:], v[:-1], v[1:]
    dt = t1 - t0
    dv = v1 - v0
    # kept sub-interval [s0, s1] of each segment, as offsets into the segment
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = np.where(dv != 0, (level - v0) / dv * dt, 0.0)
    both_in = (v0 <= level) & (v1 <= level)
    rising = (v0 <= level) & (v1 > level)
    falling = (v0 > level) & (v1 <= level)
    s0 = np.where(falling, cross, 0.0)
    s1 = np.where(rising, cross, dt)
    kept = both_in | rising | falling
    s0, s1 = s0[kept], s1[kept]
    a0 = np.where(falling[kept], level, v0[kept])
    a1 = np.where(rising[kept], level, v1[kept])
    length = s1 - s0
    start = np.concatenate([[0.0], np.cumsum(length)[:-1]])
    times = np.empty(2 * length.size)
    values = np.empty(2 * length.size)
    times[0::2], times[1::2] = start, start + length
    values[0::2], values[1::2] = a0, a1
    times = np.concatenate([[0.0], times])
    values = np.concatenate([[0.0], values])
    times, values = _dedupe(times, values)
    return ContourPath(times, values, f.time_scale, f.space_scale)


def rescale(f: ContourPath, n: int, gamma_n: float) -> ContourPath:
    """Attach the scaling t -> C(2 n gamma_n t) / gamma_n to the raw knots."""
    if n < 1 or gamma_n <= 0:
        raise ValueError("need n >= 1 and gamma_n > 0")
    return ContourPath(f.times, f.values, 2.0 * n * gamma_n, gamma_n)


def eval_at(f: ContourPath, t):
    """Path value at scaled time(s) t; 0 beyond the active duration."""
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0):
        raise ValueError("time must be nonnegative")
    out = np.interp(tt * f.time_scale, f.times, f.values, right=0.0) / f.space_scale
    return float(out) if out.ndim == 0 else out


def sup_path(f: ContourPath) -> float:
    return float(f.values.max()) / f.space_scale


def occupation_below(f: ContourPath, a: float) -> float:
    """Scaled time within the active duration during which the path is <= a."""
    level = a * f.space_scale
    t, v = f.times, f.values
    if v.max() <= level:
        return f.active_duration
    v0, v1, dt = v[:-1], v[1:], np.diff(t)
    lo, hi = np.minimum(v0, v1), np.maximum(v0, v1)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(hi > lo, (level - lo) / (hi - lo), 0.0)
    frac = np.where(hi <= level, 1.0, np.where(lo > level, 0.0, np.clip(frac, 0.0, 1.0)))
    return float(np.dot(frac, dt)) / f.time_scale


def upcrossings(f: ContourPath, level: float) -> int:
    """Number of segments crossing `level` (scaled) upwards."""
    lv = level * f.space_scale
    v0, v1 = f.values[:-1], f.values[1:]
    return int(np.count_nonzero((v0 < lv) & (v1 > lv)))


def to_svg(paths: Sequence[ContourPath], labels: Sequence[str] = (), width: int = 640, height: int = 240) -> str:
    from .svg import polyline_plot

    series = [(p.knots()[:, 0], p.knots()[:, 1]) for p in paths]
    return polyline_plot(series, labels, width=width, height=height, xlabel="time", ylabel="height")
