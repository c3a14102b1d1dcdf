"""Galton-Watson trees cut at a fixed height.

A tree is stored as the breadth-first list of child counts of every node
whose count is recorded (all nodes of a finite tree, or the nodes strictly
below the truncation height of r_a t). That list determines the ordered tree
completely, and it is also the equivalence class used for exact enumeration.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .offspring import OffspringDistribution

NODE_BUDGET = 10**8
ENUMERATION_BUDGET = 10**6


class PopulationExplosion(RuntimeError):
    """Raised when a generation exceeds the node budget."""

    def __init__(self, generation: int, size: int, budget: int):
        super().__init__(f"generation {generation} has {size} nodes, budget is {budget}")
        self.generation = generation
        self.size = size


class EnumerationBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class OrderedTree:
    child_counts: np.ndarray
    truncation_height: Optional[int] = None
    sizes: tuple = field(init=False, repr=False)

    def __post_init__(self):
        counts = np.asarray(self.child_counts, dtype=np.int64).ravel().copy()
        if np.any(counts < 0):
            raise ValueError("child counts must be nonnegative")
        counts.setflags(write=False)
        object.__setattr__(self, "child_counts", counts)
        a = self.truncation_height
        if a is not None and a < 0:
            raise ValueError("truncation height must be nonnegative")
        sizes = [1]
        pos = 0
        h = 0
        while True:
            y = sizes[-1]
            if a is not None and h == a:
                break
            if y == 0:
                if a is None:
                    sizes.pop()
                    break
                sizes.append(0)
                h += 1
                continue
            if pos + y > counts.size:
                raise ValueError("child-count list ends inside a generation")
            sizes.append(int(counts[pos : pos + y].sum()))
            pos += y
            h += 1
        if pos != counts.size:
            raise ValueError("child-count list is longer than the tree it encodes")
        object.__setattr__(self, "sizes", tuple(sizes))

    @classmethod
    def root(cls, truncation_height: Optional[int] = None) -> "OrderedTree":
        return cls([] if truncation_height == 0 else [0], truncation_height)

    @classmethod
    def from_json(cls, text: str) -> "OrderedTree":
        obj = json.loads(text)
        return cls(obj["child_counts"], obj.get("truncation_height"))

    def to_json(self) -> str:
        return json.dumps(
            {"truncation_height": self.truncation_height, "child_counts": self.child_counts.tolist()}
        )

    @property
    def height(self) -> int:
        nonempty = [h for h, y in enumerate(self.sizes) if y > 0]
        return nonempty[-1]

    def key(self) -> tuple:
        return (self.truncation_height, tuple(self.child_counts.tolist()))

    def __eq__(self, other):
        if not isinstance(other, OrderedTree):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"OrderedTree({self.child_counts.tolist()}, truncation_height={self.truncation_height})"


@dataclass(frozen=True)
class Forest:
    trees: tuple
    truncation_height: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        if not self.trees:
            raise ValueError("a forest needs at least one tree")
        if any(t.truncation_height != self.truncation_height for t in self.trees):
            raise ValueError("all trees in a forest share one truncation height")

    @property
    def count(self) -> int:
        return len(self.trees)


def generation_sizes(t) -> tuple:
    """(Y_0, ..., Y_a) for a truncated tree or forest, (Y_0, ..., Y_|t|) for a finite tree."""
    if isinstance(t, Forest):
        per_tree = [generation_sizes(tree) for tree in t.trees]
        depth = max(len(s) for s in per_tree)
        total = np.zeros(depth, dtype=np.int64)
        for s in per_tree:
            total[: len(s)] += s
        return tuple(int(v) for v in total)
    return t.sizes


def node_count(t) -> int:
    return int(sum(generation_sizes(t)))


def leaf_count(t: OrderedTree) -> int:
    counts = t.child_counts
    frontier = t.sizes[t.truncation_height] if t.truncation_height is not None else 0
    leaves = int(np.count_nonzero(counts == 0)) + frontier
    internal = counts[counts > 0]
    if leaves != 1 + int((internal - 1).sum()):
        raise AssertionError("leaf identity #L = 1 + sum (k - 1) violated")
    return leaves


def truncate_tree(t: OrderedTree, a: int) -> OrderedTree:
    """r_a t: keep heights <= a; nodes at height a become frontier leaves."""
    if t.truncation_height is not None and a > t.truncation_height:
        raise ValueError("cannot truncate above the existing truncation height")
    keep = sum(t.sizes[:a]) if a < len(t.sizes) else t.child_counts.size
    return OrderedTree(t.child_counts[:keep], a)


def _draw_counts(p: OffspringDistribution, size: int, rng: np.random.Generator) -> np.ndarray:
    if p.probs.size == 1:
        return np.zeros(size, dtype=np.int64)
    return np.searchsorted(p.cdf, rng.random(size), side="right").astype(np.int64)


def sample_truncated(
    p: OffspringDistribution, a: int, rng: np.random.Generator, budget: int = NODE_BUDGET
) -> OrderedTree:
    """Sample r_a of a Galton-Watson tree generation by generation."""
    if a < 0:
        raise ValueError("truncation height must be nonnegative")
    chunks = []
    y = 1
    for h in range(a):
        if y == 0:
            break
        counts = _draw_counts(p, y, rng)
        chunks.append(counts)
        y = int(counts.sum())
        if y > budget:
            raise PopulationExplosion(h + 1, y, budget)
    counts = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
    return OrderedTree(counts, a)


def sample_forest(
    p: OffspringDistribution, count: int, a: int, rng: np.random.Generator, budget: int = NODE_BUDGET
) -> Forest:
    if count < 1:
        raise ValueError("forest needs count >= 1")
    return Forest(tuple(sample_truncated(p, a, rng, budget) for _ in range(count)), a)


def step_population(y: np.ndarray, p: OffspringDistribution, rng: np.random.Generator) -> np.ndarray:
    """One Galton-Watson generation for a vector of independent populations.

    Child counts of the y individuals are drawn as a multinomial split over
    the support, done with sequential conditional binomials so it vectorises
    over the population vector.
    """
    y = np.asarray(y, dtype=np.int64)
    out = np.zeros_like(y)
    remaining = y.copy()
    rest = 1.0
    support = p.support
    for i, k in enumerate(support):
        pk = p.probs[k]
        if i == len(support) - 1:
            n_k = remaining
        else:
            frac = min(1.0, pk / rest) if rest > 0 else 1.0
            n_k = rng.binomial(remaining, frac)
            remaining = remaining - n_k
            rest -= pk
        if k:
            out += k * n_k
    return out


def simulate_generations(
    p: OffspringDistribution,
    count: int,
    generations: int,
    rng: np.random.Generator,
    size: int,
) -> np.ndarray:
    """Generation sizes of `size` independent processes started from `count` ancestors.

    Returns an int64 array of shape (size, generations + 1).
    """
    out = np.zeros((size, generations + 1), dtype=np.int64)
    y = np.full(size, count, dtype=np.int64)
    out[:, 0] = y
    for k in range(1, generations + 1):
        alive = y > 0
        if not alive.any():
            break
        y = y.copy()
        y[alive] = step_population(y[alive], p, rng)
        out[:, k] = y
    return out


def enumerate_truncated(
    p: OffspringDistribution, a: int, budget: int = ENUMERATION_BUDGET
) -> list:
    """All classes r_a t with their exact probabilities prod_{|v| < a} p_{k_v}."""
    if a < 0:
        raise ValueError("truncation height must be nonnegative")
    support = [int(k) for k in p.support]
    probs = p.probs
    out = []

    def grow(prefix: tuple, prob: float, y: int, h: int):
        if h == a or y == 0:
            out.append((OrderedTree(np.array(prefix, dtype=np.int64), a), prob))
            if len(out) > budget:
                raise EnumerationBudgetExceeded(f"more than {budget} classes")
            return
        if len(support) ** y > budget:
            raise EnumerationBudgetExceeded(f"{len(support)}^{y} child-count combinations at height {h}")
        for combo in itertools.product(support, repeat=y):
            w = prob
            for k in combo:
                w *= probs[k]
            grow(prefix + combo, w, sum(combo), h + 1)

    grow((), 1.0, 1, 0)
    return out


def enumerate_finite(p: OffspringDistribution, max_nodes: int) -> Iterator:
    """Every finite tree with at most `max_nodes` nodes, with prod_v p_{k_v}."""
    support = [int(k) for k in p.support]
    probs = p.probs

    def grow(prefix: tuple, prob: float, y: int, nodes: int):
        if y == 0:
            yield OrderedTree(np.array(prefix, dtype=np.int64)), prob
            return
        for combo in itertools.product(support, repeat=y):
            nxt = sum(combo)
            if nodes + nxt > max_nodes:
                continue
            w = prob
            for k in combo:
                w *= probs[k]
            yield from grow(prefix + combo, w, nxt, nodes + nxt)

    yield from grow((), 1.0, 1, 1)


def forest_from_json(text: str) -> Forest:
    obj = json.loads(text)
    trees = [OrderedTree(c, obj.get("truncation_height")) for c in obj["trees"]]
    return Forest(tuple(trees), obj.get("truncation_height"))


def forest_to_json(forest: Forest) -> str:
    return json.dumps(
        {
            "truncation_height": forest.truncation_height,
            "trees": [t.child_counts.tolist() for t in forest.trees],
        }
    )
