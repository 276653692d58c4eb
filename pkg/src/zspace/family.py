"""Deterministic countable cube family {Q_k} with weights t_k = 2**-k.

Enumeration contract (normative, versioned; see docs/cube_family_order.txt):

  Every cube is described by a tuple t = (n, l, j) with dimension n >= 1,
  refinement level l >= 0 and offsets j in Z^n, |j_i| <= max(2**l - 1, 0).
  The cube has center c_i = j_i * 2**-l * W and side s = 2**(1-l) * W, where
  W is the configured window. Tuples are ordered by ascending budget
  B(t) = n + l + sum|j_i|, ties broken lexicographically on (n, l, j1..jn);
  the 1-based rank is k.

The order is intrinsic: it never depends on the configured bounds or the
truncation K, so enlarging a family keeps every existing rank (prefix
property). ``max_dim`` and ``max_level`` only validate that the first K
canonical cubes stay within the configured cost envelope; a config whose
first K cubes exceed the bounds is rejected at construction.

Dyadic-rational centers realize a dense set of rational centers in the
max_level limit while staying exactly representable in binary floating
point, so no center ever drifts under rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .errors import FamilyRangeError
from .measure import Cube, TameFunction, box_indicator

_MAX_K = 1022  # beyond this 2.0**-k loses exactness headroom in a double

# Canonical tuples (n, l, (j1..jn)), extended on demand; append-only.
_TUPLES: list[tuple[int, int, tuple[int, ...]]] = []
_NEXT_BUDGET = 1


def _offsets(n: int, total: int, bound: int) -> Iterator[tuple[int, ...]]:
    """All j in Z^n with sum|j_i| == total and |j_i| <= bound, ascending lex."""
    if n == 1:
        if total == 0:
            yield (0,)
        elif total <= bound:
            yield (-total,)
            yield (total,)
        return
    lo = min(bound, total)
    for j1 in range(-lo, lo + 1):
        for rest in _offsets(n - 1, total - abs(j1), bound):
            yield (j1,) + rest


def _tier(budget: int) -> list[tuple[int, int, tuple[int, ...]]]:
    """All tuples with B(t) == budget in lexicographic (n, l, j) order."""
    out = []
    for n in range(1, budget + 1):
        for level in range(0, budget - n + 1):
            total = budget - n - level
            bound = (1 << level) - 1
            if total > n * bound:
                continue
            out.extend((n, level, j) for j in _offsets(n, total, bound))
    return out


def _canonical_tuple(k: int) -> tuple[int, int, tuple[int, ...]]:
    """k-th tuple (1-based) of the canonical order."""
    global _NEXT_BUDGET
    while len(_TUPLES) < k:
        _TUPLES.extend(_tier(_NEXT_BUDGET))
        _NEXT_BUDGET += 1
    return _TUPLES[k - 1]


@dataclass(frozen=True)
class FamilyConfig:
    """Window, cost bounds and truncation for the cube family.

    Construction fails loudly if any of the first K canonical cubes violates
    the (max_dim, max_level) bounds, since silently skipping tuples would
    renumber the family.
    """

    window: float = 1.0
    max_dim: int = 8
    max_level: int = 10
    K: int = 64

    def __post_init__(self):
        if not (self.window > 0 and math.isfinite(self.window)):
            raise ValueError("window must be positive and finite")
        if self.max_dim < 1 or self.max_level < 0:
            raise ValueError("max_dim must be >= 1 and max_level >= 0")
        if not (1 <= self.K <= _MAX_K):
            raise ValueError(f"K must be in 1..{_MAX_K}")
        for k in range(1, self.K + 1):
            n, level, _ = _canonical_tuple(k)
            if n > self.max_dim or level > self.max_level:
                raise ValueError(
                    f"cube k={k} has dim {n}, level {level}; bounds "
                    f"(max_dim={self.max_dim}, max_level={self.max_level}) "
                    f"cannot supply K={self.K} cubes"
                )


@dataclass(frozen=True)
class FamilyIndex:
    """Rank k, the cube Q_k, and its weight t_k = 2**-k (exact dyadic)."""

    k: int
    cube: Cube
    weight: float


def cube_at(config: FamilyConfig, k: int) -> FamilyIndex:
    """The k-th family cube under the canonical order (1-based)."""
    if not (1 <= k <= config.K):
        raise FamilyRangeError(f"k={k} outside 1..{config.K}")
    n, level, offs = _canonical_tuple(k)
    scale = config.window * 2.0 ** (-level)
    center = tuple(j * scale for j in offs)
    side = config.window * 2.0 ** (1 - level)
    return FamilyIndex(k, Cube(n, center, side), 2.0 ** (-k))


def iter_family(config: FamilyConfig) -> Iterator[FamilyIndex]:
    for k in range(1, config.K + 1):
        yield cube_at(config, k)


def indicator(fi: FamilyIndex) -> TameFunction:
    """Indicator of the cube's constrained box as a tame function.

    Built from left-closed steps, so the box is half-open per axis; midpoint
    nodes of the cube itself never sit on a face, making the distinction
    invisible to the quadrature rule.
    """
    intervals = [fi.cube.interval(axis) for axis in range(1, fi.cube.dim + 1)]
    return box_indicator(intervals, label=f"indicator_Q{fi.k}")


def total_weight(K: int) -> float:
    """sum of t_k for k <= K, computed in closed form as 1 - 2**-K."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return 1.0 - 2.0 ** (-K)


def order_contract_lines(count: int = 20, window: float = 1.0) -> list[str]:
    """Tabulate the first ``count`` cubes of the documented order."""
    config = FamilyConfig(window=window, max_dim=count, max_level=count, K=count)
    lines = [
        "k  dim  level  offsets          center                side      weight",
    ]
    for fi in iter_family(config):
        n, level, offs = _canonical_tuple(fi.k)
        lines.append(
            f"{fi.k:<3d}{n:<5d}{level:<7d}{str(list(offs)):<17s}"
            f"{str([c for c in fi.cube.center]):<22s}{fi.cube.side:<10g}2^-{fi.k}"
        )
    return lines
