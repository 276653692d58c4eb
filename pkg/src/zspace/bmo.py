"""Averages, sharp maximal function and the BMO norm estimate.

The true BMO norm is a supremum over all cubes; at desk scale we maximize
over a finite, reproducible search family (the first K_search cubes of the
canonical enumeration plus lattice-shifted copies). The estimate is therefore
a lower bound of the supremum by construction, monotone nondecreasing in
K_search and in the shift set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

import numpy as np

from . import expr as ex
from .errors import EmptySearchError
from .family import FamilyConfig, cube_at
from .measure import (
    Cube,
    PointLike,
    QuadratureSpec,
    TameFunction,
    cube_abs_moment,
    cube_average,
    cube_sample_values,
)


def _shifted_cube(cube: Cube, shift: Sequence[float]) -> Cube | None:
    """Cube translated by ``shift`` on its constrained axes.

    Components beyond the cube's dimension would move the I-tail, which a
    Cube cannot represent; such copies are skipped (None).
    """
    if all(h == 0.0 for h in shift):
        return cube
    if any(h != 0.0 for h in shift[cube.dim:]):
        return None
    center = list(cube.center)
    for i, h in enumerate(shift[: cube.dim]):
        center[i] = center[i] + h
    return replace(cube, center=tuple(center))


def _combine(a: Sequence[float], b: Sequence[float]) -> tuple[float, ...]:
    n = max(len(a), len(b))
    return tuple(
        (a[i] if i < len(a) else 0.0) + (b[i] if i < len(b) else 0.0)
        for i in range(n)
    )


@dataclass(frozen=True)
class SearchFamily:
    """Finite cube set over which suprema are approximated.

    Yields the first ``k_search`` canonical cubes, then each of their copies
    under every shift vector, all offset by ``offset`` (used to co-translate
    the family when testing translation invariance).
    """

    base: FamilyConfig
    k_search: int = 16
    shifts: tuple[tuple[float, ...], ...] = ()
    offset: tuple[float, ...] = ()

    def __post_init__(self):
        if not (1 <= self.k_search <= self.base.K):
            raise ValueError("k_search must be within the base family's K")
        object.__setattr__(
            self, "shifts", tuple(tuple(float(h) for h in s) for s in self.shifts)
        )
        object.__setattr__(self, "offset", tuple(float(h) for h in self.offset))

    def cubes(self) -> Iterator[Cube]:
        vectors: list[tuple[float, ...]] = [self.offset]
        vectors += [_combine(s, self.offset) for s in self.shifts]
        for k in range(1, self.k_search + 1):
            base = cube_at(self.base, k).cube
            for vec in vectors:
                shifted = _shifted_cube(base, vec)
                if shifted is not None:
                    yield shifted

    def translated(self, h: Sequence[float]) -> "SearchFamily":
        """The same family with every cube moved by h (co-translated search)."""
        return replace(self, offset=_combine(self.offset, h))


@dataclass(frozen=True)
class BmoEstimate:
    """Family-relative BMO estimate: a lower bound of the true supremum."""

    value: float
    attaining_cube: Cube
    k_search: int
    quad_level: int

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "attaining_cube": {
                "dim": self.attaining_cube.dim,
                "center": list(self.attaining_cube.center),
                "side": self.attaining_cube.side,
            },
            "K_search": self.k_search,
            "quad_level": self.quad_level,
        }


def average(f: TameFunction, cube: Cube, quad: QuadratureSpec) -> float:
    """Average of f over the cube (integral divided by the cube measure)."""
    return cube_average(f, cube, quad)


def mean_deviation(f: TameFunction, cube: Cube, quad: QuadratureSpec) -> float:
    """Mean absolute deviation of f from its average over the cube.

    Two passes on identical nodes: the average first, then |f - avg|, so a
    constant body yields exactly zero.
    """
    avg = cube_average(f, cube, quad)
    return cube_abs_moment(f, cube, quad, avg)


def sharp_maximal(
    f: TameFunction,
    point: PointLike,
    search: SearchFamily,
    quad: QuadratureSpec,
) -> float:
    """Max mean deviation over the search cubes containing the point."""
    best = None
    for cube in search.cubes():
        if cube.contains(point):
            dev = mean_deviation(f, cube, quad)
            if best is None or dev > best:
                best = dev
    if best is None:
        raise EmptySearchError("no search-family cube contains the point")
    return best


def bmo_norm(
    f: TameFunction, search: SearchFamily, quad: QuadratureSpec
) -> BmoEstimate:
    """Max mean deviation over the whole search family."""
    best = -math.inf
    attaining: Cube | None = None
    for cube in search.cubes():
        dev = mean_deviation(f, cube, quad)
        if dev > best:
            best = dev
            attaining = cube
    if attaining is None:
        raise EmptySearchError("search family is empty")
    return BmoEstimate(best, attaining, search.k_search, quad.level)


def best_constant(
    f: TameFunction, cube: Cube, quad: QuadratureSpec
) -> tuple[float, float]:
    """(C*, mean |f - C*|) with C* the median of the node values.

    The median minimizes the mean absolute deviation over the samples; with
    an even node count and a gap at the half mass, the midpoint of the median
    interval is used. The value never exceeds mean_deviation on the same
    nodes.
    """
    values = np.sort(cube_sample_values(f, cube, quad))
    n = values.size
    if n % 2 == 1:
        c_star = float(values[n // 2])
    else:
        c_star = float(values[n // 2 - 1] + values[n // 2]) / 2.0
    dev = cube_abs_moment(f, cube, quad, c_star)
    return c_star, dev


def translate(f: TameFunction, h: Sequence[float]) -> TameFunction:
    """The translate x -> f(x - h), shifting only constrained axes."""
    h = tuple(float(v) for v in h)
    if len(h) > f.order and any(v != 0.0 for v in h[f.order:]):
        raise ValueError(
            f"shift touches axis {len(h)} beyond the function's order {f.order}"
        )
    offsets = {i + 1: v for i, v in enumerate(h) if v != 0.0}
    body = ex.shift(f.body, offsets)
    label = f"{f.label}|shift{list(h)}" if f.label else ""
    return TameFunction(f.order, body, label)
