"""Tame functions, cubes and the product-measure integral.

Conventions:
  * A point of the ambient space is a sequence (x1, x2, ...) in which all but
    finitely many coordinates lie in I = [-1/2, 1/2]. Points are passed around
    as {axis index: value} mappings; unspecified axes default to 0, the center
    of I.
  * A ``TameFunction`` of order n is a body over x1..xn tensored with the
    indicator of the tail (all axes > n inside I). ``evaluate`` applies that
    tail cutoff pointwise.
  * A ``Cube`` constrains axes 1..dim to an axis-aligned box of one common
    side; every further axis spans I, which has measure 1, so the cube's
    measure is side**dim.
  * Integration treats the body as a cylinder function: the quadrature grid
    covers exactly the axes the body references (over the cube's box where
    constrained, over I beyond), unreferenced constrained axes contribute an
    exact side factor, and every remaining axis contributes factor 1. This is
    what makes constants average to themselves exactly and makes order
    promotion leave every integral bit-identical.
  * Node sums run in lexicographic grid order and are accumulated with
    exactly rounded (Shewchuk) summation, so results are bit-identical across
    runs and insensitive to chunking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import chain
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from . import expr as ex
from .errors import NonFiniteSampleError, QuadratureBudgetError

TAIL_HALF_WIDTH = 0.5  # I = [-1/2, 1/2]

# Largest vectorized evaluation block; outer grid axes are looped in Python.
_CHUNK_NODE_LIMIT = 1 << 20

_SUMMATION_TAGS = ("lex-exact",)


class Coordinate(NamedTuple):
    """One supplied coordinate of a point (1-based axis index)."""

    index: int
    value: float


PointLike = Mapping[int, float] | Iterable[tuple[int, float]]


def as_point(point: PointLike) -> dict[int, float]:
    """Normalize a point to a dict, validating axis indices."""
    items = point.items() if isinstance(point, Mapping) else point
    out: dict[int, float] = {}
    for index, value in items:
        if not isinstance(index, int) or index < 1:
            raise ValueError(f"axis index must be a positive integer, got {index!r}")
        out[index] = float(value)
    return out


@dataclass(frozen=True)
class TameFunction:
    """A function of the first ``order`` coordinates times the tail indicator."""

    order: int
    body: ex.Expr
    label: str = ""

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be nonnegative")
        top = ex.max_coordinate(self.body)
        if top > self.order:
            raise ValueError(
                f"body references x{top} but order is {self.order}"
            )

    def __call__(self, point: PointLike) -> float:
        return evaluate(self, point)


@dataclass(frozen=True)
class Cube:
    """Axis-aligned cube constraining axes 1..dim; all later axes span I."""

    dim: int
    center: tuple[float, ...]
    side: float

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.center) != self.dim:
            raise ValueError("center length must equal dim")
        if not all(math.isfinite(c) for c in self.center):
            raise ValueError("center must be finite")
        if not (self.side > 0 and math.isfinite(self.side)):
            raise ValueError("side must be positive and finite")

    def interval(self, axis: int) -> tuple[float, float]:
        """(low, high) on a constrained axis (1-based)."""
        c = self.center[axis - 1]
        return c - self.side / 2.0, c + self.side / 2.0

    def contains(self, point: PointLike) -> bool:
        """True when every supplied coordinate is compatible with the cube
        (inside the box on constrained axes, inside I beyond)."""
        pt = as_point(point)
        for axis, value in pt.items():
            if axis <= self.dim:
                lo, hi = self.interval(axis)
                if not (lo <= value <= hi):
                    return False
            elif not (-TAIL_HALF_WIDTH <= value <= TAIL_HALF_WIDTH):
                return False
        return True


@dataclass(frozen=True)
class QuadratureSpec:
    """Reproducibility contract for every numerical value.

    ``level`` L gives 2**L midpoints per gridded axis. ``budget`` caps the
    total node count; jobs that would exceed it are refused, never truncated.
    ``summation`` names the accumulation scheme; only "lex-exact"
    (lexicographic node order, exactly rounded sums) is defined.
    """

    level: int
    budget: int = 1 << 26
    summation: str = "lex-exact"

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.summation not in _SUMMATION_TAGS:
            raise ValueError(f"unknown summation tag {self.summation!r}")

    @property
    def points_per_axis(self) -> int:
        return 1 << self.level


# ---------------------------------------------------------------------------
# basic operations


def lambda_infty(cube: Cube) -> float:
    """Measure of the cube: side**dim (tail axes contribute factor 1)."""
    return cube.side ** cube.dim


def evaluate(f: TameFunction, point: PointLike) -> float:
    """Pointwise value of the tame function.

    Returns 0 when any supplied coordinate beyond the order leaves I, the
    body value otherwise. Domain faults inside the body propagate as
    non-finite markers, never as silent zeros.
    """
    pt = as_point(point)
    for axis, value in pt.items():
        if axis > f.order and not (-TAIL_HALF_WIDTH <= value <= TAIL_HALF_WIDTH):
            return 0.0
    return ex.eval_point(f.body, pt)


def promote(f: TameFunction, m: int) -> TameFunction:
    """Raise the order to m >= order without changing the body.

    Integrals over any cube are preserved bit for bit because the quadrature
    grid depends only on the referenced axes.
    """
    if m < f.order:
        raise ValueError(f"cannot promote order {f.order} down to {m}")
    return replace(f, order=m)


# ---------------------------------------------------------------------------
# constructors and combinators


def tame_from_text(text: str, label: str = "") -> TameFunction:
    """Parse a DSL expression; the order is the highest referenced axis."""
    body = ex.parse_expression(text)
    return TameFunction(ex.max_coordinate(body), body, label or text)


def constant(value: float, label: str = "") -> TameFunction:
    return TameFunction(0, ex.Literal(float(value)), label or repr(float(value)))


def tame_sum(f: TameFunction, g: TameFunction, label: str = "") -> TameFunction:
    return TameFunction(max(f.order, g.order), ex.Binary("+", f.body, g.body), label)


def tame_diff(f: TameFunction, g: TameFunction, label: str = "") -> TameFunction:
    return TameFunction(max(f.order, g.order), ex.Binary("-", f.body, g.body), label)


def tame_scale(a: float, f: TameFunction, label: str = "") -> TameFunction:
    return TameFunction(f.order, ex.Binary("*", ex.Literal(float(a)), f.body), label)


def tame_offset(f: TameFunction, c: float, label: str = "") -> TameFunction:
    """f minus a constant (used for quotient representatives)."""
    return TameFunction(f.order, ex.Binary("-", f.body, ex.Literal(float(c))), label)


def _axis_indicator(axis: int, lo: float, hi: float) -> ex.Expr:
    """step(x - lo) - step(x - hi): the half-open indicator of [lo, hi)."""
    x = ex.Coord(axis)
    return ex.Binary(
        "-",
        ex.Unary("step", ex.Binary("-", x, ex.Literal(lo))),
        ex.Unary("step", ex.Binary("-", x, ex.Literal(hi))),
    )


def box_indicator(intervals: Sequence[tuple[float, float]], label: str = "") -> TameFunction:
    """Indicator of the half-open box [lo1,hi1) x ... on axes 1..n."""
    body: ex.Expr | None = None
    for axis, (lo, hi) in enumerate(intervals, start=1):
        factor = _axis_indicator(axis, lo, hi)
        body = factor if body is None else ex.Binary("*", body, factor)
    if body is None:
        body = ex.Literal(1.0)
    return TameFunction(len(intervals), body, label)


def _sign_body() -> ex.Expr:
    x1 = ex.Coord(1)
    return ex.Binary(
        "-", ex.Unary("step", x1), ex.Unary("step", ex.Unary("neg", x1))
    )


BUILTINS: dict[str, TameFunction] = {
    "const1": constant(1.0, "const1"),
    "sign": TameFunction(1, _sign_body(), "sign"),
    "log_abs": TameFunction(
        1, ex.Unary("log", ex.Unary("abs", ex.Coord(1))), "log_abs"
    ),
}


# ---------------------------------------------------------------------------
# quadrature engine


def _grid_layout(f: TameFunction, region: Cube) -> list[tuple[int, float, float]]:
    """Gridded axes as (axis, low, width): the box where constrained, I beyond."""
    layout = []
    for axis in sorted(ex.coordinates(f.body)):
        if axis <= region.dim:
            lo, _ = region.interval(axis)
            layout.append((axis, lo, region.side))
        else:
            layout.append((axis, -TAIL_HALF_WIDTH, 2 * TAIL_HALF_WIDTH))
    return layout


def node_count(f: TameFunction, region: Cube, quad: QuadratureSpec) -> int:
    """Total quadrature nodes the pair (f, region) requires."""
    return quad.points_per_axis ** len(ex.coordinates(f.body))


def _axis_nodes(lo: float, width: float, npts: int) -> np.ndarray:
    return lo + (np.arange(npts) + 0.5) * (width / npts)


def iter_sample_chunks(
    f: TameFunction, region: Cube, quad: QuadratureSpec
) -> Iterator[np.ndarray]:
    """Body values over the tensor midpoint grid, flattened lexicographically.

    Yields 1-D float64 chunks whose concatenation is the full node stream.
    Raises QuadratureBudgetError before any evaluation if the node count
    exceeds the budget, and NonFiniteSampleError at the first bad node.
    """
    layout = _grid_layout(f, region)
    npts = quad.points_per_axis
    total = npts ** len(layout)
    if total > quad.budget:
        raise QuadratureBudgetError(
            f"{total} nodes needed ({len(layout)} axes at level {quad.level}) "
            f"exceed budget {quad.budget}"
        )
    if not layout:
        value = float(ex.eval_point(f.body, {}))
        if not math.isfinite(value):
            raise NonFiniteSampleError("constant body is non-finite", {})
        yield np.array([value])
        return

    nodes = [_axis_nodes(lo, width, npts) for _, lo, width in layout]
    r = len(layout)
    # Vectorize over the trailing q axes, loop the rest lexicographically.
    q = r
    while q > 1 and npts ** q > _CHUNK_NODE_LIMIT:
        q -= 1
    inner = layout[r - q:]
    outer = layout[: r - q]
    inner_shape = (npts,) * q
    inner_env = {
        axis: nodes[r - q + j].reshape((1,) * j + (npts,) + (1,) * (q - 1 - j))
        for j, (axis, _, _) in enumerate(inner)
    }

    for combo in np.ndindex(*((npts,) * len(outer))):
        env: dict[int, np.ndarray | float] = dict(inner_env)
        for pos, ((axis, _, _), i) in enumerate(zip(outer, combo)):
            env[axis] = float(nodes[pos][i])
        values = np.broadcast_to(
            np.asarray(ex.eval_array(f.body, env), dtype=np.float64), inner_shape
        ).ravel()
        if not np.all(np.isfinite(values)):
            flat = int(np.argmin(np.isfinite(values)))
            bad = {axis: env[axis] for (axis, _, _) in outer}
            idx = np.unravel_index(flat, inner_shape)
            for j, (axis, _, _) in enumerate(inner):
                bad[axis] = float(nodes[r - q + j][idx[j]])
            raise NonFiniteSampleError(
                f"non-finite sample at node {bad}", bad
            )
        yield values


def _stream(chunks: Iterable[np.ndarray]) -> Iterator[float]:
    return chain.from_iterable(c.tolist() for c in chunks)


def cube_average(f: TameFunction, region: Cube, quad: QuadratureSpec) -> float:
    """Mean of f over the cube: the exact sample mean of the midpoint grid."""
    total = node_count(f, region, quad)
    s = math.fsum(_stream(iter_sample_chunks(f, region, quad)))
    return s / total


def cube_abs_moment(
    f: TameFunction, region: Cube, quad: QuadratureSpec, center: float
) -> float:
    """Mean of |f - center| over the cube, on the same nodes as the average."""
    total = node_count(f, region, quad)
    s = math.fsum(
        chain.from_iterable(
            np.abs(c - center).tolist() for c in iter_sample_chunks(f, region, quad)
        )
    )
    return s / total


def cube_sample_values(
    f: TameFunction, region: Cube, quad: QuadratureSpec
) -> np.ndarray:
    """All node values, materialized in lexicographic order."""
    chunks = list(iter_sample_chunks(f, region, quad))
    return np.concatenate(chunks) if len(chunks) > 1 else chunks[0]


def cube_value_range(
    f: TameFunction, region: Cube, quad: QuadratureSpec
) -> tuple[float, float]:
    """(min, max) of the node values over the cube."""
    lo = math.inf
    hi = -math.inf
    for c in iter_sample_chunks(f, region, quad):
        lo = min(lo, float(c.min()))
        hi = max(hi, float(c.max()))
    return lo, hi


def integrate_tame(f: TameFunction, region: Cube, quad: QuadratureSpec) -> float:
    """Composite-midpoint integral of f over the cube.

    Equals the sample mean times the cube measure: constrained axes carry the
    box, body axes beyond the cube span I, and each remaining axis contributes
    factor 1. Exact for affine bodies at every level, and bit-deterministic
    for fixed inputs.
    """
    return cube_average(f, region, quad) * lambda_infty(region)
