"""Zachary seminorms Z^p over the fixed cube family, and Cauchy checks.

Definition used (normative for this package): for each family cube Q_k let
f_ak be the average of f over Q_k and

    term_k = mean of |f - f_ak| over Q_k,
    ||f||_{Z^p} = ( sum_{k<=K} t_k * term_k**p )**(1/p)   for 1 <= p < inf,
    ||f||_{Z^inf} = max_{k<=K} term_k,

with weights t_k = 2**-k. A global-normalization reading of the aggregate,
in which each term integrates f - f_ak over the whole space, degenerates
(the normalizer is infinite and the signed integral vanishes identically);
the per-cube mean absolute deviation is the reading under which the expected
facts hold: constants are null, Z^p <= Z^inf with constant 1 because
sum t_k <= 1, and Z^inf is dominated by any BMO search that contains the
first K cubes.

Weights are not renormalized after truncation at K, which keeps estimates
monotone nondecreasing in K and preserves the constant-1 bound against Z^inf.
All values are relative to the documented cube enumeration; whether a
different enumeration yields an equivalent seminorm is left open, so reports
carry K and the quadrature level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .bmo import mean_deviation
from .family import FamilyConfig, cube_at
from .measure import (
    QuadratureSpec,
    TameFunction,
    cube_average,
    integrate_tame,
    tame_diff,
    tame_offset,
)
from .spaces import Space


class CubeTerm(NamedTuple):
    """Per-cube contribution: rank, average f_ak, mean absolute deviation."""

    k: int
    f_ak: float
    deviation: float


def cube_mean(
    f: TameFunction, k: int, family: FamilyConfig, quad: QuadratureSpec
) -> float:
    """f_ak: the average of f over the k-th family cube.

    Cubes of higher dimension than the function's order need no explicit
    promotion: the integral treats the body as a cylinder function either way.
    """
    return cube_average(f, cube_at(family, k).cube, quad)


def deviation_profile(
    f: TameFunction, family: FamilyConfig, quad: QuadratureSpec
) -> list[CubeTerm]:
    """All per-cube averages and deviations for k = 1..K."""
    out = []
    for k in range(1, family.K + 1):
        cube = cube_at(family, k).cube
        avg = cube_average(f, cube, quad)
        dev = mean_deviation(f, cube, quad)
        out.append(CubeTerm(k, avg, dev))
    return out


@dataclass(frozen=True)
class ZNormReport:
    """Z^p value with the evidence needed to reproduce it."""

    p: float
    value: float
    K: int
    quad_level: int
    truncation_bound: float | None
    per_cube: tuple[CubeTerm, ...]
    space: Space | None = None

    def to_json_dict(self) -> dict:
        out = {
            "p": "inf" if math.isinf(self.p) else self.p,
            "value": self.value,
            "K": self.K,
            "quad_level": self.quad_level,
            "truncation_bound": self.truncation_bound,
            "per_cube": [
                {"k": t.k, "f_ak": t.f_ak, "deviation": t.deviation}
                for t in self.per_cube
            ],
        }
        if self.space is not None:
            out["space"] = self.space.tag()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def aggregate_profile(
    profile: Sequence[CubeTerm],
    p: float,
    K: int,
    quad_level: int,
    space: Space | None = None,
) -> ZNormReport:
    """Fold per-cube deviations into the Z^p value.

    Finite p accumulates t_k * term_k**p in ascending k with exactly rounded
    summation; p = inf takes the max, which is order-free. The truncation
    bound 2**-K * (max term)**p bounds the tail of the p-th power sum; no
    such claim is made for p = inf, so the bound is None there.
    """
    if not (p >= 1.0):
        raise ValueError(f"p must satisfy p >= 1, got {p}")
    terms = [t.deviation for t in profile]
    if math.isinf(p):
        value = max(terms, default=0.0)
        bound = None
    else:
        powers = [2.0 ** (-t.k) * t.deviation**p for t in profile]
        value = math.fsum(powers) ** (1.0 / p)
        bound = 2.0 ** (-K) * max(terms, default=0.0) ** p
    return ZNormReport(p, value, K, quad_level, bound, tuple(profile), space)


def z_norm(
    f: TameFunction, p: float, family: FamilyConfig, quad: QuadratureSpec
) -> ZNormReport:
    """The Z^p seminorm of f over the configured family."""
    profile = deviation_profile(f, family, quad)
    return aggregate_profile(profile, p, family.K, quad.level)


def z_norm_banach(
    f: TameFunction,
    space: Space,
    p: float,
    family: FamilyConfig,
    quad: QuadratureSpec,
) -> ZNormReport:
    """Z^p of a function of S-basis coordinates of a sequence space.

    The cubes live in the coordinate image of the space, which is the same
    ambient product space, so the computation is identical to ``z_norm``;
    the report records the space for provenance and the values coincide bit
    for bit.
    """
    profile = deviation_profile(f, family, quad)
    return aggregate_profile(profile, p, family.K, quad.level, space=space)


def quotient_representative(
    f: TameFunction, family: FamilyConfig, quad: QuadratureSpec
) -> TameFunction:
    """The canonical representative of f modulo constants: f minus its
    average over Q_1. The Z^p value is unchanged (deviations ignore shifts
    by constants)."""
    mean = cube_mean(f, 1, family, quad)
    label = f"{f.label}|centered" if f.label else "centered"
    return tame_offset(f, mean, label)


@dataclass(frozen=True)
class FunctionSequence:
    """Finitely many terms of a sequence of tame functions."""

    terms: tuple[TameFunction, ...]
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(self.terms) < 1:
            raise ValueError("sequence needs at least one term")
        orders = [t.order for t in self.terms]
        if any(b < a for a, b in zip(orders, orders[1:])):
            raise ValueError("term orders must be nondecreasing")


class PairDistance(NamedTuple):
    m: int
    n: int
    distance: float


@dataclass(frozen=True)
class CauchyReport:
    """Z^p distances between sequence terms plus the reference integrals.

    ``consecutive`` holds d(f_i, f_{i+1}); ``spaced`` holds d(f_i, f_{2i}).
    ``within_schedule`` aligns with ``consecutive`` against eps_schedule
    (missing schedule entries pass vacuously). ``integrals`` are the
    integrals over the reference cube Q_1 and ``integral_deltas`` their
    successive absolute differences, exposing the limit integral.
    """

    p: float
    consecutive: tuple[PairDistance, ...]
    spaced: tuple[PairDistance, ...]
    within_schedule: tuple[bool, ...]
    schedule_ok: bool
    integrals: tuple[float, ...]
    integral_deltas: tuple[float, ...]

    def to_json_dict(self) -> dict:
        return {
            "p": "inf" if math.isinf(self.p) else self.p,
            "consecutive": [list(d) for d in self.consecutive],
            "spaced": [list(d) for d in self.spaced],
            "within_schedule": list(self.within_schedule),
            "schedule_ok": self.schedule_ok,
            "integrals": list(self.integrals),
            "integral_deltas": list(self.integral_deltas),
        }


def cauchy_check(
    seq: FunctionSequence,
    p: float,
    family: FamilyConfig,
    quad: QuadratureSpec,
    eps_schedule: Sequence[float] = (),
) -> CauchyReport:
    """Verify Cauchy behaviour of a sequence in the Z^p seminorm.

    Distances are computed on synthesized difference bodies (deviations are
    nonlinear, so subtracting reports would be wrong).
    """
    terms = seq.terms
    if len(terms) < 2:
        raise ValueError("cauchy_check needs at least 2 terms")

    def dist(i: int, j: int) -> float:
        diff = tame_diff(terms[j - 1], terms[i - 1])
        return z_norm(diff, p, family, quad).value

    consecutive = tuple(
        PairDistance(i, i + 1, dist(i, i + 1)) for i in range(1, len(terms))
    )
    spaced = tuple(
        PairDistance(i, 2 * i, dist(i, 2 * i))
        for i in range(1, len(terms))
        if 2 * i <= len(terms) and i + 1 != 2 * i
    )
    flags = tuple(
        d.distance <= eps_schedule[idx] if idx < len(eps_schedule) else True
        for idx, d in enumerate(consecutive)
    )
    ref = cube_at(family, 1).cube
    integrals = tuple(integrate_tame(t, ref, quad) for t in terms)
    deltas = tuple(abs(b - a) for a, b in zip(integrals, integrals[1:]))
    return CauchyReport(
        p, consecutive, spaced, flags, all(flags), integrals, deltas
    )
