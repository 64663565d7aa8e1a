"""The local node model ``zw = t`` and sections of powers of its relative dualizing sheaf.

A weight-``k`` section is stored as its coefficient ``f(z, w, s...)`` against
``(dz/z - dw/w)^k``; the first two variables of the coefficient series are the
node-chart coordinates and the remaining ones are base parameters.  Vertical
sections are stored as ``g`` against ``(z d/dz - w d/dw) / 2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .series import STRUCTURAL_ZERO, ComplexSeries, DomainError, compose, diagonal, dumps


class SectionError(DomainError):
    pass


def _check_chart(coeff: ComplexSeries, what: str):
    if not isinstance(coeff, ComplexSeries):
        raise SectionError(f"{what} coefficient must be a ComplexSeries")
    if len(coeff.vars) < 2:
        raise SectionError(f"{what} coefficient needs two chart variables, got {list(coeff.vars)}")
    if coeff.lower[0] < 0 or coeff.lower[1] < 0 or any(e[0] < 0 or e[1] < 0 for e, _ in coeff.items()):
        raise SectionError(f"{what} must be regular: non-negative exponents in the chart coordinates")
    if coeff.weights[:2] != (1, 1):
        raise SectionError(f"{what} chart variables must carry unit weights")


@dataclass(frozen=True, eq=True)
class SectionK:
    """``coeff(z, w, s) * (dz/z - dw/w)^k``."""

    k: int
    coeff: ComplexSeries

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise SectionError(f"differential weight must be a positive integer, got {self.k!r}")
        _check_chart(self.coeff, "section")

    @property
    def chart(self) -> tuple[str, str]:
        return self.coeff.vars[0], self.coeff.vars[1]

    @property
    def params(self) -> tuple[str, ...]:
        return self.coeff.vars[2:]

    def __add__(self, other: SectionK) -> SectionK:
        if self.k != other.k:
            raise SectionError(f"cannot add sections of weights {self.k} and {other.k}")
        return SectionK(self.k, self.coeff + other.coeff)

    def __sub__(self, other: SectionK) -> SectionK:
        return self + other.scale(-1)

    def scale(self, c) -> SectionK:
        return SectionK(self.k, self.coeff.scale(c))

    def times(self, factor: ComplexSeries) -> SectionK:
        """Multiply the coefficient by a function on the chart."""
        return SectionK(self.k, self.coeff * factor)

    def square(self) -> SectionK:
        return SectionK(2 * self.k, self.coeff * self.coeff)

    def to_json_obj(self) -> dict:
        return {"k": self.k, "coeff": self.coeff.to_json_obj()}

    @classmethod
    def from_json_obj(cls, obj) -> SectionK:
        if not isinstance(obj, Mapping) or "k" not in obj or "coeff" not in obj:
            raise SectionError("section JSON must be an object with keys 'k' and 'coeff'")
        return cls(obj["k"], ComplexSeries.from_json_obj(obj["coeff"]))

    @classmethod
    def from_json(cls, text: str) -> SectionK:
        return cls.from_json_obj(json.loads(text))

    def to_json(self) -> str:
        return dumps(self.to_json_obj())


@dataclass(frozen=True, eq=True)
class VerticalSection:
    """``coeff(z, w, s) * (z d/dz - w d/dw) / 2``; ``coeff == 2`` is the field ``v`` itself."""

    coeff: ComplexSeries

    def __post_init__(self):
        _check_chart(self.coeff, "vertical section")

    @classmethod
    def half_v(cls, vars=("z", "w"), trunc: int = 8) -> VerticalSection:
        return cls(ComplexSeries.constant(1.0, vars, trunc))

    def to_json_obj(self) -> dict:
        return {"coeff": self.coeff.to_json_obj()}

    @classmethod
    def from_json_obj(cls, obj) -> VerticalSection:
        if not isinstance(obj, Mapping) or "coeff" not in obj:
            raise SectionError("vertical section JSON must be an object with key 'coeff'")
        return cls(ComplexSeries.from_json_obj(obj["coeff"]))


@dataclass(frozen=True)
class ModelFamily:
    """``V = {|z| < c, |w| < c'}`` over ``D = {|t| < c c'}``; radii only gate numerics."""

    c: float = 1.0
    c_prime: float = 1.0
    params: tuple[str, ...] = ()

    def __post_init__(self):
        if not (self.c > 0 and self.c_prime > 0):
            raise DomainError(f"radii must be positive, got c={self.c}, c'={self.c_prime}")

    def in_base(self, t: complex) -> bool:
        return abs(t) < self.c * self.c_prime

    def annulus(self, t: complex) -> tuple[float, float]:
        """Radii ``(|t|/c', c)`` of the fibre annulus in the ``z`` coordinate."""
        if not self.in_base(t):
            raise DomainError(f"|t| = {abs(t)} is outside the base disc |t| < {self.c * self.c_prime}")
        return abs(t) / self.c_prime, self.c


# -- operations -----------------------------------------------------------------


def contract(lam: VerticalSection, eta: SectionK) -> SectionK:
    """Contract one factor of ``eta`` against ``lam``: ``g f`` in weight ``k - 1``.

    The one half in ``lam`` and ``alpha(v) = 2`` cancel.
    """
    if eta.k < 2:
        raise SectionError(
            "contraction of a weight-1 section would produce weight 0 (a function); "
            "sections have weight >= 1"
        )
    if lam.coeff.vars != eta.coeff.vars:
        raise SectionError(
            f"contract: variable-set mismatch {list(lam.coeff.vars)} vs {list(eta.coeff.vars)}"
        )
    return SectionK(eta.k - 1, lam.coeff * eta.coeff)


def fiber_pullback(eta: SectionK, zeta: str = "zeta", t: str = "t") -> ComplexSeries:
    """Coefficient of ``(dzeta/zeta)^k`` after ``z -> zeta``, ``w -> t/zeta``.

    The result lives in ``(zeta, t, s...)`` with ``zeta`` in Laurent mode down to
    ``-trunc`` and degree weights ``(1, 2, 1, ...)``; with these weights the
    truncation order carries over unchanged.
    """
    f = eta.coeff
    T = f.trunc
    names = (zeta, t) + eta.params
    if len(set(names)) != len(names):
        raise SectionError(f"fibre variable names {zeta!r}, {t!r} clash with parameters {list(eta.params)}")
    lower = (-T, 0) + tuple(f.lower[2:])
    weights = (1, 2) + tuple(f.weights[2:])
    ring = dict(vars=names, trunc=T, lower=lower, weights=weights)
    z, w = eta.chart
    subs = {
        z: ComplexSeries.monomial((1, 0) + (0,) * len(eta.params), 1.0, **ring),
        w: ComplexSeries.monomial((-1, 1) + (0,) * len(eta.params), 1.0, **ring),
    }
    for p in eta.params:
        subs[p] = ComplexSeries.variable(p, **ring)
    return compose(f, subs).scale(2 ** eta.k)


def zeta_constant_of_pullback(pulled: ComplexSeries, zeta: str = "zeta") -> ComplexSeries:
    """The ``zeta^0`` part of a fibre pullback, re-expressed with unit weights.

    Input weights ``(2, 1, ...)`` on ``(t, s...)`` and order ``T`` certify unit-weight
    order ``floor(T/2)``.
    """
    const = pulled.extract(zeta, 0)
    return const.reweight((1,) * len(const.vars), const.trunc // 2)


class BranchRestriction(NamedTuple):
    z_branch: ComplexSeries
    w_branch: ComplexSeries
    w_sign: int


def restrict_to_branches(eta: SectionK) -> BranchRestriction:
    """``(f(z, 0, s), f(0, w, s))``; the ``(-1)^k`` of the ``w`` branch is metadata only."""
    z, w = eta.chart
    return BranchRestriction(eta.coeff.set_zero([w]), eta.coeff.set_zero([z]), (-1) ** eta.k)


def residue_at_node(eta: SectionK) -> complex | ComplexSeries:
    """``f(0, 0, s)`` (the ``z``-branch value for odd ``k``).

    A complex number when the section has no base parameters, otherwise a series
    in the parameters.
    """
    r = eta.coeff.set_zero(eta.chart)
    if not r.vars:
        return r.constant_term()
    return r


def zeta_constant(eta: SectionK, t: str = "t") -> ComplexSeries:
    """``2^k sum a_mm(s) t^m``, the fibre ``zeta``-constant for any weight."""
    return diagonal(eta.coeff, t, *eta.chart).scale(2 ** eta.k)


def laur(eta: SectionK, t: str = "t") -> ComplexSeries:
    """``4 sum a_mm(s) t^m`` for a weight-2 section, in variables ``(t, s...)``."""
    if eta.k != 2:
        raise SectionError(f"Laur is defined for weight-2 sections only, got k={eta.k}")
    return zeta_constant(eta, t)


def vanishing_residue_check(eta: SectionK) -> bool:
    """True iff the residue ``f(0, 0, s)`` is the zero series."""
    if eta.k != 2:
        raise SectionError(f"the vanishing residue test applies to weight-2 sections, got k={eta.k}")
    r = residue_at_node(eta)
    if isinstance(r, ComplexSeries):
        return r.is_zero()
    return abs(r) < STRUCTURAL_ZERO


# -- contour oracle ---------------------------------------------------------------

CONTOUR_RADIUS = 0.3


def contour_points(trunc: int) -> int:
    return 2 * trunc + 5


def contour_zeta_constant(
    coeff: ComplexSeries,
    t: complex,
    radius: float = CONTOUR_RADIUS,
    n_points: int | None = None,
    params: Mapping[str, complex] | None = None,
) -> complex:
    """Mean of ``coeff(zeta, t/zeta, s)`` over ``n`` equispaced points of ``|zeta| = radius``.

    The trapezoid rule is exact for Laurent polynomials whose exponent span is
    below ``n``, which ``n = 2*trunc + 5`` guarantees.
    """
    n = contour_points(coeff.trunc) if n_points is None else n_points
    if n < 2 * coeff.trunc + 1:
        raise DomainError(f"{n} contour points cannot resolve a series truncated at order {coeff.trunc}")
    zeta = radius * np.exp(2j * np.pi * np.arange(n) / n)
    point = {coeff.vars[0]: zeta, coeff.vars[1]: t / zeta}
    for p in coeff.vars[2:]:
        if params is None or p not in params:
            raise DomainError(f"numeric contour evaluation needs a value for parameter {p!r}")
        point[p] = params[p]
    values = coeff.evaluate(point)
    # fixed summation order keeps results reproducible
    return complex(math.fsum(values.real) / n, math.fsum(values.imag) / n)


def laur_contour(eta: SectionK, t: complex, radius: float = CONTOUR_RADIUS, n_points: int | None = None,
                 params: Mapping[str, complex] | None = None) -> complex:
    """Numeric ``Laur(eta)(t)`` from the fibre contour: ``(1/2 pi i) oint 4 f dzeta/zeta``."""
    if eta.k != 2:
        raise SectionError(f"Laur is defined for weight-2 sections only, got k={eta.k}")
    return 4 * contour_zeta_constant(eta.coeff, t, radius, n_points, params)
