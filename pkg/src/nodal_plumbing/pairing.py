"""Plumbing-tangent pairings, the Laurent pairing and comparison of two plumbings.

Three routes evaluate the initial tangent of a plumbing ``F(z) G(w) = tau``
against a vanishing-residue quadratic differential, each tagged by method:

* ``closed_form`` evaluates the published expression verbatim;
* ``coordinate_change_oracle`` rewrites the section in the chart
  ``(u, v) = (F(z), G(w))`` by series substitution and reads off the
  ``uv`` coefficient;
* ``finite_difference`` evaluates the Laurent pairing numerically on fibre
  contours and extrapolates ``-pi LP / tau`` to ``tau = 0``.

The last two are independent of one another and are the consistency
standard; the closed form is reported alongside (it differs from them by a
constant structure, see the README).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

from .family import (
    SectionError,
    SectionK,
    VerticalSection,
    contour_zeta_constant,
    contract,
    fiber_pullback,
    laur,
    residue_at_node,
    vanishing_residue_check,
    zeta_constant_of_pullback,
)
from .series import STRUCTURAL_ZERO, ComplexSeries, DomainError, compose, partial, reversion

Method = Literal["closed_form", "coordinate_change_oracle", "finite_difference"]


class PairingError(DomainError):
    pass


@dataclass(frozen=True)
class CoordinateChange:
    """Local coordinates ``F(z)``, ``G(w)`` at the two preimages of a node."""

    F: ComplexSeries
    G: ComplexSeries

    def __post_init__(self):
        for name, s in (("F", self.F), ("G", self.G)):
            if len(s.vars) != 1 or s.lower != (0,):
                raise PairingError(f"{name} must be a univariate power series")
            if abs(s.constant_term()) >= STRUCTURAL_ZERO:
                raise PairingError(f"{name}(0) must vanish")
            if s.trunc < 2:
                raise PairingError(f"{name} needs truncation order >= 2 (second-order data)")
            if abs(s.coefficient((1,))) < STRUCTURAL_ZERO:
                raise PairingError(f"{name}'(0) must be nonzero (degenerate coordinate change)")

    @classmethod
    def identity(cls, trunc: int = 6) -> CoordinateChange:
        return cls(ComplexSeries.variable("z", ("z",), trunc), ComplexSeries.variable("w", ("w",), trunc))

    @classmethod
    def from_coefficients(cls, F: Sequence[complex], G: Sequence[complex], trunc: int | None = None):
        """``F = F[0] z + F[1] z^2 + ...`` and likewise ``G``."""
        T = trunc if trunc is not None else max(len(F), len(G), 2)
        f = ComplexSeries(("z",), T, {(k + 1,): c for k, c in enumerate(F)})
        g = ComplexSeries(("w",), T, {(k + 1,): c for k, c in enumerate(G)})
        return cls(f, g)

    @property
    def alpha(self) -> complex:
        """F'(0)."""
        return self.F.coefficient((1,))

    @property
    def beta(self) -> complex:
        """F''(0) / 2."""
        return self.F.coefficient((2,))

    @property
    def gamma(self) -> complex:
        return self.G.coefficient((1,))

    @property
    def delta(self) -> complex:
        return self.G.coefficient((2,))


@dataclass(frozen=True)
class PairingResult:
    value: complex | ComplexSeries
    method: Method

    def to_json_obj(self) -> dict:
        v = self.value
        if isinstance(v, ComplexSeries):
            return {"method": self.method, "value": v.to_json_obj()}
        v = complex(v)
        return {"method": self.method, "re": v.real, "im": v.imag}


def _scalar_or_series(s: ComplexSeries):
    return s.constant_term() if not s.vars else s


def _specialize(phi: SectionK, params: Mapping[str, complex] | None) -> SectionK:
    """Drop base parameters by evaluating them (exactly at zero, numerically otherwise)."""
    if not phi.params:
        return phi
    params = dict(params or {})
    missing = [p for p in phi.params if p not in params]
    if missing:
        raise PairingError(f"values needed for base parameters {missing}")
    zero = [p for p in phi.params if params[p] == 0]
    coeff = phi.coeff.set_zero(zero) if zero else phi.coeff
    rest = coeff.vars[2:]
    if rest:
        z, w = phi.chart
        terms: dict = {}
        for e, c in coeff.items():
            scale = 1.0
            for name, k in zip(rest, e[2:]):
                scale *= complex(params[name]) ** k
            key = e[:2]
            terms[key] = terms.get(key, 0j) + c * scale
        coeff = ComplexSeries((z, w), coeff.trunc, terms)
    return SectionK(phi.k, coeff)


# -- Lemma-level pairings -----------------------------------------------------------


def plumbing_pairing(eta: SectionK, t: complex, params: Mapping[str, complex] | None = None) -> complex:
    """``(d/dt, eta) = (-pi / t) Laur(eta)(t)`` for ``t != 0``."""
    t = complex(t)
    if t == 0:
        raise PairingError("the plumbing pairing has a pole at t = 0; use plumbing_pairing_limit")
    if abs(t) >= 1:
        raise PairingError(f"|t| = {abs(t)} is outside the base disc")
    L = laur(eta)
    point = {L.vars[0]: t}
    for p in L.vars[1:]:
        if params is None or p not in params:
            raise PairingError(f"a value is needed for base parameter {p!r}")
        point[p] = params[p]
    return (-math.pi / t) * L.evaluate(point)


def plumbing_pairing_limit(eta: SectionK) -> complex | ComplexSeries:
    """``lim_{t->0} (-pi/t) Laur(eta) = -4 pi a_11(s)`` for a vanishing-residue section."""
    if not vanishing_residue_check(eta):
        raise PairingError(
            f"the limit exists only for vanishing residue; residue is {residue_at_node(eta)}"
        )
    L = laur(eta)
    if L.trunc < 1:
        raise PairingError("section truncation too low to determine the t-linear Laur coefficient")
    return _scalar_or_series(L.extract(L.vars[0], 1).scale(-math.pi))


def dual_vertical(eta: SectionK) -> VerticalSection:
    """The vertical section ``(2f)^{-1} (z d/dz - w d/dw)`` dual to ``eta = f alpha``."""
    if eta.k != 1:
        raise PairingError(f"duality pairs weight-1 sections with vertical sections, got k={eta.k}")
    if abs(eta.coeff.set_zero(eta.chart).constant_term()) < STRUCTURAL_ZERO:
        raise PairingError("no dual: the coefficient vanishes at the node (reciprocal does not exist)")
    return VerticalSection(eta.coeff.reciprocal())


def vertical_dual(lam: VerticalSection) -> SectionK:
    """Inverse of :func:`dual_vertical`: the weight-1 section with coefficient ``1/g``."""
    if abs(lam.coeff.set_zero(lam.coeff.vars[:2]).constant_term()) < STRUCTURAL_ZERO:
        raise PairingError("no dual: the vertical section vanishes at the node")
    return SectionK(1, lam.coeff.reciprocal())


def adjoint_residue(lam: VerticalSection) -> complex | ComplexSeries:
    """Residue of the dual section, ``1 / g(0, 0, s)``."""
    return residue_at_node(vertical_dual(lam))


def admissible_check(lam: VerticalSection, tol: float = 1e-12) -> bool:
    """True iff ``g(0, 0, s) == 1``, i.e. the dual periods tend to ``4 pi i``."""
    g0 = lam.coeff.set_zero(lam.coeff.vars[:2])
    if abs(g0.constant_term()) < STRUCTURAL_ZERO:
        raise PairingError("admissibility needs a vertical section nonzero at the node")
    diff = g0 - 1.0
    return diff.max_abs() <= tol


def lp_pairing(lam: VerticalSection, phi: SectionK) -> ComplexSeries:
    """``LP(lam, phi) = (1/pi i) oint lam phi`` as a series in ``(t, s...)``.

    The contraction is a weight-1 section; its fibre pullback's ``zeta``-constant
    times ``2 pi i / pi i = 2`` is the pairing.
    """
    if phi.k != 2:
        raise PairingError(f"the Laurent pairing takes a weight-2 section, got k={phi.k}")
    if not admissible_check(lam):
        raise PairingError("the vertical section is not admissible (g(0,0,s) != 1)")
    pulled = fiber_pullback(contract(lam, phi))
    return zeta_constant_of_pullback(pulled).scale(2)


def lp_numeric(lam: VerticalSection, phi: SectionK, t: complex, radius: float | None = None,
               n_points: int | None = None) -> complex:
    """``LP(lam, phi)(t)`` from trapezoid sums on the fibre circle ``|zeta| = radius``."""
    if phi.k != 2:
        raise PairingError(f"the Laurent pairing takes a weight-2 section, got k={phi.k}")
    if abs(t) == 0 or abs(t) >= 1:
        raise PairingError(f"t = {t} is outside the punctured base disc")
    r = math.sqrt(abs(t)) if radius is None else radius
    gf = contract(lam, phi).coeff
    # oint g f 2 dzeta/zeta = 2 pi i * 2 * mean(g f)
    return 4 * contour_zeta_constant(gf, t, r, n_points)


# -- comparing plumbings ---------------------------------------------------------


def _second_order_data(phi: SectionK):
    if phi.k != 2:
        raise PairingError(f"a weight-2 section is required, got k={phi.k}")
    if phi.params:
        raise PairingError("specialize base parameters first (pass params=...)")
    if not vanishing_residue_check(phi):
        raise PairingError(
            f"the initial plumbing tangent needs a vanishing-residue section; residue is {residue_at_node(phi)}"
        )
    if phi.coeff.trunc < 2:
        raise PairingError("second-order data needed: section truncation must be >= 2")


def compplum_closed_form(change: CoordinateChange, phi: SectionK,
                         params: Mapping[str, complex] | None = None) -> PairingResult:
    """The published expression, evaluated verbatim from the derivatives."""
    phi = _specialize(phi, params)
    _second_order_data(phi)
    z, w = phi.chart
    f = phi.coeff
    origin = (0, 0)
    f_z = partial(f, z).coefficient(origin)
    f_w = partial(f, w).coefficient(origin)
    f_zw = partial(partial(f, z), w).coefficient(origin)
    d1F, d2F = change.alpha, 2 * change.beta
    d1G, d2G = change.gamma, 2 * change.delta
    value = math.pi * (d1F * d1G) ** -2 * (-d1F * d1G * f_zw + 0.5 * d2F * f_w + 0.5 * d2G * f_z)
    return PairingResult(value, "closed_form")


def _log_derivative_of_inverse(F: ComplexSeries, name: str) -> ComplexSeries:
    """``x (F^{-1})'(x) / F^{-1}(x)``: the factor with ``dz/z = L(u) du/u`` for ``u = F(z)``."""
    inv = reversion(F, name)
    h = inv.mul_monomial((-1,))  # F^{-1}(u) / u, a unit
    u = ComplexSeries.variable(name, (name,), h.trunc)
    return 1.0 + u * partial(h, name).truncate(h.trunc) * h.reciprocal()


def uv_chart_coefficient(change: CoordinateChange, phi: SectionK) -> ComplexSeries:
    """The coefficient ``f~(u, v)`` of ``phi`` against ``(du/u - dv/v)^2``.

    On a fibre of ``uv = tau`` one has ``du/u = -dv/v``, so
    ``dz/z - dw/w = (L_F(u) + L_G(v)) du/u = (L_F + L_G)/2 (du/u - dv/v)``
    with ``z = F^{-1}(u)``, ``w = G^{-1}(v)``.
    """
    T = min(phi.coeff.trunc, change.F.trunc, change.G.trunc)
    ring = ("u", "v")
    Finv = reversion(change.F.truncate(T), "u")
    Ginv = reversion(change.G.truncate(T), "v")
    LF = _log_derivative_of_inverse(change.F.truncate(T), "u")
    LG = _log_derivative_of_inverse(change.G.truncate(T), "v")
    z, w = phi.chart
    pulled = compose(phi.coeff, {z: Finv.with_vars(ring), w: Ginv.with_vars(ring)})
    factor = LF.with_vars(ring) + LG.with_vars(ring)
    return pulled * (factor * factor).scale(0.25)


def compplum_coordinate_oracle(change: CoordinateChange, phi: SectionK,
                               params: Mapping[str, complex] | None = None) -> PairingResult:
    """``-4 pi a~_11`` with ``a~_11`` the ``uv`` coefficient in the ``(F(z), G(w))`` chart."""
    phi = _specialize(phi, params)
    _second_order_data(phi)
    if phi.coeff.trunc < 3 and min(change.F.trunc, change.G.trunc) < 3:
        pass  # order 2 already determines the uv coefficient
    tilde = uv_chart_coefficient(change, phi)
    a11 = tilde.coefficient((1, 1))
    return PairingResult(-4 * math.pi * a11, "coordinate_change_oracle")


def dual_of_plumbing_differential(change: CoordinateChange, vars=("z", "w"), trunc: int = 6) -> VerticalSection:
    """First-order expansion of the vertical section dual to ``du/u - dv/v``:

    ``(1 - F''(0)/(2F'(0)) z - G''(0)/(2G'(0)) w) (z d/dz - w d/dw)/2``.
    """
    terms = {
        (0, 0): 1.0,
        (1, 0): -change.beta / change.alpha,
        (0, 1): -change.delta / change.gamma,
    }
    return VerticalSection(ComplexSeries(vars, trunc, terms))


def neville_at_zero(xs: Sequence[float], ys: Sequence[complex]) -> complex:
    """Polynomial extrapolation to ``x = 0`` (Richardson tableau for general steps)."""
    n = len(xs)
    p = [complex(y) for y in ys]
    for level in range(1, n):
        for i in range(n - level):
            x0, x1 = xs[i], xs[i + level]
            p[i] = (x0 * p[i + 1] - x1 * p[i]) / (x0 - x1)
    return p[0]


DEFAULT_TAUS = (1e-2, 5e-3, 2.5e-3)


def compplum_finite_difference(
    change: CoordinateChange,
    phi: SectionK,
    taus: Sequence[float] = DEFAULT_TAUS,
    params: Mapping[str, complex] | None = None,
    lam: VerticalSection | None = None,
) -> PairingResult:
    """Extrapolate ``-pi LP(eta_dual, phi)(t) / tau`` to ``tau = 0`` with ``t = tau / (F'(0) G'(0))``."""
    phi = _specialize(phi, params)
    _second_order_data(phi)
    taus = [float(x) for x in taus]
    if len(taus) < 2:
        raise PairingError("at least two tau values are needed for extrapolation")
    if any(x <= 0 for x in taus) or any(b >= a for a, b in zip(taus, taus[1:])):
        raise PairingError(f"tau sequence must be positive and strictly decreasing, got {taus}")
    norm = change.alpha * change.gamma
    if lam is None:
        lam = dual_of_plumbing_differential(change, phi.chart, phi.coeff.trunc)
    values = []
    for tau in taus:
        t = tau / norm
        if abs(t) >= 0.09:
            raise PairingError(f"tau = {tau} maps to |t| = {abs(t)}, outside the validity disc |t| < 0.09")
        values.append(-math.pi * lp_numeric(lam, phi, t) / tau)
    return PairingResult(neville_at_zero(taus, values), "finite_difference")


def compplum_all(change: CoordinateChange, phi: SectionK, taus: Sequence[float] = DEFAULT_TAUS,
                 params: Mapping[str, complex] | None = None) -> list[PairingResult]:
    return [
        compplum_closed_form(change, phi, params),
        compplum_coordinate_oracle(change, phi, params),
        compplum_finite_difference(change, phi, taus, params),
    ]


def normal_cocycle(change: CoordinateChange) -> complex:
    """``(F'(0) G'(0))^{-1}``, relating the tangents of the two plumbings."""
    return 1 / (change.alpha * change.gamma)


# -- collar ------------------------------------------------------------------------


def collar_length(t: complex) -> float:
    """Leading-order hyperbolic length ``2 pi^2 / log(1/|t|)`` of the collar core geodesic."""
    r = abs(t)
    if not 0 < r < 1:
        raise PairingError(f"collar length needs 0 < |t| < 1, got |t| = {r}")
    return 2 * math.pi ** 2 / math.log(1 / r)


def collar_norm(t: complex, lp_value: complex) -> float:
    """``exp(2 pi^2 / l(t)) |LP|``, equal to ``|LP| / |t|`` at leading order."""
    ell = collar_length(t)
    return math.exp(2 * math.pi ** 2 / ell) * abs(lp_value)


def period_of_dual(lam: VerticalSection, t: complex) -> complex:
    """``oint lam^vee`` on a fibre loop, from the ``zeta``-constant of ``2/g``."""
    dual = vertical_dual(lam)
    return 2j * math.pi * 2 * contour_zeta_constant(dual.coeff, t, math.sqrt(abs(t)))


