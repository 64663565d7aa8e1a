"""A genus-two degeneration: an elliptic curve joined at one node to a projective line
that carries a self-node.

Node ``n_E`` joins ``z = 0`` on the torus to ``w = 0`` on the line, with chart
``(u, v) = (z, w)`` and smoothing parameter ``t_E``.  Node ``n_P`` joins
``w = -1`` to ``w = 1``, with chart ``(u, v) = (w + 1, w - 1)`` and smoothing
parameter ``t_P``.  The torus modulus ``tau`` is fixed numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .family import SectionK, residue_at_node, restrict_to_branches
from .frames import GermSection, base_variable, solve_extension
from .pairing import plumbing_pairing_limit
from .series import ComplexSeries, DomainError, compose

NODES = ("n_E", "n_P")
SMOOTHING = {"n_E": "t_E", "n_P": "t_P"}
BASE_VARS = ("t_E", "t_P")
DEFAULT_TRUNC = 8
FOUR_PI = 4 * math.pi


class EllipticError(DomainError):
    pass


# -- Weierstrass function --------------------------------------------------------------


def _divisor_power_sum(n: int, p: int) -> int:
    return sum(d ** p for d in range(1, n + 1) if n % d == 0)


def eisenstein(tau: complex) -> tuple[complex, complex]:
    """Normalized ``E_4(tau)``, ``E_6(tau)`` by q-expansion summed until ``|q|^n < 1e-16``."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise EllipticError(f"tau must lie in the upper half plane, got {tau}")
    q = np.exp(2j * np.pi * tau)
    n_max = max(1, math.ceil(16 * math.log(10) / (2 * math.pi * tau.imag))) + 1
    e4 = 1 + 240 * sum(_divisor_power_sum(n, 3) * q ** n for n in range(1, n_max + 1))
    e6 = 1 - 504 * sum(_divisor_power_sum(n, 5) * q ** n for n in range(1, n_max + 1))
    return complex(e4), complex(e6)


@dataclass(frozen=True)
class WeierstrassData:
    """``wp`` for the lattice ``Z + tau Z`` as a Laurent series in ``z`` (lower bound -2)."""

    tau: complex
    g2: complex
    g3: complex
    laurent: ComplexSeries

    def evaluate(self, z) -> complex:
        return self.laurent.evaluate({"z": z})


def weierstrass_series(tau: complex, trunc: int = 16) -> WeierstrassData:
    """``z^-2 + sum_k c_k z^(2k-2)`` with ``c_2 = g2/20``, ``c_3 = g3/28`` and the usual recursion."""
    if trunc < 0 or trunc % 2:
        raise EllipticError(f"trunc must be a non-negative even integer, got {trunc}")
    e4, e6 = eisenstein(tau)
    g2 = (4 * math.pi ** 4 / 3) * e4
    g3 = (8 * math.pi ** 6 / 27) * e6
    c = {2: g2 / 20, 3: g3 / 28}
    terms = {(-2,): 1.0}
    k = 2
    while 2 * k - 2 <= trunc:
        if k >= 4:
            c[k] = 3 / ((2 * k + 1) * (k - 3)) * sum(c[m] * c[k - m] for m in range(2, k - 1))
        terms[(2 * k - 2,)] = c[k]
        k += 1
    return WeierstrassData(complex(tau), g2, g3, ComplexSeries(("z",), trunc, terms, lower=(-2,)))


def weierstrass_lattice(tau: complex, z, N: int = 60) -> complex:
    """Direct symmetric lattice sum over ``|m|, |n| <= N``."""
    m, n = np.meshgrid(np.arange(-N, N + 1), np.arange(-N, N + 1))
    w = (m + n * complex(tau)).ravel()
    w = w[w != 0]
    return complex(z ** -2 + np.sum(1 / (z - w) ** 2 - 1 / w ** 2))


def weierstrass_lattice_extrapolated(tau: complex, z, N: int = 60) -> complex:
    """Lattice sums at ``N/2, N, 2N`` combined to cancel the ``N^-2`` and ``N^-3`` tails."""
    if N % 2:
        raise EllipticError("N must be even")
    s1, s2, s3 = (weierstrass_lattice(tau, z, k) for k in (N // 2, N, 2 * N))
    r1 = (4 * s2 - s1) / 3
    r2 = (4 * s3 - s2) / 3
    return (8 * r2 - r1) / 7


# -- rational differentials on the line ----------------------------------------------------


@dataclass(frozen=True)
class RationalDifferential:
    """``(a - b) dw / ((w - a)(w - b))``."""

    a: complex
    b: complex

    def __post_init__(self):
        if self.a == self.b:
            raise EllipticError("the two poles of a rational differential must be distinct")

    def coefficient(self, w):
        return (self.a - self.b) / ((w - self.a) * (w - self.b))


def rational_residue(omega: RationalDifferential, p: complex) -> complex:
    if p == omega.a:
        return 1.0 + 0j
    if p == omega.b:
        return -1.0 + 0j
    return 0j


# -- germ construction ---------------------------------------------------------------------


def _univariate(terms: dict[int, complex], name: str, trunc: int) -> ComplexSeries:
    return ComplexSeries((name,), trunc, {(k,): c for k, c in terms.items()})


def _at_origin(value) -> complex:
    return value.constant_term() if isinstance(value, ComplexSeries) else complex(value)


def _series_from_rational(num, den, name: str, trunc: int) -> ComplexSeries:
    """``num / den`` for polynomial coefficient lists (lowest degree first), by series division."""
    def poly(cs):
        return ComplexSeries((name,), trunc, {(k,): c for k, c in enumerate(cs) if k <= trunc})

    return poly(num) * poly(den).reciprocal()


def _germ_from_branches(fu: ComplexSeries, fv: ComplexSeries, params: tuple[str, ...], trunc: int) -> SectionK:
    """The germ ``f(u, 0) + f(0, v) - f(0, 0)`` with no mixed terms, in ``(u, v) + params``."""
    r0, r1 = fu.constant_term(), fv.constant_term()
    if abs(r0 - r1) > 1e-12:
        raise EllipticError(f"branch values {r0} and {r1} disagree at the node (residue matching fails)")
    ring = ("u", "v") + params
    terms: dict = {}
    for (k,), c in fu.items():
        terms[(k, 0) + (0,) * len(params)] = c
    for (k,), c in fv.items():
        if k:
            terms[(0, k) + (0,) * len(params)] = c
    return SectionK(2, ComplexSeries(ring, trunc, terms))


def _params_at(node: str) -> tuple[str, ...]:
    return tuple(p for p in BASE_VARS if p != SMOOTHING[node])


@dataclass(frozen=True)
class EllipticFamilyGerm:
    tau: complex
    trunc: int
    weierstrass: WeierstrassData
    beta_E: GermSection
    beta_P: GermSection
    beta_dz: GermSection
    simple_pole_coefficients: dict

    @property
    def sections(self) -> dict[str, GermSection]:
        return {"beta_E": self.beta_E, "beta_P": self.beta_P, "beta_dz": self.beta_dz}

    def residue_table(self) -> dict[str, dict[str, complex]]:
        """Residues on the nodal fibre (all smoothing parameters zero)."""
        return {name: {n: _at_origin(residue_at_node(s.germs[n])) for n in NODES} for name, s in self.sections.items()}

    def laur_table(self) -> dict[str, dict[str, complex]]:
        """``Laur`` at ``t = 0`` of every section at every node."""
        return {
            name: {n: s.laur_at(n, BASE_VARS).constant_term() for n in NODES}
            for name, s in self.sections.items()
        }

    def cotangent_sections(self) -> dict[str, GermSection]:
        T = self.trunc
        tE = base_variable("t_E", BASE_VARS, T)
        tP = base_variable("t_P", BASE_VARS, T)
        return {
            "t_E*beta_E": self.beta_E.times_base(tE),
            "t_P*beta_P": self.beta_P.times_base(tP),
            "beta_dz": self.beta_dz,
        }


EXPECTED_LAUR = {
    "beta_E": {"n_E": -1 / math.pi, "n_P": 0.0},
    "beta_P": {"n_E": 0.0, "n_P": -1 / math.pi},
    "beta_dz": {"n_E": 0.0, "n_P": 0.0},
}

EXPECTED_RESIDUES = {
    "beta_E": {"n_E": -1 / FOUR_PI, "n_P": 0.0},
    "beta_P": {"n_E": 0.0, "n_P": -1 / FOUR_PI},
    "beta_dz": {"n_E": 0.0, "n_P": 0.0},
}


def _quad_coefficient_on_line(w):
    """``omega_{0,-1} omega_{0,1} = -dw^2 / (w^2 (w^2 - 1))``."""
    return RationalDifferential(0, -1).coefficient(w) * RationalDifferential(0, 1).coefficient(w)


def build_family_germ(tau: complex, trunc: int = DEFAULT_TRUNC) -> EllipticFamilyGerm:
    """Node-chart germs of ``beta_E``, ``beta_P``, ``beta_dz`` on the nodal fibre, with a residue self-test."""
    if trunc < 2:
        raise EllipticError("germ truncation must be at least 2")
    wp = weierstrass_series(tau, trunc + 2 if trunc % 2 == 0 else trunc + 3)
    c = -1 / FOUR_PI
    T = trunc

    # beta_E: (-1/4pi)(wp dz^2 + omega_{0,-1} omega_{0,1}) against (du/u)^2 and (dv/v)^2.
    shifted = wp.laurent.mul_monomial((2,))
    u2wp = ComplexSeries(("u",), T, {e: v for e, v in shifted.items() if e[0] <= T}).scale(c)
    line_at_0 = _series_from_rational([1], [1, 0, -1], "v", T).scale(c)  # w^2 * (-1/(w^2(w^2-1)))
    E_nE = _germ_from_branches(u2wp, line_at_0, _params_at("n_E"), T)
    # u^2 * coefficient at w = u - 1, and v^2 * coefficient at w = v + 1: both have simple poles.
    u2_at_m1 = _series_from_rational([0, -1], [-2, 5, -4, 1], "u", T).scale(c)
    v2_at_p1 = _series_from_rational([0, -1], [2, 5, 4, 1], "v", T).scale(c)
    E_nP = _germ_from_branches(u2_at_m1, v2_at_p1, _params_at("n_P"), T)

    # beta_P: (-1/4pi) omega_{-1,1}^2 = (-1/pi) dw^2 / ((w+1)^2 (w-1)^2), zero on the torus.
    P_nP = _germ_from_branches(
        _series_from_rational([-1 / math.pi], [4, -4, 1], "u", T),
        _series_from_rational([-1 / math.pi], [4, 4, 1], "v", T),
        _params_at("n_P"), T,
    )
    zero_u = ComplexSeries.zero(("u",), T)
    P_nE = _germ_from_branches(zero_u, _series_from_rational([0, 0, -1 / math.pi], [1, 0, -2, 0, 1], "v", T),
                               _params_at("n_E"), T)

    # beta_dz: -2i dz^2 on the torus, zero on the line.
    dz_nE = _germ_from_branches(_univariate({2: -2j}, "u", T), ComplexSeries.zero(("v",), T), _params_at("n_E"), T)
    dz_nP = _germ_from_branches(zero_u, ComplexSeries.zero(("v",), T), _params_at("n_P"), T)

    germ = EllipticFamilyGerm(
        complex(tau), T, wp,
        GermSection({"n_E": E_nE, "n_P": E_nP}, SMOOTHING),
        GermSection({"n_E": P_nE, "n_P": P_nP}, SMOOTHING),
        GermSection({"n_E": dz_nE, "n_P": dz_nP}, SMOOTHING),
        {"beta_E@n_P": {"u": u2_at_m1.coefficient((1,)), "v": v2_at_p1.coefficient((1,))}},
    )
    _self_test(germ)
    return germ


def _self_test(germ: EllipticFamilyGerm):
    table = germ.residue_table()
    for name, row in EXPECTED_RESIDUES.items():
        for node, want in row.items():
            if abs(table[name][node] - want) > 1e-12:
                raise EllipticError(f"residue of {name} at {node} is {table[name][node]}, expected {want}")
    laurs = germ.laur_table()
    for name, row in EXPECTED_LAUR.items():
        for node, want in row.items():
            if abs(laurs[name][node] - want) > 1e-12:
                raise EllipticError(f"Laur of {name} at {node} is {laurs[name][node]}, expected {want}")
    # -pi Laur is the identity on (beta_E, beta_P); beta_dz needs no correction
    M = tuple(tuple(ComplexSeries.constant(-math.pi * laurs[s][n], BASE_VARS, 0)
                    for s in ("beta_E", "beta_P")) for n in NODES)
    targets = [ComplexSeries.constant(math.pi * laurs["beta_dz"][n], BASE_VARS, 0) for n in NODES]
    b = solve_extension(targets, M)
    if any(x.max_abs() > 1e-12 for x in b):
        raise EllipticError(f"beta_dz needs a nonzero Laurent correction {b}")


# -- involutions ------------------------------------------------------------------------------

Which = Literal["iota_E", "iota_P"]

# chart substitutions (u, v) -> (u', v') per node and parameter signs
_ACTIONS = {
    "iota_E": {"n_E": ((-1, "u"), (1, "v")), "n_P": ((1, "u"), (1, "v"))},
    "iota_P": {"n_E": ((1, "u"), (-1, "v")), "n_P": ((-1, "v"), (-1, "u"))},
}
PARAMETER_MAP = {"t_E": -1, "t_P": 1, "tau": 1}


def _pull_back(germ: SectionK, action) -> SectionK:
    ring = germ.coeff.vars
    T = germ.coeff.trunc
    subs = {}
    for target, (sign, source) in zip(("u", "v"), action):
        subs[target] = ComplexSeries.variable(source, ring, T).scale(sign)
    for p in ring[2:]:
        subs[p] = ComplexSeries.variable(p, ring, T).scale(PARAMETER_MAP[p])
    # (du/u - dv/v)^2 is unchanged by sign flips and by swapping u and v
    return SectionK(germ.k, compose(germ.coeff, subs))


def _act(section: GermSection, which: Which) -> GermSection:
    return GermSection({n: _pull_back(g, _ACTIONS[which][n]) for n, g in section.germs.items()}, section.smoothing)


@dataclass(frozen=True)
class InvolutionReport:
    which: str
    parameter_map: dict
    section_signs: dict
    max_residual: float
    squares_to_identity: bool


def involution_action(germ: EllipticFamilyGerm, which: Which, tol: float = 1e-12):
    """Pull every section and the cotangent frame back along the involution.

    Returns the transformed germ and a report of the sign each cotangent
    section picks up.
    """
    if which not in _ACTIONS:
        raise EllipticError(f"unknown involution {which!r}; choose iota_E or iota_P")
    moved = {name: _act(s, which) for name, s in germ.sections.items()}
    signs = {}
    worst = 0.0
    for name, s in list(germ.sections.items()) + list(germ.cotangent_sections().items()):
        image = _act(s, which)
        sign, res = _detect_sign(s, image)
        signs[name] = sign
        worst = max(worst, res)
    twice = all(
        _act(_act(s, which), which).germs[n].coeff.allclose(s.germs[n].coeff, atol=tol)
        for s in list(germ.sections.values()) + list(germ.cotangent_sections().values())
        for n in NODES
    )
    new_germ = EllipticFamilyGerm(germ.tau, germ.trunc, germ.weierstrass, moved["beta_E"], moved["beta_P"],
                                  moved["beta_dz"], germ.simple_pole_coefficients)
    report = InvolutionReport(which, dict(PARAMETER_MAP), signs, worst, twice)
    return new_germ, report


def _detect_sign(before: GermSection, after: GermSection) -> tuple[int | None, float]:
    best = (None, math.inf)
    for sign in (1, -1):
        res = max((after.germs[n].coeff - before.germs[n].coeff.scale(sign)).max_abs() for n in NODES)
        if res < best[1]:
            best = (sign, res)
    return best


# -- cotangent frame ----------------------------------------------------------------------

COTANGENT_ROWS = ("d/dt_E", "d/dt_P", "d/dtau")
COTANGENT_COLUMNS = ("t_E*beta_E", "t_P*beta_P", "beta_dz")


@dataclass(frozen=True)
class CotangentTable:
    values: np.ndarray
    provenance: tuple[tuple[str, ...], ...]


def vanishes_on_nodal_fibre(section: GermSection) -> bool:
    """Both branch restrictions vanish at every node once all smoothing parameters are zero."""
    for node, germ in section.germs.items():
        f = germ.coeff.set_zero(_params_at(node))
        branches = restrict_to_branches(SectionK(germ.k, f))
        if not (branches.z_branch.is_zero() and branches.w_branch.is_zero()):
            return False
    return True


def cotangent_frame_table(germ: EllipticFamilyGerm) -> CotangentTable:
    """Pairings of ``(d/dt_E, d/dt_P, d/dtau)`` with ``(t_E beta_E, t_P beta_P, beta_dz)``.

    The ``t`` rows are plumbing-tangent limits at the origin of the base.  In
    the ``tau`` row the two ``beta`` columns vanish because those sections are
    zero on the nodal fibre; the ``(tau, beta_dz)`` entry is the classical
    normalization of ``-2i dz^2`` as the cotangent of ``tau`` and is recorded
    rather than computed.
    """
    cols = germ.cotangent_sections()
    values = np.zeros((3, 3), dtype=complex)
    prov = [["computed"] * 3 for _ in range(3)]
    for i, node in enumerate(NODES):
        for j, name in enumerate(COTANGENT_COLUMNS):
            values[i, j] = _at_origin(plumbing_pairing_limit(cols[name].germs[node]))
    for j, name in enumerate(COTANGENT_COLUMNS[:2]):
        if not vanishes_on_nodal_fibre(cols[name]):
            raise EllipticError(f"{name} does not vanish on the nodal fibre; its tau pairing is not determined")
        values[2, j] = 0
    values[2, 2] = 1
    prov[2][2] = "paper-sourced"
    return CotangentTable(values, tuple(tuple(r) for r in prov))
