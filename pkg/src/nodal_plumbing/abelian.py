"""Period of an abelian differential across a plumbed node, and its t-derivative.

The global surface enters only through one constant ``p_hat``; the rest is the
local model ``omega_t = (1/4 pi i)(dz/z - dw/w)`` at the node.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .family import SectionK, laur, vanishing_residue_check
from .pairing import plumbing_pairing
from .series import ComplexSeries, DomainError

LOCAL_COEFFICIENT = 1 / (4j * math.pi)


class AbelianError(DomainError):
    pass


def local_differential(trunc: int = 4, vars=("z", "w")) -> SectionK:
    return SectionK(1, ComplexSeries.constant(LOCAL_COEFFICIENT, vars, trunc))


@dataclass(frozen=True)
class PeriodModel:
    p_hat: complex
    t: complex
    omega_local: SectionK = field(default_factory=local_differential)

    def __post_init__(self):
        if self.t == 0:
            raise AbelianError("t = 0: the period has a logarithmic singularity")
        c = self.omega_local.coeff
        if self.omega_local.k != 1 or len(c) != 1 or c.constant_term() != LOCAL_COEFFICIENT:
            raise AbelianError("the local differential must be exactly (1/4 pi i)(dz/z - dw/w)")


def period(model: PeriodModel) -> complex:
    """``p_hat + log(t) / 2 pi i`` on the principal branch."""
    return complex(model.p_hat) + cmath.log(model.t) / (2j * math.pi)


def derivative_two_ways(model: PeriodModel) -> tuple[complex, complex]:
    """``d/dt exp(2 pi i P)`` directly and through the plumbing-tangent pairing.

    ``exp(2 pi i P) = exp(2 pi i p_hat) t`` so the first value is
    ``exp(2 pi i p_hat)``.  The second is
    ``exp(2 pi i P) 2 pi i (-pi/t) Laur(-2i omega_t^2)``.
    """
    direct = cmath.exp(2j * math.pi * model.p_hat)
    squared = model.omega_local.square().scale(-2j)
    via_pairing = cmath.exp(2j * math.pi * period(model)) * 2j * math.pi * plumbing_pairing(squared, model.t)
    return direct, via_pairing


def laur_of_square(trunc: int = 4) -> complex:
    """``Laur(-2i omega_t^2)``; equals ``i / 2 pi^2``."""
    return laur(local_differential(trunc).square().scale(-2j)).constant_term()


@dataclass(frozen=True)
class DtIdentityReport:
    coefficient: complex
    expected_coefficient: complex
    laur_t_coefficient: complex
    vanishing_residue: bool
    pairing: complex

    @property
    def ok(self) -> bool:
        return (
            abs(self.coefficient - self.expected_coefficient) <= 1e-15
            and self.vanishing_residue
            and abs(self.pairing - 1) <= 1e-14
        )


def dt_section(trunc: int = 4) -> SectionK:
    """``4 pi t omega_t^2`` with ``t = zw`` in the chart."""
    sq = local_differential(trunc).square()
    zw = ComplexSeries.monomial((1, 1), 1.0, ("z", "w"), trunc)
    return sq.times(zw).scale(4 * math.pi)


def dt_identity(t: complex = 1e-3, trunc: int = 4) -> DtIdentityReport:
    """Check that ``4 pi t omega_t^2`` pairs to 1 with ``d/dt``."""
    eta = dt_section(trunc)
    L = laur(eta)
    return DtIdentityReport(
        coefficient=eta.coeff.coefficient((1, 1)),
        expected_coefficient=-1 / (4 * math.pi),
        laur_t_coefficient=L.coefficient((1,)),
        vanishing_residue=vanishing_residue_check(eta),
        pairing=plumbing_pairing(eta, t),
    )
