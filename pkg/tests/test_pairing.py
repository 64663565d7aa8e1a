import math

import pytest

from nodal_plumbing.family import SectionK, VerticalSection, laur
from nodal_plumbing.pairing import (
    CoordinateChange,
    PairingError,
    admissible_check,
    adjoint_residue,
    collar_length,
    collar_norm,
    compplum_closed_form,
    compplum_coordinate_oracle,
    compplum_finite_difference,
    dual_vertical,
    lp_numeric,
    lp_pairing,
    neville_at_zero,
    normal_cocycle,
    plumbing_pairing,
    plumbing_pairing_limit,
    uv_chart_coefficient,
    vertical_dual,
)
from nodal_plumbing.series import ComplexSeries

PI = math.pi
ZW = ("z", "w")


def sec(terms, k=2, trunc=6, vars=ZW):
    return SectionK(k, ComplexSeries(vars, trunc, terms))


def vert(terms, trunc=6):
    return VerticalSection(ComplexSeries(ZW, trunc, terms))


def change(F, G, trunc=6):
    return CoordinateChange.from_coefficients(F, G, trunc)


IDENTITY = change([1], [1])
ZW_SECTION = sec({(1, 1): 1})


class TestPlumbingPairing:
    def test_quarter(self):
        assert plumbing_pairing(sec({(0, 0): 0.25}), 0.01) == pytest.approx(-100 * PI, rel=1e-15)

    @pytest.mark.parametrize("t", [1e-4, 0.01, 0.3j, -0.2 + 0.1j])
    def test_zw_pairs_to_minus_four_pi(self, t):
        assert plumbing_pairing(ZW_SECTION, t) == pytest.approx(-4 * PI, abs=1e-14)

    def test_zero(self):
        assert plumbing_pairing(sec({}), 0.1) == 0

    def test_pole_at_zero(self):
        with pytest.raises(PairingError):
            plumbing_pairing(ZW_SECTION, 0)

    def test_limit_values(self):
        assert plumbing_pairing_limit(ZW_SECTION) == pytest.approx(-4 * PI)
        assert plumbing_pairing_limit(sec({(2, 2): 1})) == 0
        assert plumbing_pairing_limit(sec({(1, 0): 1, (0, 1): 1})) == 0

    def test_limit_rejects_residue_with_value(self):
        with pytest.raises(PairingError, match="0.25"):
            plumbing_pairing_limit(sec({(0, 0): 0.25}))

    def test_limit_keeps_parameters(self):
        eta = SectionK(2, ComplexSeries(("z", "w", "s"), 6, {(1, 1, 1): 1, (1, 1, 0): 2}))
        lim = plumbing_pairing_limit(eta)
        assert lim.vars == ("s",)
        assert lim.terms == pytest.approx({(0,): -8 * PI, (1,): -4 * PI})


class TestDuality:
    def test_half_v_dual_is_alpha(self):
        lam = VerticalSection.half_v(ZW, 6)
        assert vertical_dual(lam) == sec({(0, 0): 1}, k=1)
        assert adjoint_residue(lam) == 1

    def test_geometric_series(self):
        dual = vertical_dual(vert({(0, 0): 1, (1, 0): 1}))
        assert dual.coeff.terms == {(k, 0): (-1) ** k for k in range(7)}

    def test_round_trip(self):
        eta = sec({(0, 0): 2, (1, 0): 1, (0, 2): 3j}, k=1)
        assert vertical_dual(dual_vertical(eta)).coeff.allclose(eta.coeff, atol=1e-14)

    def test_no_dual_without_constant(self):
        with pytest.raises(PairingError):
            vertical_dual(vert({(1, 0): 1}))


class TestAdmissible:
    def test_cases(self):
        assert admissible_check(VerticalSection.half_v(ZW, 4))
        assert admissible_check(vert({(0, 0): 1, (1, 0): 3, (0, 1): -2}))
        assert not admissible_check(vert({(0, 0): 2}))

    def test_zero_constant_rejected(self):
        with pytest.raises(PairingError):
            admissible_check(vert({(1, 1): 1}))


class TestLP:
    def test_half_v_gives_laur(self):
        phi = sec({(0, 0): 1, (1, 1): 2j, (2, 2): -1, (1, 0): 4})
        assert lp_pairing(VerticalSection.half_v(ZW, 6), phi) == laur(phi)

    def test_linear_coefficient_fixture(self):
        a, b, c, d, f = 1, 2, 3, 4, 5
        lam = vert({(0, 0): 1, (1, 0): a, (0, 1): b})
        phi = sec({(1, 0): c, (0, 1): d, (1, 1): f})
        lp = lp_pairing(lam, phi)
        assert lp.coefficient((1,)) == 60
        assert lp.coefficient((0,)) == 0

    def test_numeric_matches_series(self):
        lam = vert({(0, 0): 1, (1, 0): 0.5, (0, 1): -1, (1, 1): 2})
        phi = sec({(1, 0): 1, (0, 1): 2, (1, 1): 3, (2, 2): 1, (3, 3): -1})
        t = 0.02
        assert lp_numeric(lam, phi, t) == pytest.approx(lp_pairing(lam, phi).evaluate({"t": t}), rel=1e-12)

    def test_inadmissible_rejected(self):
        with pytest.raises(PairingError):
            lp_pairing(vert({(0, 0): 2}), ZW_SECTION)


class TestCompplum:
    def test_closed_form_fixtures(self):
        assert compplum_closed_form(IDENTITY, ZW_SECTION).value == pytest.approx(-PI)
        assert compplum_closed_form(IDENTITY, sec({(1, 0): 1, (0, 1): 1})).value == 0
        assert compplum_closed_form(change([2], [1]), ZW_SECTION).value == pytest.approx(-PI / 2)

    def test_closed_form_tag(self):
        assert compplum_closed_form(IDENTITY, ZW_SECTION).method == "closed_form"

    def test_oracle_fixtures(self):
        r = compplum_coordinate_oracle(IDENTITY, ZW_SECTION)
        assert r.method == "coordinate_change_oracle"
        assert r.value == -4 * PI
        assert compplum_coordinate_oracle(change([1, 1], [1]), sec({(0, 1): 1})).value == pytest.approx(4 * PI)
        assert compplum_coordinate_oracle(IDENTITY, sec({(1, 0): 1, (0, 1): 1})).value == 0

    def test_uv_coefficient_against_hand_expansion(self):
        # a~_11 = f2/(ag) - c d'/(a g^2) - d b'/(a^2 g) with alpha, beta, gamma, delta from F and G
        al, be, ga, de = 1.5, -0.25, 0.75 + 0.5j, 2.0
        c, d, f2 = 0.3, -1.1j, 2.5
        ch = change([al, be], [ga, de])
        tilde = uv_chart_coefficient(ch, sec({(1, 0): c, (0, 1): d, (1, 1): f2, (2, 0): 7, (0, 2): -3}))
        expected = f2 / (al * ga) - c * de / (al * ga**2) - d * be / (al**2 * ga)
        assert tilde.coefficient((1, 1)) == pytest.approx(expected, rel=1e-13)

    def test_finite_difference_fixtures(self):
        fd = compplum_finite_difference(IDENTITY, ZW_SECTION)
        assert fd.method == "finite_difference"
        assert fd.value == pytest.approx(-4 * PI, abs=1e-6)
        assert compplum_finite_difference(change([1, 1], [1]), sec({(0, 1): 1})).value == pytest.approx(4 * PI, abs=1e-6)
        assert compplum_finite_difference(IDENTITY, sec({})).value == 0

    def test_reduces_to_limit(self):
        phi = sec({(1, 1): 2 - 1j, (1, 0): 3, (2, 2): 1})
        assert compplum_coordinate_oracle(IDENTITY, phi).value == plumbing_pairing_limit(phi)

    def test_tau_sequence_validated(self):
        with pytest.raises(PairingError):
            compplum_finite_difference(IDENTITY, ZW_SECTION, taus=(1e-3, 1e-2))
        with pytest.raises(PairingError):
            compplum_finite_difference(IDENTITY, ZW_SECTION, taus=(0.5, 0.25))

    def test_residue_must_vanish(self):
        with pytest.raises(PairingError):
            compplum_coordinate_oracle(IDENTITY, sec({(0, 0): 1}))

    def test_degenerate_change_rejected(self):
        with pytest.raises(PairingError):
            change([0, 1], [1])

    def test_neville_reproduces_polynomials(self):
        xs = [0.3, 0.2, 0.1]
        assert neville_at_zero(xs, [2 + 3 * x - x * x for x in xs]) == pytest.approx(2, abs=1e-14)

    def test_higher_order_vertical_terms_do_not_matter(self):
        ch = change([1, 0.5], [2, -1])
        phi = sec({(1, 0): 1, (0, 1): -2, (1, 1): 0.5, (2, 1): 1})
        from nodal_plumbing.pairing import dual_of_plumbing_differential

        base = dual_of_plumbing_differential(ch)
        perturbed = VerticalSection(base.coeff + ComplexSeries(ZW, 6, {(2, 0): 5, (1, 1): -3, (0, 2): 1j}))
        a = compplum_finite_difference(ch, phi).value
        b = compplum_finite_difference(ch, phi, lam=perturbed).value
        assert a == pytest.approx(b, rel=1e-8)


class TestCocycleAndCollar:
    def test_cocycle_values(self):
        assert normal_cocycle(change([2], [3])) == pytest.approx(1 / 6)
        assert normal_cocycle(IDENTITY) == 1

    def test_oracle_ratio_is_cocycle(self):
        ch = change([2], [3])
        ratio = compplum_coordinate_oracle(ch, ZW_SECTION).value / compplum_coordinate_oracle(IDENTITY, ZW_SECTION).value
        assert ratio == pytest.approx(normal_cocycle(ch), rel=1e-15)

    def test_collar_length(self):
        assert collar_length(math.exp(-2 * PI**2)) == pytest.approx(1)

    def test_collar_inverse(self):
        t = 3e-4
        assert math.exp(2 * PI**2 / collar_length(t)) == pytest.approx(1 / t, rel=1e-12)

    def test_collar_norm(self):
        t = 1e-3
        assert collar_norm(t, -4 * PI * t) == pytest.approx(4 * PI, rel=1e-12)

    def test_collar_domain(self):
        with pytest.raises(PairingError):
            collar_length(1.0)
        with pytest.raises(PairingError):
            collar_length(0)
