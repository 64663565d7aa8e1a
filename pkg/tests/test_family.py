import math

import pytest

from nodal_plumbing.family import (
    ModelFamily,
    SectionError,
    SectionK,
    VerticalSection,
    contract,
    fiber_pullback,
    laur,
    laur_contour,
    residue_at_node,
    restrict_to_branches,
    vanishing_residue_check,
    zeta_constant,
)
from nodal_plumbing.series import ComplexSeries, DomainError

ZW = ("z", "w")


def sec(terms, k=2, trunc=6, vars=ZW):
    return SectionK(k, ComplexSeries(vars, trunc, terms))


def vert(terms, trunc=6, vars=ZW):
    return VerticalSection(ComplexSeries(vars, trunc, terms))


class TestTypes:
    def test_section_rejects_negative_chart_exponents(self):
        with pytest.raises(SectionError):
            SectionK(2, ComplexSeries(ZW, 3, {(-1, 0): 1}, lower=(-1, 0)))

    def test_weight_must_be_positive(self):
        with pytest.raises(SectionError):
            SectionK(0, ComplexSeries.constant(1, ZW, 2))

    def test_json_round_trip(self):
        eta = sec({(1, 1): 1, (0, 0): 0.25})
        assert SectionK.from_json(eta.to_json()) == eta

    def test_model_family_disc(self):
        fam = ModelFamily(0.5, 0.4)
        assert fam.in_base(0.19) and not fam.in_base(0.2)
        assert fam.annulus(0.1) == pytest.approx((0.25, 0.5))
        with pytest.raises(DomainError):
            ModelFamily(0, 1)


class TestContract:
    def test_half_v_strips_one_factor(self):
        f = {(1, 1): 2, (2, 0): 1j}
        out = contract(VerticalSection.half_v(ZW, 6), sec(f))
        assert out == sec(f, k=1)

    def test_series_product(self):
        out = contract(vert({(0, 0): 1, (1, 0): 1}), sec({(1, 1): 1}))
        assert out == sec({(1, 1): 1, (2, 1): 1}, k=1)

    def test_zero_section(self):
        assert contract(vert({(0, 0): 3, (0, 1): 2}), sec({})).coeff.is_zero()

    def test_weight_one_rejected(self):
        with pytest.raises(SectionError):
            contract(VerticalSection.half_v(ZW, 6), sec({(0, 0): 1}, k=1))


class TestFiberPullback:
    def test_quarter_alpha_squared_gives_one(self):
        out = fiber_pullback(sec({(0, 0): 0.25}))
        assert out.terms == {(0, 0): 1}

    def test_z_alpha(self):
        assert fiber_pullback(sec({(1, 0): 1}, k=1)).terms == {(1, 0): 2}

    def test_w_alpha_has_negative_zeta_power(self):
        out = fiber_pullback(sec({(0, 1): 1}, k=1))
        assert out.terms == {(-1, 1): 2}
        assert out.lower[0] == -6

    def test_parameters_carried(self):
        eta = SectionK(2, ComplexSeries(("z", "w", "s"), 4, {(1, 1, 1): 1}))
        out = fiber_pullback(eta)
        assert out.vars == ("zeta", "t", "s") and out.terms == {(0, 1, 1): 4}


class TestBranchesAndResidue:
    def test_branch_restriction(self):
        br = restrict_to_branches(sec({(0, 0): 1, (1, 0): 1, (0, 1): 1}))
        assert br.z_branch == ComplexSeries(("z",), 6, {(0,): 1, (1,): 1})
        assert br.w_branch == ComplexSeries(("w",), 6, {(0,): 1, (1,): 1})
        assert br.w_sign == 1

    def test_diagonal_term_vanishes_on_branches(self):
        br = restrict_to_branches(sec({(1, 1): 1}))
        assert br.z_branch.is_zero() and br.w_branch.is_zero()

    def test_residue_values(self):
        assert residue_at_node(sec({(0, 0): 5, (1, 1): 1})) == 5
        assert residue_at_node(sec({(1, 1): 1})) == 0
        quarter = sec({(0, 0): 0.25})
        assert residue_at_node(quarter) == 0.25
        assert laur(quarter).constant_term() == 1

    def test_residue_with_parameter_is_series(self):
        eta = SectionK(2, ComplexSeries(("z", "w", "s"), 4, {(0, 0, 1): 1, (1, 1, 0): 1}))
        r = residue_at_node(eta)
        assert isinstance(r, ComplexSeries) and r.vars == ("s",) and r.terms == {(1,): 1}

    def test_odd_weight_sign_metadata(self):
        assert restrict_to_branches(sec({(0, 0): 1}, k=3)).w_sign == -1


class TestLaur:
    def test_quarter(self):
        assert laur(sec({(0, 0): 0.25})) == ComplexSeries(("t",), 3, {(0,): 1})

    def test_zw(self):
        assert laur(sec({(1, 1): 1}, trunc=4)) == ComplexSeries(("t",), 2, {(1,): 4})

    def test_no_diagonal(self):
        assert laur(sec({(1, 0): 1, (0, 1): 1})).is_zero()

    def test_weight_two_only(self):
        with pytest.raises(SectionError):
            laur(sec({(0, 0): 1}, k=1))

    def test_weight_k_zeta_constant(self):
        assert zeta_constant(sec({(1, 1): 1}, k=1)).terms == {(1,): 2}


class TestVanishingResidue:
    def test_cases(self):
        assert vanishing_residue_check(sec({(1, 1): 1}))
        assert not vanishing_residue_check(sec({(0, 0): 0.25}))

    def test_parameter_residue_is_not_vanishing(self):
        eta = SectionK(2, ComplexSeries(("z", "w", "s"), 4, {(0, 0, 1): 1}))
        assert not vanishing_residue_check(eta)


class TestContour:
    def test_contour_matches_series(self):
        eta = sec({(0, 0): 1, (1, 1): 2 - 1j, (2, 2): 0.5, (3, 0): 1, (0, 3): -2, (2, 1): 1j})
        t = 0.01 * complex(math.cos(1), math.sin(1))
        series_value = laur(eta).evaluate({"t": t})
        assert laur_contour(eta, t) == pytest.approx(series_value, rel=1e-12)

    def test_too_few_points_rejected(self):
        with pytest.raises(DomainError):
            laur_contour(sec({(1, 1): 1}), 0.01, n_points=5)
