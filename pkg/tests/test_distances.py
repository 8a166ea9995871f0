import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from g0contrast.distances import (ALL_KINDS, ARITHMETIC_GEOMETRIC, BHATTACHARYYA, CURVE_REFERENCE, HARMONIC_MEAN,
                                  HELLINGER, JENSEN_SHANNON, KULLBACK_LEIBLER, RENYI, TRIANGULAR,
                                  ClosedFormConstants, DistanceKind, EvalMethod, closed_form_distance, distance,
                                  distance_curve, distances, divergence_hphi, h, parse_kind, phi, renyi,
                                  write_curve_csv)
from g0contrast.exceptions import DomainError, PoleError, UnsupportedRegionError
from g0contrast.model import G0Params, g0_pdf
from g0contrast.special import integrate_semi_infinite

# Symmetrized distances, mpmath at 40 digits (tools/derive_oracles.py); Renyi order 0.95.
MPMATH_REF = {
    ((-3, 2, 1), (-5, 4, 1)): {
        "KL": 0.0075277641830023976, "R": 0.0071393435202345152, "H": 0.0018641877154888255,
        "B": 0.0018659274759043353, "JS": 0.0018497895609830172, "AG": 0.0019140925305181816,
        "T": 0.0073074800166762573, "HM": 0.0036604312199664212},
    ((-2.5, 1.3, 1.5), (-4, 3.5, 1.5)): {
        "KL": 0.081543678803326507, "R": 0.077521655649250149, "H": 0.020254923634887269,
        "B": 0.020462867314245077, "JS": 0.02012687422001276, "AG": 0.020644965181650493,
        "T": 0.079514513978112483, "HM": 0.040569169180208629},
    ((-1.5, 0.5, 1), (-1.5, 1, 1)): {
        "KL": 0.10209032624201769, "R": 0.097059841332906954, "H": 0.025300125356206101,
        "B": 0.025625676249021128, "JS": 0.025083749356266176, "AG": 0.02596141376474267,
        "T": 0.098672833048798808, "HM": 0.050595029309677754},
}

params = st.builds(G0Params, st.floats(-15, -1.2), st.floats(0.05, 50), st.sampled_from([1.0, 2.0, 3.2, 8.0]))


def pair_strategy():
    return st.tuples(st.floats(-15, -1.2), st.floats(0.05, 50), st.floats(-15, -1.2), st.floats(0.05, 50),
                     st.sampled_from([1.0, 1.5, 2.0, 3.2, 8.0])).map(
        lambda t: (G0Params(t[0], t[1], t[4]), G0Params(t[2], t[3], t[4])))


def integrate_pair(p1, p2, integrand):
    """Integral of integrand(f1, f2) over (0, inf), written independently of the package."""
    return integrate_semi_infinite(lambda x: integrand(g0_pdf(x, p1), g0_pdf(x, p2)),
                                   abs_tol=1e-13, rel_tol=1e-11).value


class TestKinds:
    def test_labels_and_order(self):
        assert [k.label for k in ALL_KINDS] == ["KL", "R", "H", "B", "JS", "AG", "T", "HM"]
        assert [k.has_closed_form for k in ALL_KINDS] == [True] * 4 + [False] * 4

    @pytest.mark.parametrize("text, expected", [("KL", KULLBACK_LEIBLER), ("hellinger", HELLINGER),
                                                ("T", TRIANGULAR), ("harmonic-mean", HARMONIC_MEAN),
                                                ("R", RENYI), ("renyi:0.8", renyi(0.8)), ("js", JENSEN_SHANNON)])
    def test_parse(self, text, expected):
        assert parse_kind(text) == expected

    def test_parse_beta_argument(self):
        assert parse_kind("R", 0.5).beta == 0.5

    @pytest.mark.parametrize("text", ["XX", "renyi:1.5", "renyi:0", ""])
    def test_parse_invalid(self, text):
        with pytest.raises(DomainError):
            parse_kind(text)

    def test_default_beta(self):
        assert RENYI.beta == 0.95

    def test_beta_only_for_renyi(self):
        with pytest.raises(DomainError):
            DistanceKind("hellinger", 0.5)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_phi_and_h_vanish_at_identity(self, kind):
        assert float(phi(kind, 1.0)) == pytest.approx(0.0, abs=1e-15)
        assert h(kind, 0.0) == 0.0

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_phi_convex(self, kind):
        x = np.geomspace(1e-3, 1e3, 400)
        y = phi(kind, x)
        slopes = np.diff(y) / np.diff(x)
        assert np.all(np.diff(slopes) >= -1e-9)


class TestReferenceValues:
    @pytest.mark.parametrize("pair", sorted(MPMATH_REF))
    @pytest.mark.parametrize("method, rel", [(EvalMethod.QUADRATURE, 1e-8), (EvalMethod.AUTO, 1e-7)])
    def test_against_mpmath(self, pair, method, rel):
        p1, p2 = G0Params(*pair[0]), G0Params(*pair[1])
        d = distances(ALL_KINDS, p1, p2, method)
        for k in ALL_KINDS:
            assert d[k] == pytest.approx(MPMATH_REF[pair][k.label], rel=rel), k.label

    def test_closed_forms_on_non_integer_looks(self):
        pair = ((-2.5, 1.3, 1.5), (-4, 3.5, 1.5))
        p1, p2 = G0Params(*pair[0]), G0Params(*pair[1])
        for k in (KULLBACK_LEIBLER, RENYI, HELLINGER, BHATTACHARYYA):
            assert closed_form_distance(k, p1, p2) == pytest.approx(MPMATH_REF[pair][k.label], rel=1e-7)


class TestDivergence:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_zero_at_identity(self, kind):
        p = G0Params(-3, 2, 1)
        assert abs(divergence_hphi(kind, p, p)) <= 1e-9

    @given(pair_strategy())
    def test_nonnegative(self, pair):
        for k in ALL_KINDS:
            assert divergence_hphi(k, *pair) >= -1e-12

    def test_kl_direction(self):
        assert divergence_hphi(KULLBACK_LEIBLER, G0Params(-3, 2, 1), G0Params(-5, 4, 1)) > 0

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_symmetrization(self, kind):
        p1, p2 = G0Params(-2, 1.5, 2), G0Params(-6, 4, 2)
        avg = 0.5 * (divergence_hphi(kind, p1, p2) + divergence_hphi(kind, p2, p1))
        assert distance(kind, p1, p2, EvalMethod.QUADRATURE) == pytest.approx(avg, rel=1e-12)


class TestSymmetricPairForms:
    """Alternative (h, phi) pairs written directly in symmetric form, evaluated in one direction."""

    PAIRS = [((-3, 2, 1), (-5, 4, 1)), ((-1.5, 0.5, 1), (-2.5, 1.7, 1)), ((-8, 7, 4), (-4, 2, 4)),
             ((-2, 1, 2), (-2, 3, 2)), ((-12, 11, 8), (-3, 2, 8))]

    @pytest.mark.parametrize("pair", PAIRS)
    def test_kullback_leibler(self, pair):
        p1, p2 = G0Params(*pair[0]), G0Params(*pair[1])
        y = integrate_pair(p1, p2, lambda f1, f2: (f1 / f2 - 1) * np.log(f1 / f2) * f2)
        assert distance(KULLBACK_LEIBLER, p1, p2, EvalMethod.QUADRATURE) == pytest.approx(y / 2, rel=1e-8)

    @pytest.mark.parametrize("pair", PAIRS)
    def test_jensen_shannon(self, pair):
        p1, p2 = G0Params(*pair[0]), G0Params(*pair[1])
        y = integrate_pair(p1, p2, lambda f1, f2: f1 * np.log(2 * f1 / (f1 + f2)) + f2 * np.log(2 * f2 / (f1 + f2)))
        assert distance(JENSEN_SHANNON, p1, p2, EvalMethod.QUADRATURE) == pytest.approx(y / 2, rel=1e-8)

    @pytest.mark.parametrize("pair", PAIRS)
    def test_renyi_is_log_of_mean_overlap(self, pair):
        # the symmetric Renyi pair averages the two overlaps inside the logarithm, so it
        # differs from the symmetrized distance by a Jensen gap and never exceeds it
        p1, p2 = G0Params(*pair[0]), G0Params(*pair[1])
        b = RENYI.beta
        y = integrate_pair(p1, p2, lambda f1, f2: f2 * ((f1 / f2) ** (1 - b) + (f1 / f2) ** b
                                                         - b * (f1 / f2 - 1) - 2) / (2 * (b - 1)))
        log_of_mean = math.log((b - 1) * y + 1) / (b - 1)
        d = distance(RENYI, p1, p2, EvalMethod.QUADRATURE)
        assert log_of_mean <= d + 1e-12
        assert log_of_mean == pytest.approx(d, rel=0.05)

    def test_renyi_forms_agree_at_one_half(self):
        p1, p2 = G0Params(-3, 2, 1), G0Params(-5, 4, 1)
        b = 0.5
        y = integrate_pair(p1, p2, lambda f1, f2: f2 * ((f1 / f2) ** (1 - b) + (f1 / f2) ** b
                                                         - b * (f1 / f2 - 1) - 2) / (2 * (b - 1)))
        assert distance(renyi(0.5), p1, p2, EvalMethod.QUADRATURE) == pytest.approx(
            math.log((b - 1) * y + 1) / (b - 1), rel=1e-8)

    @pytest.mark.parametrize("pair", PAIRS)
    def test_arithmetic_geometric_is_one_directional(self, pair):
        # the extra (x - 1)/2 term integrates to zero, leaving D(X, Y) unsymmetrized
        p1, p2 = G0Params(*pair[0]), G0Params(*pair[1])
        y = integrate_pair(p1, p2, lambda f1, f2: f2 * ((f1 / f2 + 1) / 2 * np.log((f1 / f2 + 1) / (2 * f1 / f2))
                                                         + (f1 / f2 - 1) / 2))
        assert divergence_hphi(ARITHMETIC_GEOMETRIC, p1, p2) == pytest.approx(y, rel=1e-8)

    @pytest.mark.parametrize("pair", PAIRS)
    def test_arithmetic_geometric_integral_form(self, pair):
        p1, p2 = G0Params(*pair[0]), G0Params(*pair[1])
        y = integrate_pair(p1, p2, lambda f1, f2: (f1 + f2) * np.log((f1 + f2) / (2 * np.sqrt(f1 * f2))))
        assert distance(ARITHMETIC_GEOMETRIC, p1, p2, EvalMethod.QUADRATURE) == pytest.approx(y / 2, rel=1e-8)


class TestAxioms:
    @pytest.mark.parametrize("method", [EvalMethod.QUADRATURE, EvalMethod.AUTO])
    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_zero_at_identity(self, kind, method):
        p = G0Params(-4.5, 3.3, 2)
        assert abs(distance(kind, p, p, method)) <= 1e-9

    def test_triangular_identity(self):
        p = G0Params(-1.5, 0.5, 1)
        assert distance(TRIANGULAR, p, p) == 0.0

    @given(pair_strategy())
    def test_symmetry(self, pair):
        p1, p2 = pair
        a = distances(ALL_KINDS, p1, p2)
        b = distances(ALL_KINDS, p2, p1)
        for k in ALL_KINDS:
            assert a[k] == pytest.approx(b[k], abs=1e-12, rel=1e-9)

    @given(pair_strategy())
    def test_identities(self, pair):
        d = distances(ALL_KINDS + (renyi(0.5),), *pair)
        # well-conditioned directions hold to 1e-10 everywhere
        assert d[HELLINGER] == pytest.approx(-math.expm1(-d[BHATTACHARYYA]), abs=1e-10)
        assert d[TRIANGULAR] == pytest.approx(-2 * math.expm1(-d[HARMONIC_MEAN]), abs=1e-10)
        assert d[HELLINGER] == pytest.approx(-math.expm1(-0.5 * d[renyi(0.5)]), abs=1e-10)
        # -log(1 - d) magnifies the rounding of d by 1 / (1 - d)
        eps = np.finfo(float).eps
        assert d[BHATTACHARYYA] == pytest.approx(-math.log1p(-d[HELLINGER]),
                                                 abs=1e-10 + 4 * eps / (1 - d[HELLINGER]))
        assert d[HARMONIC_MEAN] == pytest.approx(-math.log1p(-d[TRIANGULAR] / 2),
                                                 abs=1e-10 + 4 * eps / (1 - d[TRIANGULAR] / 2))

    @given(pair_strategy(), st.sampled_from([0.1, 100.0]))
    def test_scale_invariance(self, pair, c):
        p1, p2 = pair
        a = distances(ALL_KINDS, p1, p2)
        b = distances(ALL_KINDS, p1.scaled(c), p2.scaled(c))
        for k in ALL_KINDS:
            assert b[k] == pytest.approx(a[k], abs=1e-7)

    @pytest.mark.parametrize("pair", [((-1.2, 0.01, 1), (-15, 500, 1)), ((-1.5, 0.5, 1), (-8, 700, 8)),
                                      ((-3, 2, 1), (-3, 2e4, 1))])
    def test_range_bounds_for_distant_laws(self, pair):
        d = distances(ALL_KINDS, G0Params(*pair[0]), G0Params(*pair[1]))
        assert 0 < d[HELLINGER] < 1
        assert 0 < d[TRIANGULAR] < 2
        assert 0 < d[JENSEN_SHANNON] <= math.log(2)
        assert all(v > 0 and math.isfinite(v) for v in d.values())

    @given(pair_strategy())
    def test_ranges(self, pair):
        d = distances(ALL_KINDS, *pair)
        assert 0 <= d[HELLINGER] < 1
        assert 0 <= d[TRIANGULAR] < 2
        assert 0 <= d[JENSEN_SHANNON] <= math.log(2)
        assert all(v >= -1e-12 for v in d.values())


class TestClosedForms:
    @pytest.mark.parametrize("kind", [HELLINGER, BHATTACHARYYA, KULLBACK_LEIBLER, RENYI])
    @pytest.mark.parametrize("pair", [((-2.5, 1.3, 1.5), (-4, 3.5, 1.5)), ((-1.7, 0.9, 2.5), (-7, 2, 2.5)),
                                      ((-3.3, 1, 3.2), (-5.1, 9, 3.2))])
    def test_against_quadrature(self, kind, pair):
        p1, p2 = G0Params(*pair[0]), G0Params(*pair[1])
        assert closed_form_distance(kind, p1, p2) == pytest.approx(
            distance(kind, p1, p2, EvalMethod.QUADRATURE), rel=1e-6)

    @given(pair_strategy())
    def test_claimed_support_is_accurate(self, pair):
        p1, p2 = pair
        quad = distances(ALL_KINDS[:4], p1, p2, EvalMethod.QUADRATURE)
        for k in ALL_KINDS[:4]:
            try:
                v = closed_form_distance(k, p1, p2)
            except UnsupportedRegionError:
                continue
            assert v == pytest.approx(quad[k], rel=1e-6)

    def test_pole_falls_back_under_auto(self):
        # integer looks put (c2 + a) on an integer: csc pole
        p1, p2 = G0Params(-3, 2, 1), G0Params(-5, 4, 1)
        with pytest.raises(PoleError):
            closed_form_distance(HELLINGER, p1, p2)
        with pytest.raises(UnsupportedRegionError):
            distance(HELLINGER, p1, p2, EvalMethod.CLOSED_FORM)
        assert distance(HELLINGER, p1, p2, EvalMethod.AUTO) == pytest.approx(
            distance(HELLINGER, p1, p2, EvalMethod.QUADRATURE), rel=1e-12)

    @pytest.mark.parametrize("kind", [JENSEN_SHANNON, ARITHMETIC_GEOMETRIC, TRIANGULAR, HARMONIC_MEAN])
    def test_no_closed_form(self, kind):
        with pytest.raises(UnsupportedRegionError):
            distance(kind, G0Params(-3, 2, 1.5), G0Params(-5, 4, 1.5), EvalMethod.CLOSED_FORM)

    def test_constants(self):
        p1, p2 = G0Params(-3, 2, 1.5), G0Params(-5, 4, 2.5)
        c = ClosedFormConstants.from_params(p1, p2, 0.95)
        assert (c.a1, c.a2, c.b1, c.b2, c.c1, c.c2) == (0.5, 1.5, 2.0, 4.0, 4.5, 7.5)
        assert c.d == pytest.approx(math.log(c.k2 / c.k1), rel=1e-12)
        # each density is k x^a (b + L x)^-c
        for p, k, a, b, cc in ((p1, c.k1, c.a1, c.b1, c.c1), (p2, c.k2, c.a2, c.b2, c.c2)):
            x = 0.8
            assert g0_pdf(x, p) == pytest.approx(k * x ** a * (b + p.looks * x) ** -cc, rel=1e-12)
        assert c.f1 == (p1.alpha - p1.looks) / 2 and c.f2 == (p2.alpha - p2.looks) / 2
        assert c.e1 + c.m1 == pytest.approx(p1.alpha - p1.looks)
        assert c.h1 == pytest.approx(c.k1 ** 0.05 * c.k2 ** 0.95, rel=1e-12)


class TestCurve:
    GRID = np.arange(-20.0, -1.5, 0.5)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_zero_only_at_reference(self, kind):
        rows = distance_curve(kind, self.GRID)
        for a, d in rows:
            if a == -12.0:
                assert abs(d) <= 1e-9
            else:
                assert d > 0

    def test_hellinger_and_bhattacharyya_same_ranking(self):
        dh = [d for _, d in distance_curve(HELLINGER, self.GRID)]
        db = [d for _, d in distance_curve(BHATTACHARYYA, self.GRID)]
        np.testing.assert_array_equal(np.argsort(dh, kind="stable"), np.argsort(db, kind="stable"))

    def test_reference(self):
        assert CURVE_REFERENCE == G0Params(-12, 11, 8)

    def test_alpha_must_allow_unit_mean(self):
        with pytest.raises(DomainError):
            distance_curve(HELLINGER, [-3.0, -1.0])

    def test_csv(self):
        buf = io.StringIO()
        write_curve_csv(distance_curve(TRIANGULAR, [-13.0, -12.0]), buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "alpha,distance"
        assert lines[2] == "-12.0,0.0"
        assert len(lines) == 3
