"""Raising/lowering operators, rotation derivative, and the Casimir."""

import cmath
import math

import numpy as np
import pytest

from sl2kernels import (
    ChartSingularity,
    DomainError,
    IwasawaBox,
    QuadratureSpec,
    fd_derivative,
    integrate_G,
)
from sl2kernels.group import GroupElement, from_iwasawa, to_iwasawa
from sl2kernels.group import IwasawaCoord
from sl2kernels.lie import SmoothField, apply_e_minus, apply_e_plus, apply_x3, casimir


def sample_points(seed, n, y_range=(0.3, 3.0)):
    rng = np.random.default_rng(seed)
    return [
        from_iwasawa(IwasawaCoord(x, y, t))
        for x, y, t in zip(
            rng.uniform(-2.0, 2.0, n), rng.uniform(*y_range, n), rng.uniform(0.0, 2 * math.pi, n)
        )
    ]


def basic_eigenfunction(nu, ell):
    """y^(1/2+nu) e^(i ell theta), with analytic chart partials."""

    def value(x, y, theta):
        return y ** (0.5 + nu) * cmath.exp(1j * ell * theta)

    return SmoothField(
        lambda g: value(*_coords(g)),
        iwasawa_partials={
            "x": lambda x, y, t: 0j,
            "y": lambda x, y, t: (0.5 + nu) / y * value(x, y, t),
            "theta": lambda x, y, t: 1j * ell * value(x, y, t),
        },
    )


def _coords(g):
    c = to_iwasawa(g)
    return c.x, c.y, c.theta


# Generic analytic fields used for the operator-identity checks.
def _mixed_fields():
    def f1(g):
        x, y, t = _coords(g)
        return cmath.exp(1j * x) * y**1.3 * cmath.exp(2j * t)

    def f2(g):
        x, y, t = _coords(g)
        return y**0.7 * cmath.exp(-1j * t) + 0.3 * x * y

    def f3(g):
        x, y, t = _coords(g)
        return cmath.exp(-(x * x) / 4.0) * math.sqrt(y) * cmath.exp(1j * t)

    def f4(g):
        x, y, t = _coords(g)
        return (1.0 + 0.2 * math.sin(x)) * y**-0.4 * cmath.exp(-2j * t)

    def f5(g):
        x, y, t = _coords(g)
        return cmath.exp(1j * (x + 3.0 * t)) / (1.0 + y)

    return [SmoothField(f) for f in (f1, f2, f3, f4, f5)]


class TestSmoothField:
    def test_supplied_partials_match_finite_differences(self):
        field = basic_eigenfunction(0.2, 2)
        for g in sample_points(23, 10):
            x, y, t = _coords(g)
            fd_x = fd_derivative(
                lambda s: field.evaluator(from_iwasawa(IwasawaCoord(s, y, t))), x, 1
            )
            fd_y = fd_derivative(
                lambda s: field.evaluator(from_iwasawa(IwasawaCoord(x, s, t))), y, 1
            )
            fd_t = fd_derivative(
                lambda s: field.evaluator(from_iwasawa(IwasawaCoord(x, y, s))), t, 1
            )
            scale = abs(field(g)) + 1.0
            assert abs(field.iwasawa_partials["x"](x, y, t) - fd_x) <= 1e-5 * scale
            assert abs(field.iwasawa_partials["y"](x, y, t) - fd_y) <= 1e-5 * scale
            assert abs(field.iwasawa_partials["theta"](x, y, t) - fd_t) <= 1e-5 * scale

    def test_plain_callable_promoted(self):
        f = apply_x3(lambda g: 1.0)
        assert abs(f(GroupElement.identity())) < 1e-9


class TestFirstOrderOperators:
    def test_annihilate_constants(self):
        const = SmoothField(lambda g: 2.5 + 1j)
        for op in (apply_e_plus, apply_e_minus, apply_x3):
            for g in sample_points(1, 5):
                assert abs(op(const)(g)) < 1e-7

    def test_x3_eigenvalue_on_basic_functions(self):
        field = basic_eigenfunction(0.3, 4)
        out = apply_x3(field)
        for g in sample_points(2, 10):
            assert out(g) == pytest.approx(4j * field(g), abs=1e-7)

    def test_x3_kills_radial_fields(self):
        radial = SmoothField(lambda g: math.exp(-((g.a**2 + g.b**2 + g.c**2 + g.d**2 - 2) / 4)))
        for g in sample_points(3, 5):
            assert abs(apply_x3(radial)(g)) < 1e-8

    def test_x3_product_rule_example(self):
        def f(g):
            x, y, t = _coords(g)
            return y * cmath.exp(2j * t)

        for g in sample_points(4, 5):
            x, y, t = _coords(g)
            assert apply_x3(SmoothField(f))(g) == pytest.approx(2j * f(g), abs=1e-8)

    def test_raising_shifts_right_type(self):
        field = basic_eigenfunction(0.1, 2)
        raised = apply_e_plus(field)
        g = sample_points(5, 1)[0]
        base = raised(g)
        assert abs(base) > 1e-12
        for t in (0.4, 1.1, 2.7):
            rotated = raised(g.mul(GroupElement.k(t)))
            assert rotated / base == pytest.approx(cmath.exp(4j * t), abs=1e-6)

    def test_lowering_shifts_right_type(self):
        field = basic_eigenfunction(0.1, 2)
        lowered = apply_e_minus(field)
        g = sample_points(6, 1)[0]
        base = lowered(g)
        assert abs(base) > 1e-12
        for t in (0.4, 1.1):
            rotated = lowered(g.mul(GroupElement.k(t)))
            assert rotated / base == pytest.approx(cmath.exp(0j), abs=1e-6)


class TestCommutators:
    @pytest.mark.parametrize("field_index", range(5))
    def test_rotation_commutators(self, field_index):
        field = _mixed_fields()[field_index]
        pts = sample_points(10 + field_index, 20)
        for sign, op in ((+1, apply_e_plus), (-1, apply_e_minus)):
            opf = op(field)
            x3opf = apply_x3(opf)
            opx3f = op(apply_x3(field))
            for g in pts:
                lhs = x3opf(g) - opx3f(g)
                rhs = sign * 2j * opf(g)
                assert abs(lhs - rhs) <= 1e-4 * (1.0 + abs(rhs))

    @pytest.mark.parametrize("field_index", range(5))
    def test_raising_lowering_commutator(self, field_index):
        field = _mixed_fields()[field_index]
        pts = sample_points(20 + field_index, 20)
        pm = apply_e_plus(apply_e_minus(field))
        mp = apply_e_minus(apply_e_plus(field))
        x3f = apply_x3(field)
        for g in pts:
            lhs = pm(g) - mp(g)
            rhs = -4j * x3f(g)
            assert abs(lhs - rhs) <= 1e-4 * (1.0 + abs(rhs))


class TestCasimir:
    def test_eigenvalue_principal_point(self):
        field = basic_eigenfunction(0.0, 2)
        om = casimir(field, "iwasawa")
        for g in sample_points(30, 10):
            assert om(g) == pytest.approx(0.25 * field(g), abs=1e-6 * abs(field(g)))

    @pytest.mark.parametrize("nu", [0.25j, 0.35, -0.4j])
    def test_eigenvalue_general(self, nu):
        field = basic_eigenfunction(nu, -2)
        om = casimir(field, "iwasawa")
        lam = 0.25 - nu * nu
        for g in sample_points(31, 6):
            assert om(g) == pytest.approx(lam * field(g), abs=1e-6 * abs(field(g)))

    def test_constant_annihilated(self):
        om = casimir(SmoothField(lambda g: 4.2), "iwasawa")
        for g in sample_points(32, 4):
            assert abs(om(g)) < 1e-6

    def test_cartan_chart_eigenvalue(self):
        field = basic_eigenfunction(0.0, 2)
        om = casimir(field, "cartan")
        for g in sample_points(33, 8):
            assert om(g) == pytest.approx(0.25 * field(g), abs=5e-6 * abs(field(g)))

    def test_charts_agree_on_radial_field(self):
        radial = SmoothField(
            lambda g: math.exp(-((g.a**2 + g.b**2 + g.c**2 + g.d**2 - 2.0) / 4.0))
        )
        omi = casimir(radial, "iwasawa")
        omc = casimir(radial, "cartan")
        for g in sample_points(34, 8):
            assert omi(g) == pytest.approx(omc(g), abs=1e-5 * (1 + abs(omi(g))))

    def test_collar_uses_rho_form(self):
        field = SmoothField(lambda g: to_iwasawa(g).y ** 0.5)
        g = GroupElement.a_diag(1.0 + 6e-4)  # u ~ 9e-8, inside the collar
        val = casimir(field, "cartan")(g)
        assert val == pytest.approx(0.25 * field(g), rel=1e-3)

    def test_axis_singularity(self):
        field = SmoothField(lambda g: 1.0)
        with pytest.raises(ChartSingularity):
            casimir(field, "cartan")(GroupElement.identity())

    def test_unknown_chart_rejected(self):
        with pytest.raises(DomainError):
            casimir(SmoothField(lambda g: 1.0), "bruhat")

    @pytest.mark.parametrize("field_index", [0, 2, 4])
    def test_factorizations_agree(self, field_index):
        field = _mixed_fields()[field_index]
        om = casimir(field, "iwasawa")
        pm = apply_e_plus(apply_e_minus(field))
        mp = apply_e_minus(apply_e_plus(field))
        x3f = apply_x3(field)
        x33f = apply_x3(apply_x3(field))
        for g in sample_points(40 + field_index, 6):
            ref = om(g)
            f1 = -0.25 * pm(g) + 0.25 * x33f(g) - 0.5j * x3f(g)
            f2 = -0.25 * mp(g) + 0.25 * x33f(g) + 0.5j * x3f(g)
            assert abs(f1 - ref) <= 1e-4 * (1.0 + abs(ref))
            assert abs(f2 - ref) <= 1e-4 * (1.0 + abs(ref))

    def test_left_invariance(self):
        field = _mixed_fields()[2]
        om = casimir(field, "iwasawa")
        rng = np.random.default_rng(50)
        for _ in range(3):
            h = from_iwasawa(
                IwasawaCoord(rng.uniform(-1, 1), rng.uniform(0.5, 2.0), rng.uniform(0, 6))
            )
            translated = SmoothField(lambda g, h=h: field.evaluator(h.mul(g)))
            om_t = casimir(translated, "iwasawa")
            for g in sample_points(51, 4):
                assert om(h.mul(g)) == pytest.approx(
                    om_t(g), abs=1e-4 * (1.0 + abs(om(h.mul(g))))
                )

    def test_raise_then_lower_matches_casimir_combination(self):
        field = basic_eigenfunction(0.2, 0)
        pm = apply_e_plus(apply_e_minus(field))
        om = casimir(field, "iwasawa")
        x3f = apply_x3(field)
        x33f = apply_x3(apply_x3(field))
        for g in sample_points(52, 5):
            lhs = pm(g)
            rhs = -4.0 * (om(g) - 0.25 * x33f(g) + 0.5j * x3f(g))
            assert abs(lhs - rhs) <= 1e-4 * (1.0 + abs(rhs))


def poly_window(t, lo, hi):
    t = np.asarray(t, dtype=float)
    s = np.clip((t - lo) / (hi - lo), 0.0, 1.0)
    return 65536.0 * (s * (1.0 - s)) ** 8


class TestIntegrationByParts:
    def test_adjoint_pair(self):
        def make(ell, xwin, ywin):
            def value(x, y, t):
                return complex(poly_window(x, *xwin) * poly_window(y, *ywin)) * cmath.exp(
                    1j * ell * t
                )

            def dx(x, y, t):
                return fd_derivative(lambda s: value(s, y, t), x, 1)

            def dy(x, y, t):
                return fd_derivative(lambda s: value(x, s, t), y, 1)

            return SmoothField(
                lambda g: value(*_coords(g)),
                iwasawa_partials={
                    "x": dx,
                    "y": dy,
                    "theta": lambda x, y, t: 1j * ell * value(x, y, t),
                },
            )

        f1 = make(1, (-1.0, 1.0), (0.6, 1.8))
        f2 = make(3, (-0.8, 1.2), (0.5, 2.0))
        hint = IwasawaBox(-1.4, 1.6, 0.35, 2.4)
        spec = QuadratureSpec(rel_tol=1e-6, abs_tol=1e-9)
        ep_f1 = apply_e_plus(f1)
        em_f2 = apply_e_minus(f2)
        lhs = integrate_G(lambda g: ep_f1(g) * f2(g).conjugate(), hint, spec)
        rhs = integrate_G(lambda g: f1(g) * em_f2(g).conjugate(), hint, spec)
        assert lhs == pytest.approx(-rhs, abs=2e-6 * (1.0 + abs(lhs)))
