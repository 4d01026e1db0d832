"""Quadrature, group integration, and finite differences."""

import math

import numpy as np
import pytest

from sl2kernels import (
    BadHint,
    IwasawaBox,
    NonConvergence,
    QuadratureSpec,
    RadialSupport,
    fd_derivative,
    integrate_1d,
    integrate_box,
    integrate_G,
    integrate_periodic,
)
from sl2kernels.group import GroupElement, u_of

TWO_PI = 2.0 * math.pi


def smooth_window(t, lo, hi):
    """C^7 bump on (lo, hi), peak value 1 at the midpoint.

    Polynomial in the interior, so panel quadrature converges geometrically
    once the support edges are resolved.
    """
    t = np.asarray(t, dtype=float)
    s = np.clip((t - lo) / (hi - lo), 0.0, 1.0)
    return 65536.0 * (s * (1.0 - s)) ** 8


class EntriesField:
    """Test field defined directly on matrix entries, with a vectorized path."""

    def __init__(self, fn):
        self.fn = fn

    def eval_entries(self, a, b, c, d):
        return np.asarray(self.fn(a, b, c, d), dtype=complex)

    def __call__(self, g):
        return complex(self.fn(g.a, g.b, g.c, g.d))


class TestQuadratureSpec:
    def test_defaults(self):
        spec = QuadratureSpec()
        assert spec.rel_tol == 1e-8 and spec.abs_tol == 1e-12
        assert spec.panel_order >= 2

    @pytest.mark.parametrize(
        "kwargs",
        [{"rel_tol": 0.0}, {"abs_tol": -1e-3}, {"panel_order": 1}, {"max_panels": 0}],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            QuadratureSpec(**kwargs)


class TestIntegrate1d:
    def test_constant(self):
        assert integrate_1d(lambda t: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_full_period_oscillation(self):
        val = integrate_1d(lambda t: np.exp(1j * t), 0.0, TWO_PI)
        assert abs(val) < 1e-10

    def test_truncated_power_tail(self):
        val = integrate_1d(lambda u: (1.0 + u) ** -2.0, 0.0, 1e6)
        assert val.real == pytest.approx(1.0, abs=1e-5)

    def test_error_estimate_within_tolerance(self):
        spec = QuadratureSpec()
        val, err = integrate_1d(lambda t: np.cos(3.0 * t), 0.0, 1.0, spec, full_output=True)
        assert err <= max(spec.rel_tol * abs(val), spec.abs_tol)
        assert val.real == pytest.approx(math.sin(3.0) / 3.0, abs=1e-10)

    def test_empty_interval(self):
        assert integrate_1d(lambda t: 5.0, 2.0, 2.0) == 0j

    def test_backwards_interval_rejected(self):
        with pytest.raises(ValueError):
            integrate_1d(lambda t: 1.0, 1.0, 0.0)

    def test_nonconvergence_carries_best(self):
        spec = QuadratureSpec(max_panels=2, panel_order=2)
        with pytest.raises(NonConvergence) as exc:
            integrate_1d(lambda t: np.sin(40.0 * t * t), 0.0, 6.0, spec)
        assert exc.value.best is not None
        assert exc.value.error > 0

    def test_deterministic(self):
        f = lambda t: np.exp(-t) * np.cos(5.0 * t)  # noqa: E731
        assert integrate_1d(f, 0.0, 3.0) == integrate_1d(f, 0.0, 3.0)


class TestIntegratePeriodic:
    def test_constant_full_circle(self):
        val = integrate_periodic(lambda t: 1.0)
        assert val.real == pytest.approx(TWO_PI, rel=1e-12)

    def test_character_orthogonality(self):
        val = integrate_periodic(lambda t: np.exp(3j * t))
        assert abs(val) < 1e-10

    def test_cosine_squared(self):
        val = integrate_periodic(lambda t: np.cos(t) ** 2)
        assert val.real == pytest.approx(math.pi, rel=1e-10)

    def test_nonconvergence(self):
        spec = QuadratureSpec(max_panels=4, panel_order=12)
        with pytest.raises(NonConvergence):
            integrate_periodic(lambda t: 1.0 / (1.001 + np.cos(t)), spec=spec)


class TestIntegrateBox:
    def test_separable_product(self):
        def f(pts):
            return np.exp(-pts[:, 0]) * np.cos(pts[:, 1])

        val = integrate_box(f, (0.0, 0.0), (1.0, 1.0))
        exact = (1.0 - math.exp(-1.0)) * math.sin(1.0)
        assert val.real == pytest.approx(exact, rel=1e-9)


class TestIntegrateG:
    def test_radial_tent(self):
        F = lambda g: max(0.0, 1.0 - u_of(g))  # noqa: E731
        val = integrate_G(F, support_hint=RadialSupport(1.0))
        assert val.real == pytest.approx(1.0, rel=1e-9)

    def test_radial_hint_too_small(self):
        F = lambda g: max(0.0, 1.0 - u_of(g))  # noqa: E731
        with pytest.raises(BadHint):
            integrate_G(F, support_hint=RadialSupport(0.5))

    def test_pure_right_type_vanishes(self):
        def fn(a, b, c, d):
            s = c * c + d * d
            x, y = (a * c + b * d) / s, 1.0 / s
            theta = np.arctan2(-c, d)
            return smooth_window(x, -1.0, 1.0) * smooth_window(y, 0.5, 2.0) * np.exp(3j * theta)

        val = integrate_G(EntriesField(fn), support_hint=IwasawaBox(-1.0, 1.0, 0.5, 2.0))
        assert abs(val) < 1e-9

    def test_chart_matches_product_of_lines(self):
        wx = lambda x: smooth_window(x, -1.0, 1.0)  # noqa: E731
        wy = lambda y: smooth_window(y, 0.5, 2.0)  # noqa: E731

        def fn(a, b, c, d):
            s = c * c + d * d
            return wx((a * c + b * d) / s) * wy(1.0 / s)

        val = integrate_G(EntriesField(fn), support_hint=IwasawaBox(-1.0, 1.0, 0.5, 2.0))
        expect = (
            integrate_1d(wx, -1.0, 1.0)
            * integrate_1d(lambda y: wy(y) / y**2, 0.5, 2.0)
            / (2.0 * math.pi)
        )
        assert val.real == pytest.approx(expect.real, rel=1e-7)

    def test_deterministic(self):
        F = lambda g: max(0.0, 1.0 - u_of(g))  # noqa: E731
        a = integrate_G(F, support_hint=RadialSupport(1.0))
        b = integrate_G(F, support_hint=RadialSupport(1.0))
        assert a == b


# (a, c, d) windows and a smooth modulator in all four entries; b = (ad-1)/c
# on the unimodular surface.
HAAR_INTEGRANDS = [
    (((0.6, 1.6), (0.8, 2.0), (0.4, 1.4)), lambda a, b, c, d: 1.0 + 0.0 * a),
    (((-1.5, -0.5), (0.8, 1.8), (-1.2, -0.3)), lambda a, b, c, d: 1.0 + 0.25 * np.cos(b)),
    (((0.5, 1.5), (-2.2, -1.0), (0.5, 1.8)), lambda a, b, c, d: np.exp(-b * b / 8.0)),
    (((1.0, 2.2), (0.6, 1.4), (0.3, 1.1)), lambda a, b, c, d: 1.0 + 0.2 * np.sin(2.0 * a + d)),
    (((-1.8, -0.6), (-1.6, -0.7), (-1.5, -0.4)), lambda a, b, c, d: 1.0 / (1.0 + b * b / 4.0)),
]


def _haar_field(windows, modulator):
    (a0, a1), (c0, c1), (d0, d1) = windows

    def fn(a, b, c, d):
        return (
            smooth_window(a, a0, a1)
            * smooth_window(c, c0, c1)
            * smooth_window(d, d0, d1)
            * modulator(a, b, c, d)
        )

    return EntriesField(fn)


def _iwasawa_hull(windows):
    """Padded (x, y) bounding box of the (a, c, d) support box."""
    (a0, a1), (c0, c1), (d0, d1) = windows
    aa, cc, dd = np.meshgrid(
        np.linspace(a0, a1, 24), np.linspace(c0, c1, 24), np.linspace(d0, d1, 24)
    )
    bb = (aa * dd - 1.0) / cc
    s = cc * cc + dd * dd
    x, y = (aa * cc + bb * dd) / s, 1.0 / s
    pad = 0.15 * (x.max() - x.min())
    return IwasawaBox(x.min() - pad, x.max() + pad, y.min() / 1.3, y.max() * 1.3)


def _bruhat_side(windows, modulator, spec):
    (a0, a1), (c0, c1), (d0, d1) = windows
    field = _haar_field(windows, modulator)

    def fn(pts):
        a, c, d = pts[:, 0], pts[:, 1], pts[:, 2]
        b = (a * d - 1.0) / c
        return field.eval_entries(a, b, c, d) / np.abs(c)

    return integrate_box(fn, (a0, c0, d0), (a1, c1, d1), spec)


class TestHaarConsistency:
    """One Jacobian constant reconciles the chart integral with the
    (a, c, d)/|c| parametrization across independent integrands."""

    def test_single_calibration_fits_all(self):
        spec = QuadratureSpec()
        ratios = []
        for windows, modulator in HAAR_INTEGRANDS:
            field = _haar_field(windows, modulator)
            chart = integrate_G(field, support_hint=_iwasawa_hull(windows), spec=spec)
            flat = _bruhat_side(windows, modulator, spec)
            ratios.append((chart / flat).real)
        kappa = ratios[0]
        for r in ratios[1:]:
            assert r == pytest.approx(kappa, rel=1e-6)
        # The measured constant under the radial normalization (bi-invariant
        # integrals equal 2 * the u-line integral, chart density
        # dx dy dtheta / (4 pi^2 y^2)) is 1 / (2 pi^2).
        assert kappa == pytest.approx(1.0 / (2.0 * math.pi**2), rel=1e-6)


class TestFdDerivative:
    def test_quadratic(self):
        assert fd_derivative(lambda x: x * x, 3.0, 1).real == pytest.approx(6.0, abs=1e-8)

    def test_complex_exponential_second(self):
        val = fd_derivative(lambda x: complex(math.cos(x), math.sin(x)), 0.0, 2)
        assert val.real == pytest.approx(-1.0, abs=1e-6)
        assert abs(val.imag) < 1e-6

    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_constant(self, order):
        assert abs(fd_derivative(lambda x: 7.5, 0.3, order)) < 1e-7

    def test_quartic_high_orders(self):
        assert fd_derivative(lambda x: x**4, 1.0, 3).real == pytest.approx(24.0, abs=1e-4)
        assert fd_derivative(lambda x: x**4, 1.0, 4).real == pytest.approx(24.0, abs=1e-3)

    def test_order_out_of_range(self):
        with pytest.raises(ValueError):
            fd_derivative(lambda x: x, 0.0, 5)
