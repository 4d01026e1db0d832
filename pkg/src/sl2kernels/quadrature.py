"""Deterministic quadrature and finite differencing.

Smooth integrands are the rule in this library (bump profiles, rotation
integrals, chart Jacobians), so two schemes cover everything:

* composite Gauss-Legendre panels with dyadic refinement for line and box
  integrals, and
* the trapezoid rule with node doubling for periodic integrands, where it
  converges spectrally.

Both refine on a fixed schedule and reduce in a fixed order, so results are
bit-identical for identical inputs regardless of threading.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import BadHint, NonConvergence

__all__ = [
    "QuadratureSpec",
    "integrate_1d",
    "integrate_periodic",
    "integrate_box",
    "integrate_G",
    "fd_derivative",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for the adaptive schemes.

    The reported error estimate on success is at most
    ``max(rel_tol * |value|, abs_tol)``.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_panels: int = 4096
    panel_order: int = 12

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.panel_order < 2:
            raise ValueError("panel_order must be at least 2")
        if self.max_panels < 1:
            raise ValueError("max_panels must be at least 1")

    def tol_for(self, value: complex) -> float:
        return max(self.rel_tol * abs(value), self.abs_tol)


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=32)
def _gl_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1.0) / 2.0, w / 2.0


def vectorize_real(f: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap ``f`` so it maps a float ndarray to a complex ndarray.

    Tries the vectorized call first; falls back to a Python loop when the
    callable only supports scalars.
    """

    def call(x: np.ndarray) -> np.ndarray:
        try:
            y = np.asarray(f(x), dtype=complex)
            if y.shape == x.shape:
                return y
        except (TypeError, ValueError):
            pass
        return np.array([complex(f(float(t))) for t in x.ravel()], dtype=complex).reshape(x.shape)

    return call


def _panel_points(a: float, b: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = _gl_nodes(order)
    width = (b - a) / panels
    starts = a + width * np.arange(panels)
    x = (starts[:, None] + width * nodes[None, :]).ravel()
    w = np.broadcast_to(width * weights[None, :], (panels, order)).ravel()
    return x, w


def _gl_panel(call: Callable, a: float, b: float, order: int) -> complex:
    nodes, weights = _gl_nodes(order)
    return complex(np.sum(call(a + (b - a) * nodes) * ((b - a) * weights)))


def _refined_panel(call: Callable, a: float, b: float, order: int):
    """Bisected value of a panel plus the coarse-vs-fine discrepancy."""
    coarse = _gl_panel(call, a, b, order)
    m = 0.5 * (a + b)
    fine = _gl_panel(call, a, m, order) + _gl_panel(call, m, b, order)
    return fine, abs(fine - coarse)


def integrate_1d(
    f: Callable,
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    full_output: bool = False,
):
    """Integrate ``f`` over [a, b] by adaptive Gauss-Legendre panels.

    Panels split dyadically where the local coarse-vs-fine discrepancy is
    largest, always worst panel first with ties broken by insertion order, so
    results are deterministic. Raises :class:`NonConvergence` (carrying the
    best estimate) when the panel budget is exhausted.
    """
    if a > b:
        raise ValueError("integrate_1d requires a <= b")
    if a == b:
        return (0j, 0.0) if full_output else 0j
    call = vectorize_real(f)

    heap: list[tuple[float, int, float, float, complex]] = []
    seq = 0
    total = 0j
    total_err = 0.0
    initial = min(8, spec.max_panels)
    edges = a + (b - a) * np.arange(initial + 1) / initial
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, err = _refined_panel(call, lo, hi, spec.panel_order)
        heapq.heappush(heap, (-err, seq, lo, hi, value))
        total += value
        total_err += err
        seq += 1

    while True:
        if total_err <= spec.tol_for(total):
            final = sum(item[4] for item in sorted(heap, key=lambda s: s[2]))
            return (final, total_err) if full_output else final
        if len(heap) >= spec.max_panels:
            raise NonConvergence(
                f"integrate_1d: panel budget {spec.max_panels} exhausted"
                f" (err~{total_err:.3e})",
                best=total,
                error=total_err,
            )
        neg_err, _, lo, hi, parent = heapq.heappop(heap)
        total -= parent
        total_err += neg_err
        m = 0.5 * (lo + hi)
        for sub_lo, sub_hi in ((lo, m), (m, hi)):
            value, err = _refined_panel(call, sub_lo, sub_hi, spec.panel_order)
            heapq.heappush(heap, (-err, seq, sub_lo, sub_hi, value))
            total += value
            total_err += err
            seq += 1


def integrate_periodic(
    f: Callable,
    period: float = 2.0 * math.pi,
    spec: QuadratureSpec = DEFAULT_SPEC,
    full_output: bool = False,
):
    """Integrate a smooth periodic ``f`` over one period.

    Uses the trapezoid rule with node doubling (spectrally accurate for
    smooth periodic integrands). Returns the raw integral; callers divide by
    ``period`` themselves when they want the normalized rotation average.
    """
    if period <= 0:
        raise ValueError("period must be positive")
    call = vectorize_real(f)
    n = 16
    prev: complex | None = None
    err = math.inf
    while n <= spec.max_panels * spec.panel_order:
        x = period * np.arange(n) / n
        value = complex(np.sum(call(x))) * period / n
        if prev is not None:
            err = abs(value - prev)
            if err <= spec.tol_for(value):
                return (value, err) if full_output else value
        prev = value
        n *= 2
    raise NonConvergence(
        f"integrate_periodic: no convergence at {n // 2} nodes (err~{err:.3e})",
        best=prev if prev is not None else 0j,
        error=err,
    )


_BOX_NODE_BUDGET = 80_000_000


def _box_axis(low: float, high: float, panels: int, order: int, periodic: bool):
    if periodic:
        n = max(8, panels * order)
        x = low + (high - low) * np.arange(n) / n
        return x, np.full(n, (high - low) / n)
    return _panel_points(low, high, panels, order)


def _box_value(f, axes_x, axes_w) -> complex:
    grids = np.meshgrid(*axes_x, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wgrid = np.meshgrid(*axes_w, indexing="ij")
    wts = np.prod(np.stack([g.ravel() for g in wgrid], axis=-1), axis=-1)
    return complex(np.sum(np.asarray(f(pts), dtype=complex) * wts))


def integrate_box(
    f: Callable[[np.ndarray], np.ndarray],
    lows: Sequence[float],
    highs: Sequence[float],
    spec: QuadratureSpec = DEFAULT_SPEC,
    base_panels: Sequence[int] | None = None,
    periodic_axes: Sequence[int] = (),
    full_output: bool = False,
):
    """Tensor-product quadrature over an axis-aligned box.

    ``f`` must accept an array of shape (npoints, ndim) and return a complex
    array of shape (npoints,). Gauss-Legendre panels are used along ordinary
    axes and uniform (trapezoid) nodes along ``periodic_axes``. Each axis is
    refined independently: the grid is accepted once doubling any single axis
    moves the value by no more than its share of the tolerance, and otherwise
    the most sensitive axis is doubled. The refinement order is a pure
    function of the integrand values, so results are deterministic.
    """
    lows = [float(v) for v in lows]
    highs = [float(v) for v in highs]
    ndim = len(lows)
    if len(highs) != ndim:
        raise ValueError("lows/highs length mismatch")
    panels = list(base_panels) if base_panels is not None else [1] * ndim

    def grid_for(p: Sequence[int]):
        axes = [
            _box_axis(lows[d], highs[d], p[d], spec.panel_order, d in periodic_axes)
            for d in range(ndim)
        ]
        return [x for x, _ in axes], [w for _, w in axes]

    def node_count(p: Sequence[int]) -> int:
        n = 1
        for d in range(ndim):
            per = max(8, p[d] * spec.panel_order) if d in periodic_axes else p[d] * spec.panel_order
            n *= per
        return n

    axes_x, axes_w = grid_for(panels)
    value = _box_value(f, axes_x, axes_w)
    while True:
        changes = []
        probes = []
        for d in range(ndim):
            trial = list(panels)
            trial[d] *= 2
            if node_count(trial) > _BOX_NODE_BUDGET:
                raise NonConvergence(
                    f"integrate_box: node budget {_BOX_NODE_BUDGET} exceeded",
                    best=value,
                    error=math.inf,
                )
            tx, tw = grid_for(trial)
            pv = _box_value(f, tx, tw)
            probes.append(pv)
            changes.append(abs(pv - value))
        err = sum(changes)
        if err <= spec.tol_for(value):
            return (value, err) if full_output else value
        worst = max(range(ndim), key=lambda d: (changes[d], -d))
        panels[worst] *= 2
        value = probes[worst]


class RadialSupport:
    """Support hint: bi-rotation-invariant integrand vanishing for u > u_max."""

    def __init__(self, u_max: float):
        if u_max <= 0:
            raise ValueError("u_max must be positive")
        self.u_max = float(u_max)


class IwasawaBox:
    """Support hint: integrand vanishes outside x in [x0, x1], y in [y0, y1]
    (all rotation angles allowed)."""

    def __init__(self, x0: float, x1: float, y0: float, y1: float):
        if not (x0 < x1 and 0 < y0 < y1):
            raise ValueError("need x0 < x1 and 0 < y0 < y1")
        self.x0, self.x1, self.y0, self.y1 = map(float, (x0, x1, y0, y1))


def integrate_G(
    F,
    support_hint,
    spec: QuadratureSpec = DEFAULT_SPEC,
    full_output: bool = False,
):
    """Haar integral of ``F`` over the group.

    The normalization is fixed by the rotation-polar reduction: a
    bi-rotation-invariant ``F`` integrates to ``2 * integral of F(a_u) du``
    (the :class:`RadialSupport` route). The :class:`IwasawaBox` route
    integrates ``F(n[x] a[y] k[theta])`` against dx dy dtheta / (4 pi^2 y^2),
    the chart density that reproduces the same normalization (a radial
    function integrates over the chart to 4 pi times its u-line integral).

    Raises :class:`BadHint` if ``F`` is detectably nonzero on the hint
    boundary.
    """
    from . import group

    if isinstance(support_hint, RadialSupport):
        profile = group.radial_evaluator(F)
        edge = abs(complex(np.asarray(profile(np.array([support_hint.u_max])), dtype=complex)[0]))
        if edge > spec.abs_tol:
            raise BadHint(f"integrand is {edge:.3e} at the radial support boundary")
        value, err = integrate_1d(profile, 0.0, support_hint.u_max, spec, full_output=True)
        value, err = 2.0 * value, 2.0 * err
        return (value, err) if full_output else value

    if not isinstance(support_hint, IwasawaBox):
        raise TypeError("support_hint must be RadialSupport or IwasawaBox")
    box = support_hint
    batch = group.matrix_evaluator(F)

    def chart_integrand(pts: np.ndarray) -> np.ndarray:
        x, y, theta = pts[:, 0], pts[:, 1], pts[:, 2]
        a, b, c, d = group.iwasawa_entries(x, y, theta)
        return batch(a, b, c, d) / (4.0 * math.pi**2 * y * y)

    theta_probe = np.linspace(0.0, 2.0 * math.pi, 17)[:-1]
    ymid = math.sqrt(box.y0 * box.y1)
    xmid = 0.5 * (box.x0 + box.x1)
    for xs, ys in (
        (np.full_like(theta_probe, box.x0), np.full_like(theta_probe, ymid)),
        (np.full_like(theta_probe, box.x1), np.full_like(theta_probe, ymid)),
        (np.full_like(theta_probe, xmid), np.full_like(theta_probe, box.y0)),
        (np.full_like(theta_probe, xmid), np.full_like(theta_probe, box.y1)),
    ):
        a, b, c, d = group.iwasawa_entries(xs, ys, theta_probe)
        if np.max(np.abs(batch(a, b, c, d))) > spec.abs_tol:
            raise BadHint("integrand is nonzero on the chart box boundary")

    return integrate_box(
        chart_integrand,
        (box.x0, box.y0, 0.0),
        (box.x1, box.y1, 2.0 * math.pi),
        spec,
        base_panels=(2, 2, 1),
        periodic_axes=(2,),
        full_output=full_output,
    )


_FD_STENCILS: dict[int, tuple[tuple[int, ...], tuple[float, ...], int]] = {
    # order -> (offsets, coefficients, power of h), all 4th-order accurate.
    1: ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12), 1),
    2: ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12), 2),
    3: ((-3, -2, -1, 1, 2, 3), (1 / 8, -8 / 8, 13 / 8, -13 / 8, 8 / 8, -1 / 8), 3),
    4: ((-3, -2, -1, 0, 1, 2, 3), (-1 / 6, 12 / 6, -39 / 6, 56 / 6, -39 / 6, 12 / 6, -1 / 6), 4),
}


def fd_step(x: float, order: int) -> float:
    """Step size for the 4th-order central stencils: eps^(1/(order+4))
    scaled by |x| + 1."""
    return math.pow(2.220446049250313e-16, 1.0 / (order + 4)) * (abs(x) + 1.0)


def fd_derivative(
    f: Callable[[float], complex], x: float, order: int = 1, step: float | None = None
) -> complex:
    """Central finite-difference derivative of ``f`` at ``x``.

    Fourth-order accurate stencils for orders 1 through 4. ``step`` overrides
    the default spacing (callers shrink it to keep stencil points inside a
    chart's domain).
    """
    if order not in _FD_STENCILS:
        raise ValueError("order must be 1, 2, 3, or 4")
    offsets, coeffs, hpow = _FD_STENCILS[order]
    h = fd_step(x, order) if step is None else float(step)
    acc = 0j
    for k, cfit in zip(offsets, coeffs):
        acc += cfit * complex(f(x + k * h))
    return acc / h**hpow
