"""Congruence kernel sums and their discrepancy experiments.

The chain here goes: certified dyadic bump weights on matrix entries (or on
the upper-half-plane chart for right-rotation-invariant weights), finite
lattice kernel sums over the level-q family via entry-interval enumeration,
main terms from Haar mass over the lattice covolume, weighted point-pair
discrepancies with Hecke twists and unskewing, and finally the two headline
inequality experiments that track the left and right sides of the moment
bounds with majorant-kernel pairings on the right.

Kernel sums reduce over the enumeration stream in its deterministic
(c, d, a, b) order with fixed-shape pairwise summation, so repeated runs
reproduce bit-identical values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .arithmetic import (
    DirichletCharacter,
    LatticeQuery,
    enumerate_gamma0,
    gamma0_index,
    hecke_cosets,
)
from .errors import (
    CertificationFailure,
    ConfigError,
    CoprimalityError,
    DomainError,
)
from .group import GroupElement
from .harmonics import TypePair
from .majorants import k_skewed
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_1d

__all__ = [
    "DERIVATIVE_MARGIN",
    "SPECTRAL_GAP_DEFAULT",
    "BumpAxis",
    "DyadicBump",
    "make_bump",
    "SplineWindow",
    "box_spline_window",
    "PointFunctional",
    "KernelWeight",
    "IwasawaWeight",
    "automorphic_kernel",
    "main_term",
    "discrepancy",
    "weighted_discrepancy",
    "hecke_twisted_sum",
    "unskew",
    "projected_kernel",
    "ExperimentReport",
    "theorem_experiment",
    "kinvariant_experiment",
    "character_from_config",
    "functional_from_config",
]

# Documented margin for sampled mixed-derivative bounds of product bumps.
# Construction certifies each axis against the tighter single-axis budget
# (delta X)^(-j), so every mixed product of axis factors automatically sits
# inside the stated margin.
DERIVATIVE_MARGIN = 1.5

# Default spectral-gap exponent used by the experiment right-hand sides; a
# configuration constant, never computed from spectra.
SPECTRAL_GAP_DEFAULT = 7.0 / 64.0

_PARITIES = ("plus", "even", "odd")
_FD_SLACK = 1.0 + 1e-6
_POSITIVITY_TOL = 1e-8
_ZETA_TWO = math.pi * math.pi / 6.0


# -- smoothed box windows --------------------------------------------------------


@lru_cache(maxsize=32)
def _ih_cdf_coefficients(n: int) -> np.ndarray:
    """Piecewise polynomial coefficients of the n-fold uniform-sum CDF.

    Row k covers z in [k, k+1] and holds coefficients in the centered local
    variable t = z - k - 1/2. The inclusion-exclusion form of the CDF loses
    roughly n digits to cancellation when evaluated directly, so the
    expansion is done in exact rational arithmetic and converted to floats
    once; the centered coefficients themselves are well conditioned.
    """
    fact = math.factorial(n)
    rows = []
    for k in range(n):
        coeffs = [Fraction(0)] * (n + 1)
        for m in range(k + 1):
            base = math.comb(n, m) if m % 2 == 0 else -math.comb(n, m)
            shift = Fraction(2 * (k - m) + 1, 2)
            for i in range(n + 1):
                coeffs[i] += base * math.comb(n, i) * shift ** (n - i)
        rows.append([float(Fraction(c, fact)) for c in coeffs])
    return np.array(rows, dtype=float)


@lru_cache(maxsize=32)
def _ih_pdf_coefficients(n: int) -> np.ndarray:
    cdf = _ih_cdf_coefficients(n)
    return cdf[:, 1:] * np.arange(1, n + 1, dtype=float)[None, :]


def _piecewise_horner(coeffs: np.ndarray, n: int, z: np.ndarray) -> np.ndarray:
    piece = np.clip(np.floor(z).astype(int), 0, n - 1)
    t = z - piece - 0.5
    rows = coeffs[piece]
    acc = rows[:, -1].copy()
    for i in range(rows.shape[1] - 2, -1, -1):
        acc = acc * t + rows[:, i]
    return acc


def _ih_cdf(n: int, z) -> np.ndarray:
    """CDF of the sum of n independent uniform [0, 1] variables."""
    arr = np.asarray(z, dtype=float)
    flat = np.atleast_1d(arr).astype(float).copy()
    out = np.zeros_like(flat)
    out[flat >= n] = 1.0
    mid = (flat > 0.0) & (flat < n)
    if np.any(mid):
        out[mid] = _piecewise_horner(_ih_cdf_coefficients(n), n, flat[mid])
    return out.reshape(arr.shape)


def _ih_pdf(n: int, z) -> np.ndarray:
    """Density of the sum of n independent uniform [0, 1] variables."""
    arr = np.asarray(z, dtype=float)
    flat = np.atleast_1d(arr).astype(float)
    out = np.zeros_like(flat)
    mid = (flat > 0.0) & (flat < n)
    if np.any(mid):
        out[mid] = _piecewise_horner(_ih_pdf_coefficients(n), n, flat[mid])
    return out.reshape(arr.shape)


def _fd_quotient(profile, x: np.ndarray, order: int, step: float) -> np.ndarray:
    """Central finite-difference quotient of the given order, vectorized.

    For a function with `order` continuous derivatives the quotient equals
    an interior value of that derivative (iterated mean value theorem), so
    sampled maxima never exceed the true sup bound regardless of the step;
    measuring with the quotient is therefore a sound certification probe.
    """
    acc = np.zeros_like(x, dtype=float)
    for k in range(order + 1):
        shift = (0.5 * order - k) * step
        term = np.asarray(profile(x + shift), dtype=float)
        acc += term * math.comb(order, k) * (1.0 if k % 2 == 0 else -1.0)
    return acc / step**order


@dataclass(frozen=True)
class SplineWindow:
    """Peak-normalized window of smoothness class C^(order - 2).

    The shape is the order-fold self-convolution of a uniform box density,
    rescaled to the interval [center - half_width, center + half_width] and
    to peak value one at the center. Construction certifies sampled
    derivative quotients against the analytic bounds (2 / box_width)^j / peak
    up to order j = order - 2.
    """

    order: int
    center: float
    half_width: float
    box_width: float
    peak: float
    certificates: tuple[float, ...]

    @property
    def smoothness(self) -> int:
        return self.order - 2

    def derivative_bound(self, j: int) -> float:
        if not 1 <= j <= self.smoothness:
            raise DomainError(f"derivative order {j} outside certified range")
        return (2.0 / self.box_width) ** j / self.peak

    def __call__(self, x) -> np.ndarray:
        z = (np.asarray(x, dtype=float) - (self.center - self.half_width)) / self.box_width
        return _ih_pdf(self.order, z) / self.peak


def box_spline_window(center: float, half_width: float, order: int = 12) -> SplineWindow:
    """Build and certify a compactly supported spline window.

    The result vanishes outside [center - half_width, center + half_width],
    equals one exactly at the center, and has order - 2 certified continuous
    derivatives; order 12 gives the ten-times-differentiable window used by
    certified transform-decay tests.
    """
    if not isinstance(order, int) or not 3 <= order <= 24:
        raise DomainError(f"window order {order!r} must be an integer in [3, 24]")
    for name, v in (("center", center), ("half_width", half_width)):
        if not math.isfinite(v):
            raise DomainError(f"{name}={v} must be finite")
    if half_width <= 0:
        raise DomainError(f"half_width={half_width} must be positive")
    box_width = 2.0 * half_width / order
    peak = float(_ih_pdf(order, np.array([order / 2.0]))[0])
    lo = center - half_width

    def evaluate(x):
        return _ih_pdf(order, (np.asarray(x, dtype=float) - lo) / box_width) / peak

    xs = np.linspace(center - 1.05 * half_width, center + 1.05 * half_width, 241)
    xs = np.concatenate([xs, lo + box_width * np.arange(order + 1)])
    step = box_width / 2.0
    certificates = []
    for j in range(1, order - 1):
        measured = float(np.max(np.abs(_fd_quotient(evaluate, xs, j, step))))
        bound = (2.0 / box_width) ** j / peak
        if measured > bound * _FD_SLACK:
            raise CertificationFailure(
                f"window derivative order {j}: sampled {measured:.6e} exceeds "
                f"analytic bound {bound:.6e}"
            )
        certificates.append(measured)
    return SplineWindow(order, float(center), float(half_width), box_width, peak,
                        tuple(certificates))


# -- dyadic bumps ----------------------------------------------------------------


@dataclass(frozen=True)
class BumpAxis:
    """One axis of a product bump: a smoothed indicator of [X, 2X].

    The profile is the indicator of the shrunk base [base_lo, base_hi]
    convolved n_boxes times with a uniform kernel of width `width`, so the
    support is exactly [X, 2X], the plateau value is exactly one (and always
    attained at 1.5 X), and the profile has n_boxes - 1 continuous
    derivatives. The `even` and `odd` parities mirror the profile onto the
    negative shell.
    """

    scale: float
    parity: str
    n_boxes: int
    width: float
    base_lo: float
    base_hi: float

    def profile(self, x) -> np.ndarray:
        """One-sided profile as a function of the positive coordinate."""
        arr = np.asarray(x, dtype=float)
        n = self.n_boxes
        half = 0.5 * n
        left = _ih_cdf(n, (arr - self.base_lo) / self.width + half)
        right = _ih_cdf(n, (arr - self.base_hi) / self.width + half)
        return left - right

    def __call__(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if self.parity == "plus":
            return self.profile(arr)
        vals = self.profile(np.abs(arr))
        if self.parity == "odd":
            return vals * np.sign(arr)
        return vals

    def integral(self, kind: str = "one", spec: QuadratureSpec = DEFAULT_SPEC) -> float:
        """Integral of the axis factor against 1, 1/|x|, or 1/x^2.

        Mollification preserves mass, so the plain integral is the exact
        base length; the weighted kinds go through adaptive quadrature on
        the positive shell. Odd axes pair to zero against even weights.
        """
        if kind not in ("one", "inv_abs", "inv_square"):
            raise DomainError(f"unknown integral weight kind {kind!r}")
        if self.parity == "odd":
            return 0.0
        doubling = 2.0 if self.parity == "even" else 1.0
        if kind == "one":
            return doubling * (self.base_hi - self.base_lo)
        power = 1 if kind == "inv_abs" else 2
        value = integrate_1d(
            lambda x: self.profile(x) / np.asarray(x, dtype=float) ** power,
            self.scale,
            2.0 * self.scale,
            spec,
        )
        return doubling * float(value.real)


@dataclass(frozen=True)
class DyadicBump:
    """Product of certified per-axis dyadic bumps.

    `order` derivatives per axis are certified at construction against the
    single-axis budget (delta * scale)^(-j), which keeps every sampled mixed
    derivative of the product within DERIVATIVE_MARGIN times
    prod_i (delta * scale_i)^(-j_i) for multi-orders with sum <= order.
    `certificates` stores the measured per-axis sups for orders 1..order.
    """

    axes: tuple[BumpAxis, ...]
    delta: float
    order: int
    certificates: tuple[tuple[float, ...], ...]

    @property
    def dims(self) -> int:
        return len(self.axes)

    @property
    def scales(self) -> tuple[float, ...]:
        return tuple(axis.scale for axis in self.axes)

    @property
    def parities(self) -> tuple[str, ...]:
        return tuple(axis.parity for axis in self.axes)

    def __call__(self, *coords) -> np.ndarray:
        if len(coords) != len(self.axes):
            raise DomainError(
                f"bump of dimension {len(self.axes)} called with {len(coords)} coordinates"
            )
        value = self.axes[0](coords[0])
        for axis, c in zip(self.axes[1:], coords[1:]):
            value = value * axis(c)
        return value


def _certify_axis(axis: BumpAxis, delta: float, order: int) -> tuple[float, ...]:
    scale = axis.scale
    breakpoints = np.concatenate(
        [
            axis.base_lo + axis.width * (np.arange(axis.n_boxes + 1) - 0.5 * axis.n_boxes),
            axis.base_hi + axis.width * (np.arange(axis.n_boxes + 1) - 0.5 * axis.n_boxes),
        ]
    )
    xs = np.concatenate(
        [
            np.linspace(scale - axis.width, 2.0 * scale + axis.width, 161),
            breakpoints,
            breakpoints + axis.width / 3.0,
            breakpoints - axis.width / 3.0,
        ]
    )
    step = axis.width / 2.0
    measured = []
    for j in range(1, order + 1):
        sup = float(np.max(np.abs(_fd_quotient(axis.profile, xs, j, step))))
        budget = (delta * scale) ** (-j)
        if sup > budget * _FD_SLACK:
            raise CertificationFailure(
                f"axis at scale {scale}: order-{j} derivative sample {sup:.6e} "
                f"exceeds budget {budget:.6e}; the smoothing width forced by "
                f"keeping the plateau cannot absorb delta={delta} at order {order}"
            )
        measured.append(sup)
    return tuple(measured)


def make_bump(
    scales: Sequence[float],
    delta: float,
    order: int = 10,
    parities: Sequence[str] | None = None,
) -> DyadicBump:
    """Build a certified product bump on dyadic shells [X_i, 2 X_i].

    Each axis smooths the shell indicator by order + 1 uniform convolutions
    of width min(2 delta X, X / (2 (order + 1))): the first branch meets the
    derivative budget with a factor-two cushion, the second keeps the
    plateau from collapsing, and the certification sweep decides honestly
    whether the pair (delta, order) is feasible.
    """
    if not isinstance(order, int) or not 0 <= order <= 12:
        raise DomainError(f"order {order!r} must be an integer in [0, 12]")
    if not (isinstance(delta, (int, float)) and math.isfinite(delta) and 0.0 < delta <= 0.5):
        raise DomainError(f"smoothness scale delta={delta} must lie in (0, 1/2]")
    scales = tuple(float(s) for s in scales)
    if not scales:
        raise DomainError("at least one scale is required")
    for s in scales:
        if not (math.isfinite(s) and s > 0):
            raise DomainError(f"scale {s} must be finite and positive")
    if parities is None:
        parities = ("plus",) * len(scales)
    parities = tuple(parities)
    if len(parities) != len(scales):
        raise DomainError("parities must match scales in length")
    for p in parities:
        if p not in _PARITIES:
            raise DomainError(f"unknown parity {p!r}; expected one of {_PARITIES}")

    n = order + 1
    axes = []
    certificates = []
    for scale, parity in zip(scales, parities):
        width = min(2.0 * delta * scale, scale / (2.0 * n))
        base_lo = scale + 0.5 * n * width
        base_hi = 2.0 * scale - 0.5 * n * width
        axis = BumpAxis(scale, parity, n, width, base_lo, base_hi)
        certificates.append(_certify_axis(axis, delta, order))
        axes.append(axis)
    return DyadicBump(tuple(axes), float(delta), order, tuple(certificates))


# -- point functionals -----------------------------------------------------------


@dataclass(frozen=True)
class PointFunctional:
    """Finite complex-weighted combination of evaluation points on the group."""

    atoms: tuple[tuple[GroupElement, complex], ...]

    def __post_init__(self) -> None:
        canonical = []
        for entry in self.atoms:
            point, weight = entry
            if not isinstance(point, GroupElement):
                raise DomainError(f"atom point {point!r} is not a group element")
            canonical.append((point, complex(weight)))
        object.__setattr__(self, "atoms", tuple(canonical))

    @staticmethod
    def dirac(point: GroupElement | None = None, weight: complex = 1.0) -> "PointFunctional":
        return PointFunctional(((point if point is not None else GroupElement.identity(),
                                 complex(weight)),))

    def translated_right(self, h: GroupElement) -> "PointFunctional":
        return PointFunctional(tuple((g @ h, w) for g, w in self.atoms))

    def translated_left(self, h: GroupElement) -> "PointFunctional":
        return PointFunctional(tuple((h @ g, w) for g, w in self.atoms))

    def scaled(self, factor: complex) -> "PointFunctional":
        return PointFunctional(tuple((g, w * complex(factor)) for g, w in self.atoms))

    def total_weight(self) -> complex:
        return sum((w for _, w in self.atoms), 0j)

    def to_json(self) -> list:
        return [
            {"tau": g.to_json(), "weight": [w.real, w.imag]} for g, w in self.atoms
        ]

    @staticmethod
    def from_json(obj) -> "PointFunctional":
        atoms = []
        for entry in obj:
            g = GroupElement.from_json(entry["tau"])
            w = entry.get("weight", 1.0)
            if isinstance(w, (list, tuple)):
                w = complex(w[0], w[1] if len(w) > 1 else 0.0)
            atoms.append((g, complex(w)))
        return PointFunctional(tuple(atoms))


# -- kernel weights --------------------------------------------------------------


@dataclass(frozen=True)
class KernelWeight:
    """Entry bump F((a, b; c, d)) = f(a, c, d), optionally skew-conjugated.

    With skews (r1, r2) the value at g is the base bump at the entries of
    a[r1] g a[r2]^(-1), which rescales the entry supports to the effective
    scales (A sqrt(r2/r1), C sqrt(r1 r2), D sqrt(r1/r2)); this is the
    unskewing move, and composing skews multiplies the ratios. The weight
    never depends on the b entry; its support still pins |b| through the
    determinant equation, which is what the enumeration box uses.
    """

    bump: DyadicBump
    skews: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self) -> None:
        if self.bump.dims != 3:
            raise DomainError(
                f"entry weight needs a 3-dimensional bump, got {self.bump.dims}"
            )
        r1, r2 = (float(self.skews[0]), float(self.skews[1]))
        for r in (r1, r2):
            if not (math.isfinite(r) and r > 0):
                raise DomainError(f"skew ratio {r} must be finite and positive")
        object.__setattr__(self, "skews", (r1, r2))

    def _entry_factors(self) -> tuple[float, float, float]:
        r1, r2 = self.skews
        return (math.sqrt(r1 / r2), 1.0 / math.sqrt(r1 * r2), math.sqrt(r2 / r1))

    def effective_scales(self) -> tuple[float, float, float]:
        fa, fc, fd = self._entry_factors()
        A, C, D = self.bump.scales
        return (A / fa, C / fc, D / fd)

    def evaluate_entries(self, a, b, c, d) -> np.ndarray:
        fa, fc, fd = self._entry_factors()
        return self.bump(np.asarray(a, dtype=float) * fa,
                         np.asarray(c, dtype=float) * fc,
                         np.asarray(d, dtype=float) * fd)

    def __call__(self, g: GroupElement) -> float:
        return float(self.evaluate_entries(g.a, g.b, g.c, g.d))

    def support_intervals(self) -> tuple[tuple[float, float], ...]:
        A, C, D = self.effective_scales()
        bound_b = (4.0 * A * D + 1.0) / C
        return (
            (-2.0 * A, 2.0 * A),
            (-bound_b, bound_b),
            (-2.0 * C, 2.0 * C),
            (-2.0 * D, 2.0 * D),
        )

    def skewed(self, r1: float, r2: float) -> "KernelWeight":
        return KernelWeight(self.bump, (self.skews[0] * r1, self.skews[1] * r2))

    def haar_integral(self, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
        """Haar mass under the normalization dx dy dtheta / (4 pi^2 y^2).

        In the c != 0 cell that normalization equals
        da dc dd / (2 pi^2 |c|), so the separable bump integrates to the
        product of axis integrals with the middle axis weighted by 1/|c|.
        Diagonal conjugation preserves Haar mass, so the skew never enters.
        """
        ax_a, ax_c, ax_d = self.bump.axes
        return (
            ax_a.integral("one", spec)
            * ax_c.integral("inv_abs", spec)
            * ax_d.integral("one", spec)
            / (2.0 * math.pi * math.pi)
        )


@dataclass(frozen=True)
class IwasawaWeight:
    """Right-rotation-invariant weight F(n[x] a[y] k) = f(x, y).

    Built from a 2-dimensional bump with scales (X, Y); the y axis must use
    the plus parity since y is a positive chart coordinate.
    """

    bump: DyadicBump

    def __post_init__(self) -> None:
        if self.bump.dims != 2:
            raise DomainError(
                f"chart weight needs a 2-dimensional bump, got {self.bump.dims}"
            )
        if self.bump.axes[1].parity != "plus":
            raise DomainError("the y axis of a chart weight must have plus parity")

    @property
    def scales(self) -> tuple[float, float]:
        return (self.bump.axes[0].scale, self.bump.axes[1].scale)

    def evaluate_entries(self, a, b, c, d) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        c = np.asarray(c, dtype=float)
        d = np.asarray(d, dtype=float)
        y = 1.0 / (c * c + d * d)
        x = (a * c + b * d) * y
        return self.bump(x, y)

    def __call__(self, g: GroupElement) -> float:
        return float(self.evaluate_entries(g.a, g.b, g.c, g.d))

    def support_intervals(self) -> tuple[tuple[float, float], ...]:
        X, Y = self.scales
        s_cd = 1.0 / math.sqrt(Y)
        s_ab = math.sqrt(2.0 * Y) + 2.0 * X / math.sqrt(Y)
        return ((-s_ab, s_ab), (-s_ab, s_ab), (-s_cd, s_cd), (-s_cd, s_cd))

    def haar_integral(self, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
        """Haar mass: the rotation fiber contributes 2 pi, leaving
        (1 / 2 pi) * integral of f(x, y) dx dy / y^2."""
        ax_x, ax_y = self.bump.axes
        return ax_x.integral("one", spec) * ax_y.integral("inv_square", spec) / (2.0 * math.pi)


# -- kernel sums -----------------------------------------------------------------


def _interval_matmul(alo, ahi, blo, bhi):
    """Entrywise interval product of 2x2 interval matrices."""
    clo = np.zeros((2, 2))
    chi = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            lo_sum = 0.0
            hi_sum = 0.0
            for k in range(2):
                products = (
                    alo[i, k] * blo[k, j],
                    alo[i, k] * bhi[k, j],
                    ahi[i, k] * blo[k, j],
                    ahi[i, k] * bhi[k, j],
                )
                lo_sum += min(products)
                hi_sum += max(products)
            clo[i, j] = lo_sum
            chi[i, j] = hi_sum
    return clo, chi


def _exact_interval(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return m.copy(), m.copy()


def _support_box_arrays(weight) -> tuple[np.ndarray, np.ndarray]:
    box = weight.support_intervals()
    lo = np.array([[box[0][0], box[1][0]], [box[2][0], box[3][0]]])
    hi = np.array([[box[0][1], box[1][1]], [box[2][1], box[3][1]]])
    return lo, hi


def _entry_bounds(lo: np.ndarray, hi: np.ndarray) -> tuple[float, float, float, float]:
    mags = np.maximum(np.abs(lo), np.abs(hi))
    return (
        max(float(mags[0, 0]), 0.5),
        max(float(mags[0, 1]), 0.5),
        max(float(mags[1, 0]), 0.5),
        max(float(mags[1, 1]), 0.5),
    )


def _chi_table(chi: DirichletCharacter) -> np.ndarray:
    return np.array([complex(chi(r)) for r in range(chi.q)], dtype=complex)


def _enumerate_entries(weight, q, tau1, tau2, extra_radius: float = 0.0):
    """Integer entry arrays of lattice candidates for the support box image.

    The gamma range comes from interval arithmetic on tau1 box tau2^(-1);
    `extra_radius` widens the box entrywise (used when the evaluation points
    are later moved along rotation orbits).
    """
    lo, hi = _support_box_arrays(weight)
    if extra_radius:
        lo = lo - extra_radius
        hi = hi + extra_radius
    t1lo, t1hi = _exact_interval(tau1.matrix())
    t2lo, t2hi = _exact_interval(tau2.inv().matrix())
    lo, hi = _interval_matmul(t1lo, t1hi, lo, hi)
    lo, hi = _interval_matmul(lo, hi, t2lo, t2hi)
    query = LatticeQuery(q, *_entry_bounds(lo, hi))
    mats = list(enumerate_gamma0(query))
    if not mats:
        empty = np.zeros(0, dtype=float)
        return empty, empty, empty, empty, np.zeros(0, dtype=int)
    raw = np.array([m.entries() for m in mats], dtype=float)
    residues = np.array([m.d % q for m in mats], dtype=int)
    return raw[:, 0], raw[:, 1], raw[:, 2], raw[:, 3], residues


def _kernel_terms(weight, q, chi_values, tau1, tau2):
    ga, gb, gc, gd, residues = _enumerate_entries(weight, q, tau1, tau2)
    count = ga.size
    if count == 0:
        return 0j, 0, 0
    t1 = tau1.inv()
    t2 = tau2
    ha = t1.a * ga + t1.b * gc
    hb = t1.a * gb + t1.b * gd
    hc = t1.c * ga + t1.d * gc
    hd = t1.c * gb + t1.d * gd
    ea = ha * t2.a + hb * t2.c
    eb = ha * t2.b + hb * t2.d
    ec = hc * t2.a + hd * t2.c
    ed = hc * t2.b + hd * t2.d
    values = np.asarray(weight.evaluate_entries(ea, eb, ec, ed))
    terms = np.conj(chi_values[residues]) * values
    return complex(np.sum(terms)), int(count), int(np.count_nonzero(values))


def automorphic_kernel(
    weight,
    q: int,
    chi: DirichletCharacter,
    tau1: GroupElement | None = None,
    tau2: GroupElement | None = None,
    full_output: bool = False,
):
    """Lattice kernel sum over the level-q family at a point pair.

    Computes the finite sum of conj(chi(gamma)) times the weight at
    tau1^(-1) gamma tau2, with gamma enumerated from the entry-interval
    image of the weight's certified support box. The weight must expose
    `evaluate_entries` and `support_intervals`; entry bumps, chart weights,
    and the radial or angular majorant kernels all qualify. With
    `full_output` the return carries (value, enumerated, nonzero) counts.
    """
    if chi.q != q:
        raise DomainError(f"character modulus {chi.q} does not match level {q}")
    tau1 = tau1 if tau1 is not None else GroupElement.identity()
    tau2 = tau2 if tau2 is not None else GroupElement.identity()
    value, count, kept = _kernel_terms(weight, q, _chi_table(chi), tau1, tau2)
    if full_output:
        return value, count, kept
    return value


def main_term(
    weight,
    q: int,
    chi: DirichletCharacter,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> complex:
    """Expected density of the kernel sum: Haar mass over lattice covolume.

    For the principal character this is haar_integral / (index / 12) with
    index = q prod (1 + 1/p); for an entry bump that collapses to the closed
    form (integral of f(a, c, d) da dc dd / |c|) / (zeta(2) index), which is
    what this routine evaluates in that case. Nonprincipal characters average
    to zero.
    """
    if chi.q != q:
        raise DomainError(f"character modulus {chi.q} does not match level {q}")
    if not chi.is_principal():
        return 0j
    index = gamma0_index(q)
    if isinstance(weight, KernelWeight):
        ax_a, ax_c, ax_d = weight.bump.axes
        entry_integral = (
            ax_a.integral("one", spec)
            * ax_c.integral("inv_abs", spec)
            * ax_d.integral("one", spec)
        )
        return complex(entry_integral / (_ZETA_TWO * index))
    if isinstance(weight, IwasawaWeight):
        return complex(weight.haar_integral(spec) * 12.0 / index)
    return complex(weight.haar_integral() * 12.0 / index)


def discrepancy(
    weight,
    q: int,
    chi: DirichletCharacter,
    tau1: GroupElement | None = None,
    tau2: GroupElement | None = None,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> complex:
    """Kernel sum minus its main term at a single point pair."""
    return automorphic_kernel(weight, q, chi, tau1, tau2) - main_term(weight, q, chi, spec)


def _pairing_stats(alpha1: PointFunctional, alpha2: PointFunctional, weight, q, chi, spec):
    """Weighted discrepancy together with its scale and counting diagnostics."""
    chi_values = _chi_table(chi)
    kernel_part = 0j
    enumerated = 0
    kept = 0
    for g1, w1 in alpha1.atoms:
        for g2, w2 in alpha2.atoms:
            value, count, nonzero = _kernel_terms(weight, q, chi_values, g1, g2)
            kernel_part += w1.conjugate() * w2 * value
            enumerated += count
            kept += nonzero
    mass_part = (
        main_term(weight, q, chi, spec)
        * alpha1.total_weight().conjugate()
        * alpha2.total_weight()
    )
    return kernel_part - mass_part, kernel_part, mass_part, enumerated, kept


def weighted_discrepancy(
    alpha1: PointFunctional,
    alpha2: PointFunctional,
    weight,
    q: int,
    chi: DirichletCharacter,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> complex:
    """Sesquilinear discrepancy pairing: conjugate weights on the first slot.

    Equals the double sum of conj(alpha1 weight) alpha2 weight times the
    discrepancy at each atom pair; the main term folds in through the
    product of total masses.
    """
    if chi.q != q:
        raise DomainError(f"character modulus {chi.q} does not match level {q}")
    value, _, _, _, _ = _pairing_stats(alpha1, alpha2, weight, q, chi, spec)
    return value


def _validate_hecke_index(h, q: int) -> int:
    if not isinstance(h, (int, np.integer)) or isinstance(h, bool) or h < 1:
        raise DomainError(f"Hecke index {h!r} must be a positive integer")
    h = int(h)
    if math.gcd(h, q) != 1:
        raise CoprimalityError(f"Hecke index {h} shares a factor with level {q}")
    return h


def _hecke_expand(
    alpha: PointFunctional,
    beta: Mapping[int, complex],
    q: int,
    chi: DirichletCharacter,
    conjugate: bool,
) -> PointFunctional:
    """Expand a Hecke-weighted functional into translated atoms.

    Slot one (`conjugate` true) carries conj(chi(a)) conj(beta(h)) / sqrt(h)
    on each coset so that the sesquilinear pairing, which conjugates slot
    one again, applies the operator's unconjugated chi(a) beta(h) weights;
    slot two carries them plainly.
    """
    atoms = []
    for h in sorted(beta):
        index = _validate_hecke_index(h, q)
        bw = complex(beta[h])
        if bw == 0:
            continue
        root = 1.0 / math.sqrt(index)
        for coset in hecke_cosets(index):
            cw = complex(chi(coset.a))
            factor = (bw.conjugate() * cw.conjugate() if conjugate else bw * cw) * root
            if factor == 0:
                continue
            mover = coset.scaled_group()
            for g, w in alpha.atoms:
                atoms.append((mover @ g, w * factor))
    return PointFunctional(tuple(atoms))


def hecke_twisted_sum(
    beta1: Mapping[int, complex],
    beta2: Mapping[int, complex],
    alpha1: PointFunctional,
    alpha2: PointFunctional,
    weight,
    q: int,
    chi: DirichletCharacter,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> complex:
    """Bilinear Hecke fold of the discrepancy pairing.

    Applies the two-index Hecke operator through coset expansion of each
    slot's functional: sum over (h1, h2) of beta1(h1) beta2(h2) times the
    pairing against the twisted kernel, realized as a single widened
    pairing. Left translation by coset representatives commutes with the
    lattice sum because the kernel is left-automorphic, so coset
    representative choices do not affect the value.
    """
    expanded1 = _hecke_expand(alpha1, beta1, q, chi, conjugate=True)
    expanded2 = _hecke_expand(alpha2, beta2, q, chi, conjugate=False)
    return weighted_discrepancy(expanded1, expanded2, weight, q, chi, spec)


def unskew(
    weight: KernelWeight,
    alpha1: PointFunctional,
    alpha2: PointFunctional,
    r1: float | None = None,
    r2: float | None = None,
) -> tuple[KernelWeight, PointFunctional, PointFunctional]:
    """Rebalance an entry weight to equal effective scales.

    Returns the conjugation-translated weight together with the functionals
    right-translated by the matching diagonals; the discrepancy pairing of
    the returned triple reproduces the original term by term. The default
    ratios A/C and D/C land the effective scales at sqrt(AD) across all
    three axes.
    """
    if not isinstance(weight, KernelWeight):
        raise DomainError("unskewing applies to entry-bump weights")
    A, C, D = weight.effective_scales()
    r1 = A / C if r1 is None else float(r1)
    r2 = D / C if r2 is None else float(r2)
    for r in (r1, r2):
        if not (math.isfinite(r) and r > 0):
            raise DomainError(f"unskew ratio {r} must be finite and positive")
    return (
        weight.skewed(r1, r2),
        alpha1.translated_right(GroupElement.a_diag(r1)),
        alpha2.translated_right(GroupElement.a_diag(r2)),
    )


def projected_kernel(
    weight,
    q: int,
    chi: DirichletCharacter,
    tau1: GroupElement,
    tau2: GroupElement,
    pair: TypePair,
    samples: int = 16,
) -> complex:
    """Double rotation-type coefficient of the kernel sum at a point pair.

    Averages the kernel over uniform rotation grids in both slots against
    e^(-i l theta) phases. The grid trig tables are built half-period
    symmetric, so the negation pairing gamma to -gamma cancels coefficients
    of parity opposite to the character down to rounding level; coefficients
    of the matching parity converge spectrally in the sample count.
    """
    if chi.q != q:
        raise DomainError(f"character modulus {chi.q} does not match level {q}")
    if samples < 4 or samples % 2:
        raise DomainError(f"samples={samples} must be an even count of at least 4")
    if samples <= 2 * max(abs(pair.l1), abs(pair.l2)):
        raise DomainError(
            f"samples={samples} cannot resolve types ({pair.l1}, {pair.l2})"
        )
    # Rotation orbits move entries by at most the matrix sup norm, so widen
    # the support box once and share a single enumeration for all angles.
    lo, hi = _support_box_arrays(weight)
    radius = float(np.max(np.maximum(np.abs(lo), np.abs(hi))))
    ga, gb, gc, gd, residues = _enumerate_entries(
        weight, q, tau1, tau2, extra_radius=radius
    )
    chi_weights = np.conj(_chi_table(chi)[residues]) if ga.size else np.zeros(0, complex)
    t1 = tau1.inv()
    t2 = tau2
    ha = t1.a * ga + t1.b * gc
    hb = t1.a * gb + t1.b * gd
    hc = t1.c * ga + t1.d * gc
    hd = t1.c * gb + t1.d * gd
    ea = ha * t2.a + hb * t2.c
    eb = ha * t2.b + hb * t2.d
    ec = hc * t2.a + hd * t2.c
    ed = hc * t2.b + hd * t2.d

    half = samples // 2
    angles = 2.0 * math.pi * np.arange(half) / samples
    cos_t = np.concatenate([np.cos(angles), -np.cos(angles)])
    sin_t = np.concatenate([np.sin(angles), -np.sin(angles)])

    def phases(l: int) -> np.ndarray:
        head = np.exp(-1j * l * angles)
        return np.concatenate([head, head * (-1.0) ** l])

    phase1 = phases(pair.l1)
    phase2 = phases(pair.l2)
    total = 0j
    for i in range(samples):
        c1, s1 = cos_t[i], sin_t[i]
        pa = c1 * ea - s1 * ec
        pb = c1 * eb - s1 * ed
        pc = s1 * ea + c1 * ec
        pd = s1 * eb + c1 * ed
        for j in range(samples):
            c2, s2 = cos_t[j], sin_t[j]
            values = weight.evaluate_entries(
                pa * c2 - pb * s2, pa * s2 + pb * c2, pc * c2 - pd * s2, pc * s2 + pd * c2
            )
            kernel = complex(np.sum(chi_weights * np.asarray(values)))
            total += kernel * phase1[i] * phase2[j]
    return total / samples**2


# -- experiments -----------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentReport:
    """Both sides of an inequality experiment and its reproduction data.

    `pairings` are the real majorant pairings entering the right side,
    `positivity_scales` their magnitude scales used by the sign check, and
    `err_est` a coarse numerical error scale (quadrature tolerance times the
    largest pairing magnitude), a diagnostic rather than a rigorous bound.
    """

    lhs: complex
    rhs: float
    ratio: float
    pairings: tuple[float, ...]
    positivity_scales: tuple[float, ...]
    counts: Mapping[str, int]
    err_est: float
    config: Mapping[str, object]

    def to_json(self) -> dict:
        return {
            "lhs_re": self.lhs.real,
            "lhs_im": self.lhs.imag,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "counts": dict(self.counts),
            "err_est": self.err_est,
        }


def character_from_config(q: int, obj) -> DirichletCharacter:
    """Resolve a character configuration entry against the level."""
    if isinstance(obj, DirichletCharacter):
        chi = obj
    elif obj is None or obj == "principal":
        chi = DirichletCharacter.principal(q)
    elif isinstance(obj, Mapping) and "kronecker" in obj:
        chi = DirichletCharacter.kronecker(int(obj["kronecker"]))
    elif isinstance(obj, Mapping) and "table" in obj:
        chi = DirichletCharacter.from_table(q, tuple(obj["table"]))
    else:
        raise ConfigError(f"unrecognized character configuration {obj!r}")
    if chi.q != q:
        raise ConfigError(f"character modulus {chi.q} does not match level {q}")
    return chi


def functional_from_config(obj) -> PointFunctional:
    """Resolve a functional configuration entry."""
    if isinstance(obj, PointFunctional):
        return obj
    if obj is None or obj == "dirac":
        return PointFunctional.dirac()
    if isinstance(obj, Sequence):
        return PointFunctional.from_json(obj)
    raise ConfigError(f"unrecognized functional configuration {obj!r}")


def _config_float(cfg: Mapping, key: str, default=None) -> float:
    if key in cfg:
        value = float(cfg[key])
    elif default is not None:
        value = float(default)
    else:
        raise ConfigError(f"missing required configuration key {key!r}")
    if not math.isfinite(value):
        raise ConfigError(f"configuration key {key!r} must be finite, got {value}")
    return value


def _config_level(cfg: Mapping) -> int:
    q = cfg.get("q", 1)
    if not isinstance(q, int) or isinstance(q, bool) or q < 1:
        raise ConfigError(f"level q={q!r} must be a positive integer")
    return q


def _checked_pairing(alpha, kernel, q, chi, spec, label):
    """Real majorant pairing with its positivity verification."""
    value, kernel_part, mass_part, enumerated, kept = _pairing_stats(
        alpha, alpha, kernel, q, chi, spec
    )
    scale = max(abs(kernel_part), abs(mass_part), 1e-300)
    pairing = value.real
    if pairing < -_POSITIVITY_TOL * scale:
        raise CertificationFailure(
            f"{label}: majorant pairing {pairing:.6e} is negative beyond "
            f"tolerance {_POSITIVITY_TOL * scale:.6e}"
        )
    return pairing, scale, enumerated, kept


def _experiment_theta(cfg: Mapping) -> float:
    theta = _config_float(cfg, "theta", SPECTRAL_GAP_DEFAULT)
    if not 0.0 <= theta <= 0.5:
        raise ConfigError(f"spectral-gap exponent theta={theta} outside [0, 1/2]")
    return theta


def theorem_experiment(
    config: Mapping,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> ExperimentReport:
    """Moment-inequality experiment for entry-bump weights.

    Builds the certified bump with scales (A, C, D), evaluates the left side
    |<alpha1 | Delta F | alpha2>| by enumeration plus main-term quadrature,
    and the right side sqrt(A D) X0^theta sqrt(P1 P2) where P_i pairs
    alpha_i against the skewed radial majorant at scale X_i^2 and ratio
    A/C or D/C. Each P_i is verified nonnegative within tolerance. The
    recorded ratio |lhs| / rhs is a regression quantity, not a theorem
    constant. Optional keys: order, parities, theta, conjugate_by (conjugate
    the whole configuration by a diagonal, an exact symmetry used as a
    consistency check), alpha1, alpha2, chi.
    """
    cfg = dict(config)
    q = _config_level(cfg)
    chi = character_from_config(q, cfg.get("chi", "principal"))
    A = _config_float(cfg, "A")
    C = _config_float(cfg, "C")
    D = _config_float(cfg, "D")
    for name, v in (("A", A), ("C", C), ("D", D)):
        if v <= 0:
            raise ConfigError(f"scale {name}={v} must be positive")
    x0 = _config_float(cfg, "X0")
    x1 = _config_float(cfg, "X1")
    x2 = _config_float(cfg, "X2")
    for name, v in (("X0", x0), ("X1", x1), ("X2", x2)):
        if v < 1.0:
            raise ConfigError(f"rebalancing scale {name}={v} must be at least 1")
    if x0 * x1 * x2 < A * D * (1.0 - 1e-12):
        raise ConfigError(
            f"rebalancing constraint X0 X1 X2 >= A D violated: "
            f"{x0 * x1 * x2} < {A * D}"
        )
    delta = _config_float(cfg, "delta", 1.0 / 64.0)
    order = cfg.get("order", 10)
    parities = tuple(cfg.get("parities", ("even", "even", "even")))
    theta = _experiment_theta(cfg)
    conjugate_by = _config_float(cfg, "conjugate_by", 1.0)
    if conjugate_by <= 0:
        raise ConfigError(f"conjugate_by={conjugate_by} must be positive")
    alpha1 = functional_from_config(cfg.get("alpha1"))
    alpha2 = functional_from_config(cfg.get("alpha2"))

    weight = KernelWeight(make_bump((A, C, D), delta, order, parities))
    r1 = A / C
    r2 = D / C
    if conjugate_by != 1.0:
        shift = GroupElement.a_diag(conjugate_by)
        weight = weight.skewed(conjugate_by, conjugate_by)
        alpha1 = alpha1.translated_right(shift)
        alpha2 = alpha2.translated_right(shift)
        r1 /= conjugate_by
        r2 /= conjugate_by

    lhs, kernel_part, mass_part, lhs_count, lhs_kept = _pairing_stats(
        alpha1, alpha2, weight, q, chi, spec
    )
    majorant1 = k_skewed(x1 * x1, r1, spec)
    majorant2 = k_skewed(x2 * x2, r2, spec)
    p1, scale1, count1, kept1 = _checked_pairing(
        alpha1, majorant1, q, chi, spec, "first rebalancing pairing"
    )
    p2, scale2, count2, kept2 = _checked_pairing(
        alpha2, majorant2, q, chi, spec, "second rebalancing pairing"
    )
    rhs = math.sqrt(A * D) * x0**theta * math.sqrt(max(p1, 0.0) * max(p2, 0.0))
    ratio = abs(lhs) / rhs if rhs > 0 else math.inf
    counts = {
        "lhs_enumerated": lhs_count,
        "lhs_kept": lhs_kept,
        "pair1_enumerated": count1,
        "pair1_kept": kept1,
        "pair2_enumerated": count2,
        "pair2_kept": kept2,
    }
    err_est = spec.rel_tol * max(
        abs(kernel_part) + abs(mass_part), scale1, scale2
    )
    echo = {
        "q": q, "A": A, "C": C, "D": D, "X0": x0, "X1": x1, "X2": x2,
        "delta": delta, "order": order, "theta": theta,
        "conjugate_by": conjugate_by,
    }
    return ExperimentReport(
        lhs=lhs,
        rhs=rhs,
        ratio=ratio,
        pairings=(p1, p2),
        positivity_scales=(scale1, scale2),
        counts=counts,
        err_est=err_est,
        config=echo,
    )


def kinvariant_experiment(
    config: Mapping,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> ExperimentReport:
    """Moment-inequality experiment for right-rotation-invariant weights.

    The weight is a chart bump at scales (X, Y); the left side folds a
    one-sided Hecke twist, sum over h of beta(h) times the pairing of the
    h-expanded alpha1 against the h-indexed second functional. The right
    side is sqrt(X / Y) sqrt(H) Z0^theta sqrt(P1) sqrt(sum |beta(h)|^2
    P_2h) with P1 pairing alpha1 against the majorant at scale Z1^2 and
    ratio X, and P_2h pairing each second functional at scale Z2^2 and
    ratio 1. Config keys: q, chi, X, Y, delta, H, beta (mapping h ->
    weight, default the unit mass at h = 1), Z0, Z1, Z2, alpha1, alpha2
    (single entry or mapping h -> entry), order, parities, theta.
    """
    cfg = dict(config)
    q = _config_level(cfg)
    chi = character_from_config(q, cfg.get("chi", "principal"))
    X = _config_float(cfg, "X")
    Y = _config_float(cfg, "Y")
    if X <= 0 or Y <= 0:
        raise ConfigError(f"chart scales X={X}, Y={Y} must be positive")
    z0 = _config_float(cfg, "Z0")
    z1 = _config_float(cfg, "Z1")
    z2 = _config_float(cfg, "Z2")
    for name, v in (("Z0", z0), ("Z1", z1), ("Z2", z2)):
        if v < 1.0:
            raise ConfigError(f"rebalancing scale {name}={v} must be at least 1")
    if z0 * z1 * z2 < (X / Y + 1.0) * (1.0 - 1e-12):
        raise ConfigError(
            f"rebalancing constraint Z0 Z1 Z2 >= X/Y + 1 violated: "
            f"{z0 * z1 * z2} < {X / Y + 1.0}"
        )
    delta = _config_float(cfg, "delta", 1.0 / 64.0)
    order = cfg.get("order", 10)
    parities = tuple(cfg.get("parities", ("even", "plus")))
    theta = _experiment_theta(cfg)

    beta_raw = cfg.get("beta", {1: 1.0})
    if not isinstance(beta_raw, Mapping) or not beta_raw:
        raise ConfigError("beta must be a nonempty mapping of Hecke indices")
    beta = {}
    for h, value in beta_raw.items():
        index = _validate_hecke_index(int(h) if isinstance(h, str) else h, q)
        beta[index] = complex(value)
    bound = cfg.get("H", max(beta))
    if not isinstance(bound, int) or isinstance(bound, bool) or bound < 1:
        raise ConfigError(f"Hecke support bound H={bound!r} must be a positive integer")
    if max(beta) > bound:
        raise ConfigError(f"beta supported beyond the stated bound H={bound}")

    alpha1 = functional_from_config(cfg.get("alpha1"))
    alpha2_raw = cfg.get("alpha2")
    if isinstance(alpha2_raw, Mapping):
        alpha2 = {
            _validate_hecke_index(int(h) if isinstance(h, str) else h, q):
                functional_from_config(entry)
            for h, entry in alpha2_raw.items()
        }
        missing = sorted(set(beta) - set(alpha2))
        if missing:
            raise ConfigError(f"second functionals missing for Hecke indices {missing}")
    else:
        shared = functional_from_config(alpha2_raw)
        alpha2 = {h: shared for h in beta}

    weight = IwasawaWeight(make_bump((X, Y), delta, order, parities))
    lhs = 0j
    lhs_count = 0
    lhs_kept = 0
    kernel_scale = 0.0
    for h in sorted(beta):
        expanded = _hecke_expand(alpha1, {h: 1.0}, q, chi, conjugate=True)
        term, kernel_part, mass_part, count, kept = _pairing_stats(
            expanded, alpha2[h], weight, q, chi, spec
        )
        lhs += beta[h] * term
        lhs_count += count
        lhs_kept += kept
        kernel_scale = max(kernel_scale, abs(kernel_part) + abs(mass_part))

    majorant1 = k_skewed(z1 * z1, X, spec)
    majorant2 = k_skewed(z2 * z2, 1.0, spec)
    p1, scale1, count1, kept1 = _checked_pairing(
        alpha1, majorant1, q, chi, spec, "first rebalancing pairing"
    )
    second_sum = 0.0
    scale2 = 0.0
    count2 = 0
    kept2 = 0
    for h in sorted(beta):
        p2h, s2h, c2h, k2h = _checked_pairing(
            alpha2[h], majorant2, q, chi, spec, f"second rebalancing pairing at h={h}"
        )
        second_sum += abs(beta[h]) ** 2 * max(p2h, 0.0)
        scale2 = max(scale2, s2h)
        count2 += c2h
        kept2 += k2h
    rhs = (
        math.sqrt(X / Y)
        * math.sqrt(bound)
        * z0**theta
        * math.sqrt(max(p1, 0.0))
        * math.sqrt(second_sum)
    )
    ratio = abs(lhs) / rhs if rhs > 0 else math.inf
    counts = {
        "lhs_enumerated": lhs_count,
        "lhs_kept": lhs_kept,
        "pair1_enumerated": count1,
        "pair1_kept": kept1,
        "pair2_enumerated": count2,
        "pair2_kept": kept2,
    }
    err_est = spec.rel_tol * max(kernel_scale, scale1, scale2)
    echo = {
        "q": q, "X": X, "Y": Y, "Z0": z0, "Z1": z1, "Z2": z2,
        "delta": delta, "order": order, "theta": theta, "H": bound,
        "beta": {h: [beta[h].real, beta[h].imag] for h in sorted(beta)},
    }
    return ExperimentReport(
        lhs=lhs,
        rhs=rhs,
        ratio=ratio,
        pairings=(p1, second_sum),
        positivity_scales=(scale1, scale2),
        counts=counts,
        err_est=err_est,
        config=echo,
    )
