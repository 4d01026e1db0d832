"""Eigenfunction harmonics and spectral transforms.

The building blocks here are the basic Casimir eigenfunctions
``y^(1/2+nu) e^(i ell theta)``, their rotation-type projections, the
two-type radial functions obtained by a single circle integral, and the
unitary normalization connecting those to spectral transform coefficients
``<F, P>`` over the group.

Field fast paths
----------------
Several operations accept any :class:`~sl2kernels.lie.SmoothField` but run
much faster when the field advertises structure:

* ``eval_radial`` (u-array -> values): bi-rotation-invariant field.
* ``radial_profile`` / ``angular_profile`` / ``angular_fourier``: a field of
  the separated form ``psi(u) * h(phi + vartheta)``; ``angular_fourier(ell)``
  returns the Fourier coefficient of ``h``.

Use :func:`radial_field` and :func:`angular_class_field` to construct tagged
fields. Untagged fields fall back to nested rotation quadrature.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NonConvergence, ParityError
from .group import GroupElement, a_u, cartan_from_entries, to_iwasawa, u_entries, u_of
from .lie import SmoothField, as_field
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    RadialSupport,
    _gl_nodes,
    integrate_1d,
    integrate_box,
    integrate_periodic,
)

__all__ = [
    "SpectralParameter",
    "TypePair",
    "phi_basic",
    "phi_basic_field",
    "radial_field",
    "angular_class_field",
    "project_types",
    "phi_two_type",
    "phi_two_type_batch",
    "g_factor_ratio",
    "p_normalized",
    "p_normalized_batch",
    "p_norm_squared",
    "spectral_transform",
    "EigenCheckReport",
    "eigen_operator_check",
    "principal_decay_envelope",
    "transform_rows",
]


@dataclass(frozen=True)
class SpectralParameter:
    """Spectral parameter with its series kind.

    ``principal`` carries nu on the imaginary axis, ``exceptional`` a real
    nu in (0, 1/2), and ``discrete`` nu = (weight - 1)/2 for an integer
    weight >= 2.
    """

    kind: str
    nu: complex
    weight: int | None = None

    def __post_init__(self) -> None:
        nu = complex(self.nu)
        if self.kind == "principal":
            if abs(nu.real) > 1e-12 * (1.0 + abs(nu.imag)):
                raise DomainError(f"principal parameter needs Re nu = 0, got {nu}")
            if self.weight is not None:
                raise DomainError("principal parameter carries no weight")
        elif self.kind == "exceptional":
            if nu.imag != 0.0 or not 0.0 < nu.real < 0.5:
                raise DomainError(f"exceptional parameter needs nu in (0, 1/2), got {nu}")
            if self.weight is not None:
                raise DomainError("exceptional parameter carries no weight")
        elif self.kind == "discrete":
            k = self.weight
            if k is None or int(k) != k or k < 2:
                raise DomainError(f"discrete parameter needs integer weight >= 2, got {k}")
            if nu != complex((k - 1) / 2.0):
                raise DomainError(f"discrete parameter needs nu = (weight-1)/2, got {nu}")
        else:
            raise DomainError(f"unknown spectral kind {self.kind!r}")

    @staticmethod
    def principal(t: float) -> "SpectralParameter":
        return SpectralParameter("principal", complex(0.0, t))

    @staticmethod
    def exceptional(x: float) -> "SpectralParameter":
        return SpectralParameter("exceptional", complex(x))

    @staticmethod
    def discrete(k: int) -> "SpectralParameter":
        return SpectralParameter("discrete", complex((k - 1) / 2.0), weight=k)


@dataclass(frozen=True)
class TypePair:
    """A pair of rotation types sharing parity."""

    l1: int
    l2: int

    def __post_init__(self) -> None:
        if (self.l1 - self.l2) % 2:
            raise ParityError(f"type pair ({self.l1}, {self.l2}) mixes parities")


def phi_basic(g: GroupElement, nu: complex, ell: int) -> complex:
    """The basic eigenfunction y^(1/2+nu) e^(i ell theta)."""
    c = to_iwasawa(g)
    return (c.y ** complex(0.5 + nu)) * cmath.exp(1j * ell * c.theta)


def phi_basic_field(nu: complex, ell: int) -> SmoothField:
    """:func:`phi_basic` as a field with analytic chart partials."""

    def value(x: float, y: float, theta: float) -> complex:
        return (y ** complex(0.5 + nu)) * cmath.exp(1j * ell * theta)

    return SmoothField(
        lambda g: phi_basic(g, nu, ell),
        iwasawa_partials={
            "x": lambda x, y, t: 0j,
            "y": lambda x, y, t: (0.5 + nu) / y * value(x, y, t),
            "theta": lambda x, y, t: 1j * ell * value(x, y, t),
        },
    )


def radial_field(profile: Callable[[np.ndarray], np.ndarray]) -> SmoothField:
    """Bi-rotation-invariant field u -> profile(u); profile must accept arrays."""

    def evaluator(g: GroupElement) -> complex:
        return complex(np.asarray(profile(np.array([u_of(g)])), dtype=complex)[0])

    field = SmoothField(evaluator)
    field.eval_radial = lambda u: np.asarray(profile(np.asarray(u, dtype=float)), dtype=complex)
    return field


def angular_class_field(
    profile: Callable[[np.ndarray], np.ndarray],
    angular: Callable[[np.ndarray], np.ndarray],
    angular_fourier: Callable[[int], complex],
) -> SmoothField:
    """Field of the separated form profile(u) * angular(phi + vartheta).

    The angle sum is read off as arg(alpha) of the rotation-sum entry, which
    is well defined on all of the group. ``angular_fourier(ell)`` must return
    the normalized Fourier coefficient of ``angular``.
    """

    def from_entries(a, b, c, d):
        u, ang = cartan_from_entries(a, b, c, d)
        return np.asarray(profile(u), dtype=complex) * np.asarray(angular(ang), dtype=complex)

    def evaluator(g: GroupElement) -> complex:
        out = from_entries(*map(np.asarray, g.entries()))
        return complex(np.asarray(out, dtype=complex).ravel()[0])

    field = SmoothField(evaluator)
    field.radial_profile = lambda u: np.asarray(profile(np.asarray(u, dtype=float)), dtype=complex)
    field.angular_profile = angular
    field.angular_fourier = angular_fourier
    field.eval_entries = from_entries
    return field


# -- two-type radial functions ------------------------------------------------


@lru_cache(maxsize=64)
def _graded_edges(levels: int) -> np.ndarray:
    offs = math.pi * 2.0 ** (-np.arange(levels + 1, dtype=float))
    return np.concatenate([math.pi - offs, (math.pi + offs)[::-1]])


def _edge_levels(u_max: float) -> int:
    return max(6, math.ceil(math.log2(8.0 * (1.0 + u_max))) + 2)


def _two_type_values(u: np.ndarray, nu: complex, l1: int, l2: int, order: int):
    """Fixed-order evaluation of the circle integral on the graded mesh.

    Returns the values together with the absolute node sums, whose roundoff
    bounds how small an error the mesh can certify.
    """
    edges = _graded_edges(_edge_levels(float(u.max(initial=0.0))))
    nodes, weights = _gl_nodes(order)
    widths = np.diff(edges)
    phis = (edges[:-1, None] + widths[:, None] * nodes[None, :]).ravel()
    wts = (widths[:, None] * weights[None, :]).ravel() / (2.0 * math.pi)

    w1 = complex(-0.5 - nu - l2 / 2.0)
    w2 = complex(-0.5 - nu + l2 / 2.0)
    eip = np.exp(1j * phis)
    weighted_phase = np.exp(1j * ((l2 - l1) // 2) * phis) * wts

    out = np.empty(u.shape, dtype=complex)
    abs_sum = np.empty(u.shape, dtype=float)
    for start in range(0, u.size, 256):
        chunk = u[start : start + 256]
        ch = np.sqrt(1.0 + chunk)[None, :]
        sh = np.sqrt(chunk)[None, :]
        base1 = ch + sh * eip[:, None]
        base2 = ch + sh * np.conj(eip)[:, None]
        vals = np.exp(w1 * np.log(base1) + w2 * np.log(base2))
        out[start : start + 256] = vals.T @ weighted_phase
        abs_sum[start : start + 256] = np.abs(vals).T @ np.abs(weighted_phase)
    return out, abs_sum


def _binom_general(w: float, i: int) -> float:
    out = 1.0
    for r in range(i):
        out *= (w - r) / (r + 1)
    return out


def _two_type_discrete(u: np.ndarray, k: int, l1: int, l2: int):
    """Exact finite-sum evaluation when the weight exponent terminates.

    For nu = (k-1)/2 with l2 >= k of matching parity, one factor of the
    circle integrand is a polynomial in the inverse phase variable, so the
    integral is a finite binomial sum: stable at every u, unlike the
    quadrature route whose peak cancellation drowns the tiny true value in
    roundoff once u is large.
    """
    w1 = -(k + l2) / 2.0
    m = (l2 - k) // 2
    h = (l2 - l1) // 2
    c2 = 1.0 + u
    value = np.zeros(u.shape, dtype=complex)
    mag = np.zeros(u.shape, dtype=float)
    for j in range(max(0, h), m + 1):
        i = j - h
        coeff = _binom_general(float(m), j) * _binom_general(w1, i)
        term = coeff * u ** (j - h / 2.0) * c2 ** ((m + w1 - j - i) / 2.0)
        value += term
        mag += np.abs(term)
    err = 8.0 * np.finfo(float).eps * (mag + np.abs(value))
    return value, err


def phi_two_type_batch(
    u,
    nu: complex,
    l1: int,
    l2: int,
    spec: QuadratureSpec = DEFAULT_SPEC,
    full_output: bool = False,
):
    """Two-type radial function on an array of u values.

    Discrete-compatible parameters take an exact finite-sum route. For the
    rest, the circle integrand is peaked opposite the rotation origin with
    width shrinking like 1/u, so the mesh is graded dyadically toward the
    peak and each panel is integrated at two Gauss orders; the order pair
    escalates once before :class:`NonConvergence`.
    """
    if (l1 - l2) % 2:
        raise ParityError(f"two-type evaluation needs matching parity, got ({l1}, {l2})")
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        u = u[None]
    if np.any(u < 0) or not np.all(np.isfinite(u)):
        raise DomainError("two-type evaluation needs finite u >= 0")

    nu = complex(nu)
    two_nu = 2.0 * nu.real
    if nu.imag == 0.0 and two_nu >= 1.0 and two_nu == round(two_nu):
        k = int(round(two_nu)) + 1
        if (l2 - k) % 2 == 0:
            value = err = None
            if l2 >= k:
                value, err = _two_type_discrete(u, k, l1, l2)
            elif l2 <= -k:
                value, err = _two_type_discrete(u, k, -l1, -l2)
            if value is not None:
                return (value, err) if full_output else value

    lo, _ = _two_type_values(u, nu, l1, l2, 16)
    value, abs_sum = _two_type_values(u, nu, l1, l2, 24)
    err = np.abs(value - lo)
    tol = np.maximum(spec.rel_tol * np.abs(value), spec.abs_tol)
    if not np.all(err <= tol):
        first_err = err
        lo, _ = _two_type_values(u, nu, l1, l2, 32)
        value, abs_sum = _two_type_values(u, nu, l1, l2, 48)
        err = np.abs(value - lo)
        tol = np.maximum(spec.rel_tol * np.abs(value), spec.abs_tol)
        # When doubling the order stops helping and the residual sits at the
        # roundoff scale of the absolute node sum, float64 has bottomed out;
        # the measured difference is then an honest error estimate and the
        # value is accepted with it.
        noise = (err >= 0.25 * first_err) & (
            err <= 1e5 * np.finfo(float).eps * abs_sum
        )
        if not np.all((err <= tol) | noise):
            raise NonConvergence(
                f"phi_two_type: order escalation exhausted (err~{float(err.max()):.3e})",
                best=value,
                error=float(err.max()),
            )

    on_axis = u == 0.0
    if np.any(on_axis):
        value = value.copy()
        value[on_axis] = 1.0 if l1 == l2 else 0.0
        err = np.where(on_axis, 0.0, err)
    return (value, err) if full_output else value


def phi_two_type(
    u: float, nu: complex, l1: int, l2: int, spec: QuadratureSpec = DEFAULT_SPEC
) -> complex:
    """Two-type radial function at a single u >= 0."""
    return complex(phi_two_type_batch(np.array([float(u)]), nu, l1, l2, spec)[0])


def g_factor_ratio(param: SpectralParameter, l1: int, l2: int) -> float:
    """Modulus of the normalization ratio carrying type (l1 -> l2).

    Unity on the principal series; a square root of a Gamma-factor ratio on
    the exceptional and discrete series, evaluated through ``math.lgamma``.
    """
    if (l1 - l2) % 2:
        raise ParityError(f"normalization ratio needs matching parity, got ({l1}, {l2})")
    if param.kind == "principal":
        return 1.0
    if param.kind == "discrete":
        k = param.weight
        for ell in (l1, l2):
            if abs(ell) < k or (abs(ell) - k) % 2:
                raise DomainError(
                    f"type {ell} is incompatible with discrete weight {k}"
                )
    nu = param.nu.real
    a1, a2 = 0.5 * (1 + abs(l1)), 0.5 * (1 + abs(l2))
    return math.exp(
        0.5
        * (
            math.lgamma(a2 + nu)
            + math.lgamma(a1 - nu)
            - math.lgamma(a1 + nu)
            - math.lgamma(a2 - nu)
        )
    )


def p_normalized_batch(
    u,
    param: SpectralParameter,
    l1: int,
    l2: int,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> np.ndarray:
    """Unitarily normalized two-type function on an array of u values."""
    values = phi_two_type_batch(u, param.nu, l1, l2, spec)
    if l1 == l2:
        return values
    return g_factor_ratio(param, l1, l2) * values


def p_normalized(
    u: float,
    param: SpectralParameter,
    l1: int,
    l2: int,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> complex:
    """Unitarily normalized two-type function at a single u."""
    return complex(p_normalized_batch(np.array([float(u)]), param, l1, l2, spec)[0])


def p_norm_squared(
    param: SpectralParameter,
    l1: int,
    l2: int,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """The squared radial norm of the normalized two-type function.

    The substitution t = u/(1+u) compactifies the half-line; for the discrete
    series the transformed integrand is rational in t, so the adaptive panels
    converge quickly with no truncation tail to estimate.
    """

    def integrand(t):
        t = np.asarray(t, dtype=float)
        uu = t / (1.0 - t)
        vals = p_normalized_batch(uu, param, l1, l2, spec)
        return (vals.real**2 + vals.imag**2) / (1.0 - t) ** 2

    return complex(integrate_1d(integrand, 0.0, 1.0, spec)).real


# -- type projections ----------------------------------------------------------


def _zero_projection(l1: int, l2: int) -> SmoothField:
    field = SmoothField(lambda g: 0j)
    field.left_type = l1
    field.right_type = l2
    field.eval_radial_line = lambda u: np.zeros(np.asarray(u, dtype=float).shape, dtype=complex)
    field.eval_entries = lambda a, b, c, d: np.zeros(np.asarray(a).shape, dtype=complex)
    return field


def _pure_type_field(coeff: complex, profile, ell: int) -> SmoothField:
    def from_entries(a, b, c, d):
        u, ang = cartan_from_entries(a, b, c, d)
        return coeff * np.asarray(profile(u), dtype=complex) * np.exp(1j * ell * ang)

    def evaluator(g: GroupElement) -> complex:
        return complex(np.asarray(from_entries(*map(np.asarray, g.entries()))).ravel()[0])

    field = SmoothField(evaluator)
    field.left_type = ell
    field.right_type = ell
    field.eval_entries = from_entries
    field.eval_radial_line = lambda u: coeff * np.asarray(
        profile(np.asarray(u, dtype=float)), dtype=complex
    )
    return field


def _rotated_entries(g: GroupElement, t1, t2):
    """Entries of k[t1] g k[t2] for angle arrays t1, t2 (broadcastable)."""
    a, b, c, d = g.entries()
    c1, s1 = np.cos(t1), np.sin(t1)
    c2, s2 = np.cos(t2), np.sin(t2)
    p1 = a * c1 + c * s1
    q1 = b * c1 + d * s1
    p2 = -a * s1 + c * c1
    q2 = -b * s1 + d * c1
    return (p1 * c2 - q1 * s2, p1 * s2 + q1 * c2, p2 * c2 - q2 * s2, p2 * s2 + q2 * c2)


def project_types(
    F,
    l1: int,
    l2: int,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> SmoothField:
    """Project a field onto left rotation type l1 and right type l2.

    Bi-invariant and separated angular-class fields short-circuit to closed
    forms; anything else goes through nested periodic quadrature in the two
    rotation angles (normalized rotation averages).
    """
    from .group import matrix_evaluator

    src = F
    field = as_field(F)

    radial = getattr(src, "eval_radial", None)
    if radial is not None:
        if (l1, l2) == (0, 0):
            out = SmoothField(field.evaluator)
            out.left_type = 0
            out.right_type = 0
            out.eval_radial = radial
            out.eval_radial_line = lambda u: np.asarray(radial(u), dtype=complex)
            out.eval_entries = lambda a, b, c, d: np.asarray(
                radial(u_entries(a, b, c, d)), dtype=complex
            )
            return out
        return _zero_projection(l1, l2)

    profile = getattr(src, "radial_profile", None)
    fourier = getattr(src, "angular_fourier", None)
    if profile is not None and fourier is not None:
        if l1 != l2:
            return _zero_projection(l1, l2)
        return _pure_type_field(complex(fourier(l1)), profile, l1)

    entries_eval = matrix_evaluator(src)

    def evaluator(g: GroupElement) -> complex:
        def over_left(t1s):
            t1s = np.atleast_1d(np.asarray(t1s, dtype=float))
            out = np.empty(t1s.shape, dtype=complex)
            for i, t1 in enumerate(t1s):
                def over_right(t2s):
                    vals = entries_eval(*_rotated_entries(g, t1, np.asarray(t2s)))
                    return vals * np.exp(-1j * l2 * np.asarray(t2s))

                out[i] = integrate_periodic(over_right, spec=spec) / (2.0 * math.pi)
            return out * np.exp(-1j * l1 * t1s)

        return complex(integrate_periodic(over_left, spec=spec)) / (2.0 * math.pi)

    out = SmoothField(evaluator)
    out.left_type = l1
    out.right_type = l2
    out.eval_radial_line = lambda u: np.array(
        [evaluator(a_u(float(v))) for v in np.atleast_1d(np.asarray(u, dtype=float))],
        dtype=complex,
    )
    return out


def _radial_line(proj: SmoothField):
    line = getattr(proj, "eval_radial_line", None)
    if line is not None:
        return line
    radial = getattr(proj, "eval_radial", None)
    if radial is not None:
        return lambda u: np.asarray(radial(u), dtype=complex)
    return lambda u: np.array(
        [proj(a_u(float(v))) for v in np.atleast_1d(np.asarray(u, dtype=float))], dtype=complex
    )


# -- spectral transforms -------------------------------------------------------


def spectral_transform(
    F,
    param: SpectralParameter,
    l1: int,
    l2: int,
    hint: RadialSupport,
    spec: QuadratureSpec = DEFAULT_SPEC,
    full_output: bool = False,
):
    """The transform coefficient <F, P> over the group.

    Projection absorbs the rotation factors, leaving twice the radial line
    integral of the projected field against the conjugated normalized
    two-type function up to the support radius.
    """
    proj = project_types(F, l1, l2, spec)
    line = _radial_line(proj)

    def integrand(u):
        u = np.asarray(u, dtype=float)
        return np.asarray(line(u), dtype=complex) * np.conj(
            p_normalized_batch(u, param, l1, l2, spec)
        )

    value, err = integrate_1d(integrand, 0.0, hint.u_max, spec, full_output=True)
    return (2.0 * value, 2.0 * err) if full_output else 2.0 * value


def principal_decay_envelope(
    big_u: float, delta: float, nu_abs: float, l1: int, l2: int, order: int
) -> float:
    """Principal-series decay envelope for smooth compactly supported fields."""
    damp = 1.0 + (delta * nu_abs) ** 2 + (delta * l1) ** 2 + (delta * l2) ** 2
    return math.sqrt(big_u) * math.log(1.0 + big_u) / damp**order


def transform_rows(
    F,
    params: Sequence[SpectralParameter],
    pairs: Sequence[TypePair],
    hint: RadialSupport,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> list[dict]:
    """Transform table rows for CSV emission."""
    rows = []
    for param in params:
        for pair in pairs:
            value, err = spectral_transform(
                F, param, pair.l1, pair.l2, hint, spec, full_output=True
            )
            rows.append(
                {
                    "nu_kind": param.kind,
                    "nu": _format_nu(param.nu),
                    "l1": pair.l1,
                    "l2": pair.l2,
                    "re": value.real,
                    "im": value.imag,
                    "err_est": err,
                }
            )
    return rows


def _format_nu(nu: complex) -> str:
    if nu.imag == 0.0:
        return f"{nu.real:.12g}"
    if nu.real == 0.0:
        return f"{nu.imag:.12g}j"
    return f"{nu.real:.12g}{nu.imag:+.12g}j"


# -- eigen-identity check ------------------------------------------------------


@dataclass(frozen=True)
class EigenCheckReport:
    """Two sides of the point-pair eigen identity and their mismatch."""

    operator_side: complex
    spectral_side: complex
    residual: float
    scale: float


def eigen_operator_check(
    F,
    ell: int,
    nu: complex,
    tau: GroupElement,
    hint: RadialSupport,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> EigenCheckReport:
    """Residual of the invariant-operator eigen identity at a point.

    Compares the group integral of the type-projected kernel shifted by tau
    against the transform coefficient times the conjugated basic
    eigenfunction at tau. The rotation integral on the operator side is
    carried out exactly by the projection, leaving a horocycle-chart double
    integral over the hyperbolic ball where the shifted kernel lives.
    """
    nu = complex(nu)
    if abs(nu.real) > 1e-12 * (1.0 + abs(nu.imag)):
        raise DomainError(f"eigen check needs nu on the imaginary axis, got {nu}")

    proj = project_types(F, ell, ell, spec)
    line = _radial_line(proj)

    def inner_integrand(u):
        u = np.asarray(u, dtype=float)
        return np.asarray(line(u), dtype=complex) * np.conj(
            phi_two_type_batch(u, nu, ell, ell, spec)
        )

    inner = 2.0 * complex(integrate_1d(inner_integrand, 0.0, hint.u_max, spec))
    spectral_side = inner * np.conj(phi_basic(tau, nu, ell))

    # The shifted kernel is supported on a hyperbolic ball about the point of
    # tau; its horocycle hull is the Euclidean disc with center raised by
    # cosh(d) and radius y sinh(d), where cosh(d) = 2 u_max + 1.
    base = to_iwasawa(tau)
    ch = 2.0 * hint.u_max + 1.0
    sh = 2.0 * math.sqrt(hint.u_max * (hint.u_max + 1.0))
    pad = 1.0 + 1e-3
    x_lo = base.x - base.y * sh * pad
    x_hi = base.x + base.y * sh * pad
    y_lo = base.y * (ch - sh) / pad
    y_hi = base.y * (ch + sh) * pad

    ti = tau.inv()
    entries_eval = getattr(proj, "eval_entries", None)

    def box_integrand(pts: np.ndarray) -> np.ndarray:
        x = pts[:, 0]
        y = pts[:, 1]
        ry = np.sqrt(y)
        a = ti.a * ry
        b = (ti.a * x + ti.b) / ry
        c = ti.c * ry
        d = (ti.c * x + ti.d) / ry
        if entries_eval is not None:
            vals = np.asarray(entries_eval(a, b, c, d), dtype=complex)
        else:
            vals = np.array(
                [proj(GroupElement(*row)) for row in zip(a, b, c, d)], dtype=complex
            )
        return vals * y ** complex(np.conj(nu) - 1.5)

    # The rotation angle of the chart integrates out exactly against the
    # eigenfunction's phase; what remains carries the chart density
    # 1/(2 pi y^2) under the radial Haar normalization.
    operator_side = complex(
        integrate_box(box_integrand, [x_lo, y_lo], [x_hi, y_hi], spec, base_panels=(2, 2))
    ) / (2.0 * math.pi)

    residual = abs(operator_side - spectral_side)
    scale = max(abs(operator_side), abs(spectral_side))
    return EigenCheckReport(operator_side, spectral_side, residual, scale)
