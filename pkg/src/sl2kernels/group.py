"""Unimodular 2x2 matrices and their three coordinate charts.

Conventions, fixed once for the whole library:

* ``n[x] = (1, x; 0, 1)``, ``a[y] = (sqrt(y), 0; 0, 1/sqrt(y))`` for y > 0,
  ``k[t] = (cos t, sin t; -sin t, cos t)``.
* Horocycle chart (Iwasawa): every g factors uniquely as
  ``n[x] a[y] k[theta]`` with theta in [0, 2*pi).
* Polar chart (Cartan): ``g = k[phi] a[exp(-rho)] k[vartheta]`` with
  rho >= 0, phi in [0, pi). The radial variable stored is
  ``u = sinh^2(rho/2)``, so ``cosh(rho) = 2u + 1``.
* Big-cell chart (Bruhat): for c != 0, ``g = (+-I) n[r1] w a[c^2] n[r2]``
  with ``r1 = a/c``, ``r2 = d/c`` and ``w = k[pi/2]``; the product
  ``n[r1] w a[c^2] n[r2]`` equals g itself when c < 0 and -g when c > 0.
* Point-pair invariant: ``u(g) = (a^2+b^2+c^2+d^2-2)/4``, which is the
  hyperbolic displacement between g*i and i; its skewed variant divides b
  by R and multiplies c by R.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCartanWarning, DomainError, SmallCell

__all__ = [
    "GroupElement",
    "IwasawaCoord",
    "CartanCoord",
    "BruhatCoord",
    "to_iwasawa",
    "from_iwasawa",
    "to_cartan",
    "from_cartan",
    "to_bruhat",
    "from_bruhat",
    "u_of",
    "u_skewed",
    "conjugate_diag",
    "theta_from_cartan",
]

_DET_TOL = 1e-10
_DEGENERATE_U = 1e-14
_SMALL_CELL = 1e-12
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GroupElement:
    """A real 2x2 matrix of determinant one.

    Construction renormalizes by sqrt(det) when the determinant is positive
    but has drifted from 1 (long products accumulate roundoff); a
    non-positive determinant is rejected.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        a, b, c, d = (float(self.a), float(self.b), float(self.c), float(self.d))
        if not all(math.isfinite(v) for v in (a, b, c, d)):
            raise DomainError("matrix entries must be finite")
        det = a * d - b * c
        if abs(det - 1.0) > _DET_TOL:
            if det <= 0.0:
                raise DomainError(f"determinant {det} is not positive")
            s = math.sqrt(det)
            a, b, c, d = a / s, b / s, c / s, d / s
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    # --- constructors ---------------------------------------------------
    @staticmethod
    def identity() -> "GroupElement":
        return GroupElement(1.0, 0.0, 0.0, 1.0)

    @staticmethod
    def n(x: float) -> "GroupElement":
        return GroupElement(1.0, float(x), 0.0, 1.0)

    @staticmethod
    def a_diag(y: float) -> "GroupElement":
        if y <= 0:
            raise DomainError("a[y] requires y > 0")
        r = math.sqrt(y)
        return GroupElement(r, 0.0, 0.0, 1.0 / r)

    @staticmethod
    def k(theta: float) -> "GroupElement":
        ct, st = math.cos(theta), math.sin(theta)
        return GroupElement(ct, st, -st, ct)

    @staticmethod
    def w() -> "GroupElement":
        return GroupElement(0.0, 1.0, -1.0, 0.0)

    # --- algebra ----------------------------------------------------------
    def mul(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return self.mul(other)

    def inv(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def neg(self) -> "GroupElement":
        return GroupElement(-self.a, -self.b, -self.c, -self.d)

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    def entries(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}

    @staticmethod
    def from_json(obj: dict) -> "GroupElement":
        return GroupElement(obj["a"], obj["b"], obj["c"], obj["d"])

    def close_to(self, other: "GroupElement", tol: float = 1e-10) -> bool:
        return (
            abs(self.a - other.a) <= tol
            and abs(self.b - other.b) <= tol
            and abs(self.c - other.c) <= tol
            and abs(self.d - other.d) <= tol
        )


@dataclass(frozen=True)
class IwasawaCoord:
    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        if self.y <= 0:
            raise DomainError("horocycle height y must be positive")
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)

    def to_json(self) -> dict:
        return {"x": self.x, "y": self.y, "theta": self.theta}


@dataclass(frozen=True)
class CartanCoord:
    phi: float
    u: float
    vartheta: float

    def __post_init__(self) -> None:
        if self.u < 0:
            raise DomainError("radial coordinate u must be nonnegative")
        if not 0.0 <= self.phi < math.pi:
            raise DomainError("phi must lie in [0, pi)")
        object.__setattr__(self, "vartheta", float(self.vartheta) % TWO_PI)

    def to_json(self) -> dict:
        return {"phi": self.phi, "u": self.u, "vartheta": self.vartheta}


@dataclass(frozen=True)
class BruhatCoord:
    r1: float
    c: float
    r2: float

    def __post_init__(self) -> None:
        if self.c == 0:
            raise DomainError("big-cell coordinate c must be nonzero")

    def to_json(self) -> dict:
        return {"r1": self.r1, "c": self.c, "r2": self.r2}


# --- horocycle chart ------------------------------------------------------


def to_iwasawa(g: GroupElement) -> IwasawaCoord:
    """Extract (x, y, theta) with g = n[x] a[y] k[theta].

    The rotation angle comes from the two-argument arctangent of (-c, d),
    which settles the quadrant without a prose sign rule.
    """
    a, b, c, d = g.entries()
    s = c * c + d * d
    return IwasawaCoord((a * c + b * d) / s, 1.0 / s, math.atan2(-c, d) % TWO_PI)


def from_iwasawa(coord: IwasawaCoord) -> GroupElement:
    a, b, c, d = iwasawa_entries(
        np.array([coord.x]), np.array([coord.y]), np.array([coord.theta])
    )
    return GroupElement(a[0], b[0], c[0], d[0])


def iwasawa_entries(x: np.ndarray, y: np.ndarray, theta: np.ndarray):
    """Vectorized matrix entries of n[x] a[y] k[theta]."""
    r = np.sqrt(y)
    ct, st = np.cos(theta), np.sin(theta)
    return (
        r * ct - (x / r) * st,
        r * st + (x / r) * ct,
        -st / r,
        ct / r,
    )


# --- point-pair invariant ---------------------------------------------------


def u_of(g: GroupElement) -> float:
    a, b, c, d = g.entries()
    return max(0.25 * (a * a + b * b + c * c + d * d - 2.0), 0.0)


def u_skewed(g: GroupElement, R: float) -> float:
    if R <= 0:
        raise DomainError("skew parameter R must be positive")
    a, b, c, d = g.entries()
    return max(0.25 * (a * a + (b / R) ** 2 + (c * R) ** 2 + d * d - 2.0), 0.0)


def u_entries(a, b, c, d):
    """Vectorized u over entry arrays."""
    return np.maximum(0.25 * (a * a + b * b + c * c + d * d - 2.0), 0.0)


def conjugate_diag(g: GroupElement, R: float) -> GroupElement:
    """a[R]^(-1) g a[R]; realizes u_skewed(g, R) = u_of(result)."""
    if R <= 0:
        raise DomainError("skew parameter R must be positive")
    return GroupElement(g.a, g.b / R, g.c * R, g.d)


# --- polar chart ------------------------------------------------------------


def y_from_u(u):
    """Height of the polar radial representative: a_u = a[y_from_u(u)].

    exp(-rho) with cosh(rho) = 2u + 1, i.e. 1/(sqrt(1+u) + sqrt(u))^2.
    """
    root = np.sqrt(1.0 + np.asarray(u, dtype=float)) + np.sqrt(np.asarray(u, dtype=float))
    return 1.0 / (root * root)


def a_u(u: float) -> GroupElement:
    """The radial representative a[exp(-rho)] at displacement u."""
    return GroupElement.a_diag(float(y_from_u(u)))


def to_cartan(g: GroupElement) -> CartanCoord:
    """Extract (phi, u, vartheta) with g = k[phi] a[exp(-rho)] k[vartheta].

    Works through alpha = ((a+d) + i(b-c))/2 and beta = ((a-d) - i(b+c))/2,
    which satisfy |alpha|^2 - |beta|^2 = 1, arg(alpha) = phi + vartheta and
    u = |beta|^2 exactly. Rotations (u below 1e-14) collapse to the
    canonical representative (0, 0, phi + vartheta) with a non-fatal
    warning.
    """
    a, b, c, d = g.entries()
    alpha = complex(0.5 * (a + d), 0.5 * (b - c))
    beta = complex(0.5 * (a - d), -0.5 * (b + c))
    u = beta.real * beta.real + beta.imag * beta.imag
    s = math.atan2(alpha.imag, alpha.real)
    if u < _DEGENERATE_U:
        warnings.warn(
            "polar chart is degenerate on rotations; returning (0, 0, total angle)",
            DegenerateCartanWarning,
            stacklevel=2,
        )
        return CartanCoord(0.0, max(u, 0.0), s % TWO_PI)
    t = math.atan2(-beta.imag, -beta.real)  # arg(-beta) = phi - vartheta
    phi = 0.5 * (s + t)
    vartheta = 0.5 * (s - t)
    phi %= math.pi  # shifting phi by pi and vartheta by -pi is the same g
    if phi >= math.pi:  # roundoff from the modulus at the seam
        phi = 0.0
    vartheta = s - phi  # keep phi + vartheta = arg(alpha) exactly
    return CartanCoord(phi, u, vartheta % TWO_PI)


def from_cartan(coord: CartanCoord) -> GroupElement:
    return GroupElement.k(coord.phi).mul(a_u(coord.u)).mul(GroupElement.k(coord.vartheta))


def cartan_from_entries(a, b, c, d):
    """Vectorized (u, phi + vartheta) for entry arrays.

    Only the rotation-invariant data needed by kernel evaluations; the
    angle sum is arg(alpha), well-defined even on the rotation axis.
    """
    alpha_re = 0.5 * (a + d)
    alpha_im = 0.5 * (b - c)
    u = 0.25 * ((a - d) ** 2 + (b + c) ** 2)
    return u, np.arctan2(alpha_im, alpha_re)


def theta_from_cartan(phi: float, u: float) -> float:
    """Rotation angle of the horocycle factorization of k[phi] a_u.

    Principal square root with the cut along the negative real axis:
    exp(i theta) = exp(i phi) * sqrt((s + exp(-2i phi)) / (s + exp(2i phi)))
    with s = sqrt(1 + 1/u).
    """
    if u <= 0:
        raise DomainError("theta_from_cartan requires u > 0")
    s = math.sqrt(1.0 + 1.0 / u)
    num = s + complex(math.cos(2.0 * phi), -math.sin(2.0 * phi))
    den = s + complex(math.cos(2.0 * phi), math.sin(2.0 * phi))
    ratio = num / den
    half = 0.5 * math.atan2(ratio.imag, ratio.real)
    return (phi + half) % TWO_PI


# --- big-cell chart ---------------------------------------------------------


def to_bruhat(g: GroupElement) -> BruhatCoord:
    a, _, c, d = g.entries()
    if abs(c) <= _SMALL_CELL:
        raise SmallCell(f"|c| = {abs(c):.3e} is too small for the big cell")
    return BruhatCoord(a / c, c, d / c)


def from_bruhat(coord: BruhatCoord) -> GroupElement:
    g = (
        GroupElement.n(coord.r1)
        .mul(GroupElement.w())
        .mul(GroupElement.a_diag(coord.c * coord.c))
        .mul(GroupElement.n(coord.r2))
    )
    return g.neg() if coord.c > 0 else g


# --- adapters for field evaluation -----------------------------------------


def matrix_evaluator(F):
    """Return a callable (a, b, c, d arrays) -> complex array for ``F``.

    Fields may advertise a vectorized ``eval_entries``; plain callables on
    GroupElement are looped.
    """
    fast = getattr(F, "eval_entries", None)
    if fast is not None:
        return fast

    def call(a, b, c, d):
        flat = [np.asarray(v, dtype=float).ravel() for v in (a, b, c, d)]
        out = np.array(
            [complex(F(GroupElement(*row))) for row in zip(*flat)], dtype=complex
        )
        return out.reshape(np.asarray(a).shape)

    return call


def radial_evaluator(F):
    """Return a callable u-array -> complex array evaluating ``F`` at a_u."""
    fast = getattr(F, "eval_radial", None)
    if fast is not None:
        return fast
    batch = matrix_evaluator(F)

    def call(u):
        u = np.asarray(u, dtype=float)
        y = y_from_u(u)
        r = np.sqrt(y)
        z = np.zeros_like(r)
        return batch(r, z, z, 1.0 / r)

    return call
