"""Right Lie differentials and the Casimir operator on coordinate charts.

Operators act on :class:`SmoothField` objects through the horocycle-chart
formulas

* ``e+ = e^{2i theta} (2iy dx + 2y dy - i dtheta)``
* ``e- = e^{-2i theta} (-2iy dx + 2y dy + i dtheta)``
* ``x3 = dtheta``

and the Casimir operator through either chart,

* horocycle: ``Omega = -y^2 (dxx + dyy) + y dx dtheta``
* polar, radial variable u: ``-u(u+1) duu - (2u+1) du`` plus angular terms
  with ``1/(16u(u+1))`` weights; near the axis the equivalent rho-form
  (``cosh rho = 2u+1``) avoids the u -> 0 coefficient blowup.

Derivatives come from supplied chart-partial callbacks when the field has
them and from fourth-order finite differences otherwise, so any pointwise
evaluator is admissible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Mapping

from .errors import ChartSingularity, DomainError
from .group import GroupElement, a_u, to_cartan, to_iwasawa, u_of
from .quadrature import fd_derivative, fd_step

__all__ = [
    "SmoothField",
    "apply_e_plus",
    "apply_e_minus",
    "apply_x3",
    "casimir",
]

# Polar-chart regime boundaries: u-form coefficients are well conditioned
# above _U_FORM_MIN; between _AXIS_MIN and _U_FORM_MIN the rho-form takes
# over; below _AXIS_MIN the chart data itself is untrustworthy.
_U_FORM_MIN = 1e-6
_AXIS_MIN = 1e-10
_SERIES_RHO = 1e-5

# Angles live on circles, so their finite-difference steps use unit scale
# rather than the |x|+1 scaling that suits unbounded coordinates.
_ANGLE_STEP_1 = fd_step(0.0, 1)
_ANGLE_STEP_2 = fd_step(0.0, 2)


@dataclass
class SmoothField:
    """A pointwise-evaluable function on the group.

    ``iwasawa_partials`` and ``cartan_partials`` optionally map coordinate
    names ("x", "y", "theta" and "phi", "u", "vartheta") to callbacks taking
    the three chart coordinates; when present they replace finite
    differences for first derivatives. ``smoothness_class`` records how many
    derivatives are trustworthy.
    """

    evaluator: Callable[[GroupElement], complex]
    iwasawa_partials: Mapping[str, Callable[[float, float, float], complex]] | None = None
    cartan_partials: Mapping[str, Callable[[float, float, float], complex]] | None = None
    smoothness_class: float = math.inf

    def __call__(self, g: GroupElement) -> complex:
        return complex(self.evaluator(g))


def as_field(f) -> SmoothField:
    return f if isinstance(f, SmoothField) else SmoothField(f)


def _nak(x: float, y: float, theta: float) -> GroupElement:
    """n[x] a[y] k[theta] without chart-record validation (FD stencils may
    step theta outside the canonical window)."""
    r = math.sqrt(y)
    ct, st = math.cos(theta), math.sin(theta)
    return GroupElement(r * ct - (x / r) * st, r * st + (x / r) * ct, -st / r, ct / r)


def _kak(phi: float, u: float, vartheta: float) -> GroupElement:
    return GroupElement.k(phi).mul(a_u(u)).mul(GroupElement.k(vartheta))


def _iwasawa_gradient(field: SmoothField, x: float, y: float, theta: float):
    """(df/dx, df/dy, df/dtheta) at a horocycle-chart point."""
    sup = field.iwasawa_partials or {}
    F = field.evaluator
    px = (
        complex(sup["x"](x, y, theta))
        if "x" in sup
        else fd_derivative(lambda t: F(_nak(t, y, theta)), x, 1)
    )
    py = (
        complex(sup["y"](x, y, theta))
        if "y" in sup
        else fd_derivative(lambda t: F(_nak(x, t, theta)), y, 1, step=min(fd_step(y, 1), y / 4))
    )
    pt = (
        complex(sup["theta"](x, y, theta))
        if "theta" in sup
        else fd_derivative(lambda t: F(_nak(x, y, t)), theta, 1, step=_ANGLE_STEP_1)
    )
    return px, py, pt


def apply_e_plus(f) -> SmoothField:
    """Raising operator; shifts right rotation type by +2."""
    field = as_field(f)

    def evaluator(g: GroupElement) -> complex:
        coord = to_iwasawa(g)
        px, py, pt = _iwasawa_gradient(field, coord.x, coord.y, coord.theta)
        phase = complex(math.cos(2.0 * coord.theta), math.sin(2.0 * coord.theta))
        return phase * (2j * coord.y * px + 2.0 * coord.y * py - 1j * pt)

    return SmoothField(evaluator, smoothness_class=field.smoothness_class - 1)


def apply_e_minus(f) -> SmoothField:
    """Lowering operator; shifts right rotation type by -2."""
    field = as_field(f)

    def evaluator(g: GroupElement) -> complex:
        coord = to_iwasawa(g)
        px, py, pt = _iwasawa_gradient(field, coord.x, coord.y, coord.theta)
        phase = complex(math.cos(2.0 * coord.theta), -math.sin(2.0 * coord.theta))
        return phase * (-2j * coord.y * px + 2.0 * coord.y * py + 1j * pt)

    return SmoothField(evaluator, smoothness_class=field.smoothness_class - 1)


def apply_x3(f) -> SmoothField:
    """Rotation derivative d/dtheta."""
    field = as_field(f)

    def evaluator(g: GroupElement) -> complex:
        coord = to_iwasawa(g)
        sup = field.iwasawa_partials or {}
        if "theta" in sup:
            return complex(sup["theta"](coord.x, coord.y, coord.theta))
        return fd_derivative(
            lambda t: field.evaluator(_nak(coord.x, coord.y, t)),
            coord.theta,
            1,
            step=_ANGLE_STEP_1,
        )

    return SmoothField(evaluator, smoothness_class=field.smoothness_class - 1)


def _casimir_iwasawa(field: SmoothField, g: GroupElement) -> complex:
    coord = to_iwasawa(g)
    x, y, theta = coord.x, coord.y, coord.theta
    F = field.evaluator
    sup = field.iwasawa_partials or {}
    ystep = min(fd_step(y, 2), y / 4)
    fxx = fd_derivative(lambda t: F(_nak(t, y, theta)), x, 2)
    fyy = fd_derivative(lambda t: F(_nak(x, t, theta)), y, 2, step=ystep)
    if "x" in sup:
        fxt = fd_derivative(lambda t: complex(sup["x"](x, y, t)), theta, 1, step=_ANGLE_STEP_1)
    elif "theta" in sup:
        fxt = fd_derivative(lambda t: complex(sup["theta"](t, y, theta)), x, 1)
    else:
        fxt = fd_derivative(
            lambda s: fd_derivative(lambda t: F(_nak(t, y, s)), x, 1),
            theta,
            1,
            step=_ANGLE_STEP_1,
        )
    return -y * y * (fxx + fyy) + y * fxt


def _casimir_cartan(field: SmoothField, g: GroupElement) -> complex:
    u0 = u_of(g)
    if u0 < _AXIS_MIN:
        raise ChartSingularity(
            f"polar-chart Casimir is singular at u = {u0:.3e} (below {_AXIS_MIN})"
        )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        coord = to_cartan(g)
    phi, u, vth = coord.phi, coord.u, coord.vartheta
    F = field.evaluator
    sup = field.cartan_partials or {}

    rho = 2.0 * math.asinh(math.sqrt(max(u, _AXIS_MIN)))

    def along_rho(t: float) -> complex:
        return F(GroupElement.k(phi).mul(GroupElement.a_diag(math.exp(-t))).mul(GroupElement.k(vth)))

    def fphi(p, uu, t):
        if "phi" in sup:
            return complex(sup["phi"](p, uu, t))
        return fd_derivative(lambda s: F(_kak(s, uu, t)), p, 1, step=_ANGLE_STEP_1)

    # The angular terms of either displayed form regroup around the skew
    # second derivative D^2 f = (d/ds)^2 f(k[phi+s] a_u k[vth-s]):
    #   -w*fpp + 2(2u+1)*w*fpt - w*ftt = -w*D^2 f + fpt / (4(u+1)),
    # with w = 1/(16u(u+1)) = 1/(4 sinh^2 rho). Along the skew line only the
    # phase of the sinh(rho/2) entry moves, so the pulled-back field varies
    # at O(sqrt(u)) and the 1/u weight never meets a large cancellation.
    # Balancing truncation ~ h^4 sqrt(u) against roundoff ~ eps/h^2 puts the
    # optimal skew step near (eps/sqrt(u))^(1/6).
    dstep = min(0.05, max(_ANGLE_STEP_2, (3.5e-16 / math.sqrt(max(u, _AXIS_MIN))) ** (1.0 / 6.0)))
    if "phi" in sup and "vartheta" in sup:
        d2 = fd_derivative(
            lambda s: complex(sup["phi"](phi + s, u, vth - s))
            - complex(sup["vartheta"](phi + s, u, vth - s)),
            0.0,
            1,
            step=dstep,
        )
    else:
        d2 = fd_derivative(lambda s: F(_kak(phi + s, u, vth - s)), 0.0, 2, step=dstep)
    fpt = fd_derivative(lambda s: fphi(phi, u, s), vth, 1, step=_ANGLE_STEP_1)
    angular = -d2 / (16.0 * u * (u + 1.0)) + fpt / (4.0 * (u + 1.0))

    fr = fd_derivative(along_rho, rho, 1)
    frr = fd_derivative(along_rho, rho, 2)
    if u > _U_FORM_MIN:
        # The u-form radial part. Derivatives are taken along rho, where the
        # chart map is analytic, and converted through u = sinh^2(rho/2);
        # stepping in u directly is ill-conditioned at small u because matrix
        # entries vary like sqrt(u).
        du = 0.5 * math.sinh(rho)
        ddu = 0.5 * math.cosh(rho)
        fu_chain = fr / du
        fuu = (frr - fu_chain * ddu) / (du * du)
        fu = complex(sup["u"](phi, u, vth)) if "u" in sup else fu_chain
        return -u * (u + 1.0) * fuu - (2.0 * u + 1.0) * fu + angular

    # Narrow collar around the axis: the rho-form radial part with a
    # series-guarded coefficient (cosh rho = 2u+1, u = sinh^2(rho/2)).
    if rho < _SERIES_RHO:
        coth = 1.0 / rho + rho / 3.0
    else:
        coth = math.cosh(rho) / math.sinh(rho)
    return -frr - coth * fr + angular


def casimir(f, chart: str = "iwasawa") -> SmoothField:
    """Casimir operator evaluated through the requested chart."""
    field = as_field(f)
    if chart == "iwasawa":
        evaluator = lambda g: _casimir_iwasawa(field, g)  # noqa: E731
    elif chart == "cartan":
        evaluator = lambda g: _casimir_cartan(field, g)  # noqa: E731
    else:
        raise DomainError(f"unknown chart {chart!r}; use 'iwasawa' or 'cartan'")
    return SmoothField(evaluator, smoothness_class=field.smoothness_class - 2)
