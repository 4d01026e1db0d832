"""Named self-check suites over the library's cross-module invariants.

Each suite runs a short list of checks and reports, per check, the measured
residual next to the tolerance it must stay under.  Every check cites the
invariant it exercises, and every check goes through the public API only,
so a green suite certifies the installed package rather than the test tree.

The available suites are:

``core``
    Chart round trips, the horocycle rotation angle, the first-order
    operator commutators, the Casimir eigenvalue, and the agreement of the
    closed-form Haar integral with chart quadrature.
``harmonics``
    Normalization identities of the spectral functions, the closed form of
    the weight-two integrand, batch/scalar agreement, and the transform
    eigenvalue identity for a smooth compactly supported field.
``kernels``
    Rotation-stabilizer mass of a near-dirac kernel, automorphy under the
    congruence group, main-term route agreement, pairing invariance under
    unskewing, the unit reduction of twisted sums, and the derivative
    certificates of the plateau bumps.
``majorants``
    The envelope and support constants of the convolution square, spectral
    positivity of its transform table, and the exceptional-window
    certificate.

``run_suite("all", ...)`` concatenates the four suites in the order above.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .arithmetic import DirichletCharacter, gamma0_index
from .errors import ConfigError
from .group import (
    CartanCoord,
    GroupElement,
    IwasawaCoord,
    from_cartan,
    from_iwasawa,
    theta_from_cartan,
    to_cartan,
    to_iwasawa,
)
from .harmonics import (
    RadialSupport,
    SpectralParameter,
    TypePair,
    eigen_operator_check,
    p_norm_squared,
    p_normalized,
    p_normalized_batch,
    radial_field,
)
from .kernels import (
    DERIVATIVE_MARGIN,
    IwasawaWeight,
    KernelWeight,
    PointFunctional,
    automorphic_kernel,
    hecke_twisted_sum,
    main_term,
    make_bump,
    unskew,
    weighted_discrepancy,
)
from .lie import SmoothField, apply_e_minus, apply_e_plus, apply_x3, casimir
from .majorants import (
    RadialBump,
    dirac_kernel,
    exceptional_kernel,
    majorant_kernel,
    spectral_positivity_check,
)
from .quadrature import DEFAULT_SPEC, IwasawaBox, QuadratureSpec, integrate_G

__all__ = ["CheckResult", "SuiteReport", "SUITE_NAMES", "run_suite"]

SUITE_NAMES = ("core", "harmonics", "kernels", "majorants")


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one named invariant check."""

    name: str
    invariant: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def to_json(self) -> dict:
        return {
            "check": self.name,
            "invariant": self.invariant,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "status": "pass" if self.passed else "fail",
        }


@dataclass(frozen=True)
class SuiteReport:
    """All check outcomes for one suite run."""

    suite: str
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "status": "pass" if self.passed else "fail",
            "checks": [check.to_json() for check in self.checks],
        }


# --- shared samplers --------------------------------------------------------


def _random_elements(rng: np.random.Generator, n: int) -> list[GroupElement]:
    out: list[GroupElement] = []
    while len(out) < n:
        a, b, c, d = rng.uniform(-10.0, 10.0, size=4)
        det = a * d - b * c
        if det > 1e-3:
            s = math.sqrt(det)
            out.append(GroupElement(a / s, b / s, c / s, d / s))
    return out


def _chart_points(rng: np.random.Generator, n: int) -> list[GroupElement]:
    return [
        from_iwasawa(IwasawaCoord(x, y, t))
        for x, y, t in zip(
            rng.uniform(-2.0, 2.0, n),
            rng.uniform(0.3, 3.0, n),
            rng.uniform(0.0, 2.0 * math.pi, n),
        )
    ]


def _entry_gap(g: GroupElement, h: GroupElement) -> float:
    return float(np.max(np.abs(g.matrix() - h.matrix())))


def _mixed_field() -> SmoothField:
    def f(g: GroupElement) -> complex:
        c = to_iwasawa(g)
        return cmath.exp(1j * c.x) * c.y**1.3 * cmath.exp(2j * c.theta)

    return SmoothField(f)


def _eigenfunction(nu: complex, ell: int) -> SmoothField:
    def value(x: float, y: float, theta: float) -> complex:
        return y ** (0.5 + nu) * cmath.exp(1j * ell * theta)

    def of_g(g: GroupElement) -> complex:
        c = to_iwasawa(g)
        return value(c.x, c.y, c.theta)

    return SmoothField(
        of_g,
        iwasawa_partials={
            "x": lambda x, y, t: 0j,
            "y": lambda x, y, t: (0.5 + nu) / y * value(x, y, t),
            "theta": lambda x, y, t: 1j * ell * value(x, y, t),
        },
    )


def _cap_profile(u: np.ndarray, cap: float = 2.0) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = u < cap
    r = u[inside] / cap
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r * r))
    return out


# --- core suite -------------------------------------------------------------


def _check_chart_round_trip(seed: int, spec: QuadratureSpec) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for g in _random_elements(rng, 200):
        worst = max(worst, _entry_gap(from_iwasawa(to_iwasawa(g)), g))
        worst = max(worst, _entry_gap(from_cartan(to_cartan(g)), g))
    return CheckResult(
        "group.chart_round_trip",
        "horocycle and polar charts invert each other on random elements",
        worst,
        1e-10,
    )


def _check_horocycle_angle(seed: int, spec: QuadratureSpec) -> CheckResult:
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for _ in range(200):
        phi = float(rng.uniform(0.0, math.pi))
        u = float(rng.uniform(1e-3, 50.0))
        direct = theta_from_cartan(phi, u)
        oracle = to_iwasawa(from_cartan(CartanCoord(phi, u, 0.0))).theta
        worst = max(worst, abs(direct - oracle))
    return CheckResult(
        "group.horocycle_angle",
        "closed-form rotation angle of k[phi] a_u matches the chart route",
        worst,
        1e-10,
    )


def _check_commutators(seed: int, spec: QuadratureSpec) -> CheckResult:
    field = _mixed_field()
    rng = np.random.default_rng(seed + 2)
    pts = _chart_points(rng, 12)
    worst = 0.0
    x3f = apply_x3(field)
    for sign, op in ((+1, apply_e_plus), (-1, apply_e_minus)):
        opf = op(field)
        x3opf = apply_x3(opf)
        opx3f = op(x3f)
        for g in pts:
            lhs = x3opf(g) - opx3f(g)
            rhs = sign * 2j * opf(g)
            worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
    pm = apply_e_plus(apply_e_minus(field))
    mp = apply_e_minus(apply_e_plus(field))
    for g in pts:
        lhs = pm(g) - mp(g)
        rhs = -4j * x3f(g)
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
    return CheckResult(
        "lie.commutators",
        "rotation and raising/lowering operators close under the bracket",
        worst,
        1e-4,
    )


def _check_casimir(seed: int, spec: QuadratureSpec) -> CheckResult:
    nu = 0.35
    field = _eigenfunction(nu, -2)
    om = casimir(field, "iwasawa")
    lam = 0.25 - nu * nu
    rng = np.random.default_rng(seed + 3)
    worst = 0.0
    for g in _chart_points(rng, 10):
        value = field(g)
        worst = max(worst, abs(om(g) - lam * value) / abs(value))
    return CheckResult(
        "lie.casimir_eigenvalue",
        "power-law sections are Casimir eigenfunctions with 1/4 - nu^2",
        worst,
        1e-6,
    )


def _check_haar_consistency(seed: int, spec: QuadratureSpec) -> CheckResult:
    weight = IwasawaWeight(
        make_bump((2.0, 1.0), 1.0 / 32.0, 6, parities=("even", "plus"))
    )
    closed = weight.haar_integral(spec)

    class EntryField:
        def eval_entries(self, a, b, c, d):
            return weight.evaluate_entries(a, b, c, d)

        def __call__(self, g):
            return weight(g)

    hint = IwasawaBox(-4.01, 4.01, 0.999, 2.001)
    chart = integrate_G(EntryField(), hint, spec)
    residual = abs(closed - float(chart.real)) / abs(closed)
    return CheckResult(
        "quadrature.haar_consistency",
        "closed-form Haar mass equals chart quadrature with the y^-2 density",
        residual,
        1e-5,
    )


# --- harmonics suite --------------------------------------------------------


def _check_norm_identity(seed: int, spec: QuadratureSpec) -> CheckResult:
    worst = 0.0
    for k in (2, 4):
        param = SpectralParameter.discrete(k)
        value = p_norm_squared(param, k, k, spec)
        worst = max(worst, abs((k - 1) * value - 1.0))
    return CheckResult(
        "harmonics.norm_identity",
        "the squared line mass of the lowest-type section is 1/(k-1)",
        worst,
        1e-6,
    )


def _check_weight_two_integrand(seed: int, spec: QuadratureSpec) -> CheckResult:
    u = np.linspace(0.0, 50.0, 601)
    values = p_normalized_batch(u, SpectralParameter.discrete(2), 2, 2)
    residual = float(np.max(np.abs(np.abs(values) ** 2 - (1.0 + u) ** -2)))
    return CheckResult(
        "harmonics.weight_two_integrand",
        "the weight-two squared section equals (1+u)^-2 pointwise",
        residual,
        1e-8,
    )


def _check_batch_scalar_agreement(seed: int, spec: QuadratureSpec) -> CheckResult:
    rng = np.random.default_rng(seed + 4)
    u = rng.uniform(0.0, 12.0, 32)
    worst = 0.0
    for param, l1, l2 in (
        (SpectralParameter.principal(1.0), 2, 2),
        (SpectralParameter.principal(0.5), 0, 2),
        (SpectralParameter.discrete(4), 6, 4),
        (SpectralParameter.exceptional(0.25), 0, 0),
    ):
        batch = p_normalized_batch(u, param, l1, l2)
        scalar = np.array([p_normalized(float(x), param, l1, l2) for x in u])
        worst = max(worst, float(np.max(np.abs(batch - scalar))))
    return CheckResult(
        "harmonics.batch_scalar_agreement",
        "vectorized sections agree with the scalar recurrence",
        worst,
        1e-12,
    )


def _check_eigen_identity(seed: int, spec: QuadratureSpec) -> CheckResult:
    field = radial_field(lambda u: _cap_profile(u))
    report = eigen_operator_check(
        field, 0, 0.5j, GroupElement.a_diag(2.0), RadialSupport(2.0), spec
    )
    return CheckResult(
        "harmonics.eigen_identity",
        "the transform intertwines group translation with its eigenvalue",
        report.residual / report.scale,
        1e-5,
    )


# --- kernels suite ----------------------------------------------------------


def _check_rotation_mass(seed: int, spec: QuadratureSpec) -> CheckResult:
    weight = dirac_kernel(0.05)
    chi = DirichletCharacter.principal(1)
    tau = GroupElement.identity()
    value = automorphic_kernel(weight, 1, chi, tau, tau)
    expected = 4.0 * weight(tau)
    residual = abs(value - expected) / abs(expected)
    return CheckResult(
        "kernels.rotation_stabilizer_mass",
        "a near-dirac sum at level one collects its four stabilizer images",
        residual,
        1e-10,
    )


def _check_automorphy(seed: int, spec: QuadratureSpec) -> CheckResult:
    weight = KernelWeight(make_bump((1.0, 3.0, 1.0), 1.0 / 32.0, 2))
    chi = DirichletCharacter.principal(3)
    tau1 = GroupElement.n(0.2)
    tau2 = GroupElement.a_diag(1.2)
    gamma = GroupElement.from_json({"a": 2.0, "b": 1.0, "c": 3.0, "d": 2.0})
    base = automorphic_kernel(weight, 3, chi, tau1, tau2)
    moved = automorphic_kernel(weight, 3, chi, gamma @ tau1, tau2)
    residual = abs(moved - base) / abs(base)
    return CheckResult(
        "kernels.automorphy",
        "the kernel is invariant under congruence moves in either slot",
        residual,
        1e-10,
    )


def _check_main_term_routes(seed: int, spec: QuadratureSpec) -> CheckResult:
    weight = KernelWeight(make_bump((2.0, 1.0, 3.0), 1.0 / 32.0, 2))
    worst = 0.0
    for q in (1, 3):
        chi = DirichletCharacter.principal(q)
        entry_route = main_term(weight, q, chi).real
        haar_route = weight.haar_integral(spec) * 12.0 / gamma0_index(q)
        worst = max(worst, abs(entry_route - haar_route) / abs(haar_route))
    return CheckResult(
        "kernels.main_term_routes",
        "entry-integral and Haar-volume main terms agree",
        worst,
        1e-9,
    )


def _check_unskew_invariance(seed: int, spec: QuadratureSpec) -> CheckResult:
    rng = np.random.default_rng(seed + 5)
    weight = KernelWeight(make_bump((2.0, 1.0, 2.0), 1.0 / 32.0, 2))
    chi = DirichletCharacter.principal(2)
    alpha1 = PointFunctional.dirac(GroupElement.n(0.2))
    alpha2 = PointFunctional.dirac(GroupElement.a_diag(1.3))
    base = weighted_discrepancy(alpha1, alpha2, weight, 2, chi)
    worst = 0.0
    for _ in range(4):
        r1 = float(np.exp(rng.uniform(np.log(1 / 8), np.log(8))))
        r2 = float(np.exp(rng.uniform(np.log(1 / 8), np.log(8))))
        new_weight, a1, a2 = unskew(weight, alpha1, alpha2, r1, r2)
        moved = weighted_discrepancy(a1, a2, new_weight, 2, chi)
        worst = max(worst, abs(moved - base) / abs(base))
    return CheckResult(
        "kernels.unskew_invariance",
        "diagonal conjugation moves skew into the weight, fixing pairings",
        worst,
        1e-8,
    )


def _check_hecke_unit(seed: int, spec: QuadratureSpec) -> CheckResult:
    weight = KernelWeight(make_bump((2.0, 1.0, 2.0), 1.0 / 32.0, 2))
    chi = DirichletCharacter.principal(5)
    alpha1 = PointFunctional.dirac(GroupElement.n(0.3))
    alpha2 = PointFunctional.dirac(GroupElement.a_diag(1.4))
    plain = weighted_discrepancy(alpha1, alpha2, weight, 5, chi)
    twisted = hecke_twisted_sum({1: 1.0}, {1: 1.0}, alpha1, alpha2, weight, 5, chi)
    residual = abs(twisted - plain) / (1.0 + abs(plain))
    return CheckResult(
        "kernels.hecke_unit_reduction",
        "a unit-index twisted sum collapses to the plain pairing",
        residual,
        1e-14,
    )


def _check_bump_certificates(seed: int, spec: QuadratureSpec) -> CheckResult:
    delta = 1.0 / 32.0
    scales = (2.0, 1.0, 2.0)
    bump = make_bump(scales, delta, 6)
    worst = 0.0
    for axis, certs in zip(range(3), bump.certificates):
        for j, measured in enumerate(certs, start=1):
            budget = (delta * scales[axis]) ** (-j)
            worst = max(worst, measured / budget)
    return CheckResult(
        "kernels.bump_certificates",
        "measured derivative bounds stay inside the documented margin",
        worst,
        DERIVATIVE_MARGIN,
    )


# --- majorants suite --------------------------------------------------------


def _check_envelope_bound(seed: int, spec: QuadratureSpec) -> CheckResult:
    kernel = majorant_kernel(16.0, spec)
    return CheckResult(
        "majorants.envelope_bound",
        "the convolution square obeys k(a_u) <= C / sqrt(1+u) with C <= 20",
        kernel.bound_constant,
        20.0,
    )


def _check_support_constant(seed: int, spec: QuadratureSpec) -> CheckResult:
    kernel = majorant_kernel(16.0, spec)
    return CheckResult(
        "majorants.support_constant",
        "the square is supported in u <= c Z with c at most 100",
        kernel.support_constant,
        100.0,
    )


def _check_spectral_positivity(seed: int, spec: QuadratureSpec) -> CheckResult:
    params = [
        SpectralParameter.principal(0.0),
        SpectralParameter.principal(1.0),
        SpectralParameter.exceptional(0.25),
    ]
    report = spectral_positivity_check(RadialBump(4.0), params, [0, 2], spec)
    return CheckResult(
        "majorants.spectral_positivity",
        "transforms of the square factor as |transform of the root|^2",
        report.max_violation / report.scale,
        1e-6,
    )


def _check_exceptional_window(seed: int, spec: QuadratureSpec) -> CheckResult:
    report = exceptional_kernel(8.0, 1, 0.1, spec)
    residual = max(-report.min_table_entry, 0.0) + float(report.subgrid_points)
    return CheckResult(
        "majorants.exceptional_window",
        "the exceptional-window transform table is entrywise nonnegative",
        residual,
        1e-8,
    )


# --- registry ---------------------------------------------------------------

_SUITES = {
    "core": (
        _check_chart_round_trip,
        _check_horocycle_angle,
        _check_commutators,
        _check_casimir,
        _check_haar_consistency,
    ),
    "harmonics": (
        _check_norm_identity,
        _check_weight_two_integrand,
        _check_batch_scalar_agreement,
        _check_eigen_identity,
    ),
    "kernels": (
        _check_rotation_mass,
        _check_automorphy,
        _check_main_term_routes,
        _check_unskew_invariance,
        _check_hecke_unit,
        _check_bump_certificates,
    ),
    "majorants": (
        _check_envelope_bound,
        _check_support_constant,
        _check_spectral_positivity,
        _check_exceptional_window,
    ),
}


def run_suite(
    name: str, seed: int = 0, spec: QuadratureSpec = DEFAULT_SPEC
) -> SuiteReport:
    """Run the named check suite and return its report.

    ``name`` is one of ``core``, ``harmonics``, ``kernels``, ``majorants``,
    or ``all``.  ``seed`` drives every sampled check, so reports for a fixed
    seed are deterministic.
    """
    if name == "all":
        checks = [fn for suite in SUITE_NAMES for fn in _SUITES[suite]]
    elif name in _SUITES:
        checks = list(_SUITES[name])
    else:
        known = ", ".join((*SUITE_NAMES, "all"))
        raise ConfigError(f"unknown suite {name!r}; expected one of {known}")
    return SuiteReport(name, tuple(fn(seed, spec) for fn in checks))
