"""Harmonic analysis on SL(2,R): charts, operators, kernels, majorants."""

from .arithmetic import (
    CountSummary,
    DirichletCharacter,
    HeckeCoset,
    IntegerMatrix,
    LatticeQuery,
    apply_hecke,
    chi_eval,
    count_gamma0,
    enumerate_gamma0,
    gamma0_index,
    hecke_cosets,
    kronecker_symbol,
)
from .errors import (
    BadHint,
    CertificationFailure,
    ChartSingularity,
    ConfigError,
    CoprimalityError,
    DegenerateCartanWarning,
    DomainError,
    NonConvergence,
    NotInGroup,
    OverflowGuard,
    ParityError,
    SmallCell,
)
from .group import (
    BruhatCoord,
    CartanCoord,
    GroupElement,
    IwasawaCoord,
    conjugate_diag,
    from_bruhat,
    from_cartan,
    from_iwasawa,
    theta_from_cartan,
    to_bruhat,
    to_cartan,
    to_iwasawa,
    u_of,
    u_skewed,
)
from .harmonics import (
    EigenCheckReport,
    SpectralParameter,
    TypePair,
    angular_class_field,
    eigen_operator_check,
    g_factor_ratio,
    p_norm_squared,
    p_normalized,
    phi_basic,
    phi_two_type,
    project_types,
    radial_field,
    spectral_transform,
)
from .kernels import (
    DERIVATIVE_MARGIN,
    SPECTRAL_GAP_DEFAULT,
    BumpAxis,
    DyadicBump,
    ExperimentReport,
    IwasawaWeight,
    KernelWeight,
    PointFunctional,
    SplineWindow,
    automorphic_kernel,
    box_spline_window,
    character_from_config,
    discrepancy,
    functional_from_config,
    hecke_twisted_sum,
    kinvariant_experiment,
    main_term,
    make_bump,
    projected_kernel,
    theorem_experiment,
    unskew,
    weighted_discrepancy,
)
from .lie import SmoothField, apply_e_minus, apply_e_plus, apply_x3, casimir
from .majorants import (
    AngularCutoff,
    AngularKernel,
    ExceptionalReport,
    MajorantKernel,
    RadialBump,
    SpectralCheckReport,
    convolution_support_bound,
    convolve_rhd,
    dirac_kernel,
    exceptional_kernel,
    exceptional_window_field,
    k_skewed,
    majorant_kernel,
    spectral_positivity_check,
)
from .quadrature import (
    IwasawaBox,
    QuadratureSpec,
    RadialSupport,
    fd_derivative,
    integrate_1d,
    integrate_box,
    integrate_G,
    integrate_periodic,
)
from .verify import CheckResult, SuiteReport, run_suite

__version__ = "0.1.0"
