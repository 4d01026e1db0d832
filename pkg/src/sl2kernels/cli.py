"""Batch command-line driver with reproducible, machine-readable outputs.

Every subcommand reads its parameters from flags, from a JSON config file
(``--config``), or both, with flags taking precedence.  Configs are
schema-checked before execution: unknown keys are rejected.  Common fields
shared by all subcommands:

``--seed``
    Seed for sampled checks (recorded in the manifest either way).
``--rel-tol, --abs-tol, --max-panels, --panel-order``
    Quadrature overrides applied on top of the library defaults.
``--output``
    Path of the primary artifact.  When set, the payload goes to the file,
    a run manifest goes to ``<output>.manifest.json``, and report-style
    subcommands render a figure next to the payload.  Without it the
    payload goes to stdout and the manifest to stderr.
``--format``
    ``json`` or ``csv``.  Transform tables default to CSV, everything else
    to JSON.
``--threads``
    Recorded thread budget; defaults to the ``SL2KERNELS_THREADS``
    environment variable.  Tabulation-level parallelism is delegated to
    the library modules, one experiment per process.

Primary artifacts are byte-identical for identical config and seed; the
wall time and thread count live only in the manifest.  The manifest also
embeds the frozen calibration constants so regression drift in any of them
is diagnosable from artifacts alone.

Exit codes: 0 success, 1 configuration or domain error, 2 certification or
verification failure, 3 quadrature non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .arithmetic import LatticeQuery, count_gamma0, enumerate_gamma0
from .errors import (
    BadHint,
    CertificationFailure,
    ChartSingularity,
    ConfigError,
    CoprimalityError,
    DomainError,
    NonConvergence,
    NotInGroup,
    OverflowGuard,
    ParityError,
    SmallCell,
)
from .group import (
    CartanCoord,
    GroupElement,
    IwasawaCoord,
    from_cartan,
    from_iwasawa,
    to_cartan,
    to_iwasawa,
)
from .harmonics import (
    RadialSupport,
    SpectralParameter,
    TypePair,
    angular_class_field,
    p_normalized,
    radial_field,
    transform_rows,
)
from .kernels import (
    DERIVATIVE_MARGIN,
    IwasawaWeight,
    KernelWeight,
    SPECTRAL_GAP_DEFAULT,
    automorphic_kernel,
    character_from_config,
    discrepancy,
    kinvariant_experiment,
    main_term,
    make_bump,
    theorem_experiment,
)
from .majorants import (
    ENVELOPE_LIMIT,
    RadialBump,
    dirac_kernel,
    exceptional_kernel,
    majorant_kernel,
    spectral_positivity_check,
)
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .verify import SUITE_NAMES, run_suite

__all__ = ["main"]

THREAD_ENV = "SL2KERNELS_THREADS"

# Calibration constant of the big-cell parametrization: the chart measure
# dx dy dtheta / (4 pi^2 y^2) equals KAPPA_BRUHAT * da dc dd / |c|.
KAPPA_BRUHAT = 1.0 / (2.0 * math.pi**2)

_COMMON_KEYS = frozenset(
    {
        "seed",
        "output",
        "format",
        "rel_tol",
        "abs_tol",
        "max_panels",
        "panel_order",
        "threads",
    }
)

_LATTICE_KEYS = frozenset(
    {"q", "bound", "bound_b", "bound_c", "bound_d", "ball_u", "ball_r"}
)

_COMMAND_KEYS = {
    "convert": frozenset({"entries", "iwasawa", "cartan"}),
    "enumerate": _LATTICE_KEYS,
    "count": _LATTICE_KEYS,
    "harmonic": frozenset({"l1", "l2", "nu", "u", "kind"}),
    "transform-table": frozenset({"field", "params", "pairs", "u_max"}),
    "kernel-sum": frozenset({"q", "chi", "weight", "tau1", "tau2"}),
    "discrepancy": frozenset({"q", "chi", "weight", "tau1", "tau2"}),
    "experiment": frozenset(
        {
            "q",
            "chi",
            "A",
            "C",
            "D",
            "X0",
            "X1",
            "X2",
            "delta",
            "order",
            "parities",
            "theta",
            "conjugate_by",
            "alpha1",
            "alpha2",
        }
    ),
    "kinv-experiment": frozenset(
        {
            "q",
            "chi",
            "X",
            "Y",
            "Z0",
            "Z1",
            "Z2",
            "delta",
            "order",
            "parities",
            "beta",
            "H",
            "theta",
            "alpha1",
            "alpha2",
        }
    ),
    "majorant": frozenset({"z", "nodes", "params", "ells", "level", "eta"}),
    "verify": frozenset({"suite"}),
}

_DEFAULT_FORMAT = {"transform-table": "csv"}

_TABLE_COLUMNS = ("nu_kind", "nu", "l1", "l2", "re", "im", "err_est")


# --- configuration plumbing -------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as ConfigError."""

    def error(self, message: str):
        raise ConfigError(message)


def _json_flag(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        # argparse rewrites ValueError messages; ArgumentTypeError passes through.
        raise argparse.ArgumentTypeError(f"expected a JSON value: {exc}") from None


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--output", type=Path, help="primary artifact path")
    parser.add_argument("--format", choices=("json", "csv"))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--rel-tol", dest="rel_tol", type=float)
    parser.add_argument("--abs-tol", dest="abs_tol", type=float)
    parser.add_argument("--max-panels", dest="max_panels", type=int)
    parser.add_argument("--panel-order", dest="panel_order", type=int)
    parser.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sl2kernels", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        return p

    p = command("convert", "convert one chart record into all charts")
    p.add_argument("--entries", type=_json_flag, help='JSON object {"a", "b", "c", "d"}')
    p.add_argument("--iwasawa", type=_json_flag, help='JSON object {"x", "y", "theta"}')
    p.add_argument("--cartan", type=_json_flag, help='JSON object {"phi", "u", "vartheta"}')

    for name, help_text in (
        ("enumerate", "list congruence matrices in a box or skewed ball"),
        ("count", "count congruence matrices by entry pattern"),
    ):
        p = command(name, help_text)
        p.add_argument("--q", type=int)
        p.add_argument("--bound", type=float)
        p.add_argument("--bound-b", dest="bound_b", type=float)
        p.add_argument("--bound-c", dest="bound_c", type=float)
        p.add_argument("--bound-d", dest="bound_d", type=float)
        p.add_argument("--ball-u", dest="ball_u", type=float)
        p.add_argument("--ball-r", dest="ball_r", type=float)

    p = command("harmonic", "evaluate one normalized two-type section")
    p.add_argument("--l1", type=int)
    p.add_argument("--l2", type=int)
    p.add_argument("--nu", type=str)
    p.add_argument("--u", type=float)
    p.add_argument("--kind", choices=("auto", "principal", "exceptional", "discrete"))

    p = command("transform-table", "tabulate spectral transforms of a field")
    p.add_argument("--field", type=_json_flag)
    p.add_argument("--params", type=_json_flag)
    p.add_argument("--pairs", type=_json_flag)
    p.add_argument("--u-max", dest="u_max", type=float)

    for name, help_text in (
        ("kernel-sum", "evaluate one automorphic kernel sum"),
        ("discrepancy", "evaluate one discrepancy with its main term"),
    ):
        p = command(name, help_text)
        p.add_argument("--q", type=int)
        p.add_argument("--chi", type=_json_flag)
        p.add_argument("--weight", type=_json_flag)
        p.add_argument("--tau1", type=_json_flag)
        p.add_argument("--tau2", type=_json_flag)

    p = command("experiment", "run the moment-inequality experiment")
    p.add_argument("--q", type=int)
    p.add_argument("--chi", type=_json_flag)
    for flag in ("A", "C", "D", "X0", "X1", "X2"):
        p.add_argument(f"--{flag}", dest=flag, type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--order", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--conjugate-by", dest="conjugate_by", type=float)
    p.add_argument("--alpha1", type=_json_flag)
    p.add_argument("--alpha2", type=_json_flag)

    p = command("kinv-experiment", "run the rotation-invariant-vector experiment")
    p.add_argument("--q", type=int)
    p.add_argument("--chi", type=_json_flag)
    for flag in ("X", "Y", "Z0", "Z1", "Z2"):
        p.add_argument(f"--{flag}", dest=flag, type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--order", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--H", dest="H", type=int)
    p.add_argument("--beta", type=_json_flag)
    p.add_argument("--alpha1", type=_json_flag)
    p.add_argument("--alpha2", type=_json_flag)

    p = command("majorant", "certify the convolution-square majorant")
    p.add_argument("--z", type=float)
    p.add_argument("--nodes", type=int)
    p.add_argument("--params", type=_json_flag)
    p.add_argument("--ells", type=_json_flag)
    p.add_argument("--level", type=int)
    p.add_argument("--eta", type=float)

    p = command("verify", "run a named invariant check suite")
    p.add_argument("--suite", choices=(*SUITE_NAMES, "all"))

    return parser


def _merge_config(command: str, args: argparse.Namespace) -> dict:
    """File config overlaid with explicit flags, schema-checked."""
    allowed = _COMMAND_KEYS[command] | _COMMON_KEYS
    cfg: dict = {}
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(loaded) - allowed)
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {unknown}")
        cfg.update(loaded)
    for key in sorted(allowed):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


@dataclass
class _Run:
    """Execution context shared by the subcommand handlers."""

    command: str
    cfg: dict
    fmt: str
    output: Path | None
    seed: int
    threads: int
    spec: QuadratureSpec
    constants: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)

    def command_cfg(self) -> dict:
        return {k: v for k, v in self.cfg.items() if k in _COMMAND_KEYS[self.command]}


def _quadrature_spec(cfg: dict) -> QuadratureSpec:
    overrides = {
        key: cfg[key]
        for key in ("rel_tol", "abs_tol", "max_panels", "panel_order")
        if key in cfg
    }
    return replace(DEFAULT_SPEC, **overrides) if overrides else DEFAULT_SPEC


# --- serialization ----------------------------------------------------------


def _json_text(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _json_lines(records: Sequence[dict]) -> str:
    return "".join(json.dumps(record, sort_keys=True) + "\n" for record in records)


def _csv_text(fieldnames: Sequence[str], rows: Sequence[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def _flatten(record: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def _report_text(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return _json_text(payload)
    row = _flatten(payload)
    return _csv_text(list(row), [row])


# --- shared builders --------------------------------------------------------


def _record(obj, keys: Sequence[str], label: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{label} record must be a JSON object with keys {keys}")
    extra = sorted(set(obj) - set(keys))
    missing = sorted(set(keys) - set(obj))
    if extra or missing:
        raise ConfigError(
            f"{label} record needs exactly keys {list(keys)}; "
            f"missing {missing}, unknown {extra}"
        )
    try:
        return {key: float(obj[key]) for key in keys}
    except (TypeError, ValueError):
        raise ConfigError(f"{label} record entries must be numbers") from None


def _group_element(obj, label: str) -> GroupElement:
    values = _record(obj, ("a", "b", "c", "d"), label)
    return GroupElement.from_json(values)


def _parse_nu(text) -> complex:
    if isinstance(text, (int, float)):
        return complex(text)
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError:
        raise ConfigError(f"cannot parse spectral parameter {text!r}") from None


def _spectral_parameter(nu: complex, kind: str) -> SpectralParameter:
    if kind == "principal":
        if nu.real != 0.0:
            raise ConfigError(f"principal parameter needs Re nu = 0, got {nu}")
        return SpectralParameter.principal(nu.imag)
    if kind == "exceptional":
        if nu.imag != 0.0:
            raise ConfigError(f"exceptional parameter must be real, got {nu}")
        return SpectralParameter.exceptional(nu.real)
    if kind == "discrete":
        k = 2.0 * nu.real + 1.0
        if nu.imag != 0.0 or abs(k - round(k)) > 1e-12 or round(k) < 2:
            raise ConfigError(f"discrete parameter needs nu = (k-1)/2, got {nu}")
        return SpectralParameter.discrete(int(round(k)))
    # auto: imaginary axis -> principal, (0, 1/2) -> exceptional,
    # half-integers >= 1/2 -> discrete.
    if nu.real == 0.0:
        return SpectralParameter.principal(nu.imag)
    if nu.imag == 0.0 and 0.0 < nu.real < 0.5:
        return SpectralParameter.exceptional(nu.real)
    if nu.imag == 0.0:
        k = 2.0 * nu.real + 1.0
        if abs(k - round(k)) <= 1e-12 and round(k) >= 2:
            return SpectralParameter.discrete(int(round(k)))
    raise ConfigError(f"cannot classify spectral parameter {nu}")


def _params_from_config(obj) -> list[SpectralParameter]:
    if not isinstance(obj, (list, tuple)) or not obj:
        raise ConfigError("params must be a non-empty list of parameter records")
    out = []
    for entry in obj:
        if not isinstance(entry, dict) or "kind" not in entry:
            raise ConfigError(f"parameter record {entry!r} needs a 'kind'")
        kind = entry["kind"]
        if kind == "principal":
            out.append(_checked_param(entry, "t", SpectralParameter.principal))
        elif kind == "exceptional":
            out.append(_checked_param(entry, "nu", SpectralParameter.exceptional))
        elif kind == "discrete":
            out.append(_checked_param(entry, "k", lambda k: SpectralParameter.discrete(int(k))))
        else:
            raise ConfigError(f"unknown parameter kind {kind!r}")
    return out


def _checked_param(entry: dict, key: str, build) -> SpectralParameter:
    extra = sorted(set(entry) - {"kind", key})
    if extra or key not in entry:
        raise ConfigError(
            f"{entry.get('kind')} parameter record needs exactly "
            f"keys ['kind', {key!r}], got {sorted(entry)}"
        )
    return build(entry[key])


def _pairs_from_config(obj) -> list[TypePair]:
    if not isinstance(obj, (list, tuple)) or not obj:
        raise ConfigError("pairs must be a non-empty list of [l1, l2] records")
    out = []
    for entry in obj:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise ConfigError(f"type pair {entry!r} must be a [l1, l2] record")
        out.append(TypePair(int(entry[0]), int(entry[1])))
    return out


def _cap_profile(u, cap: float):
    import numpy as np

    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = u < cap
    r = u[inside] / cap
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r * r))
    return out


def _field_from_config(obj):
    """Smooth compactly supported field plus its radial support bound."""
    if obj is None:
        obj = {"type": "radial-cap", "cap": 2.0}
    if not isinstance(obj, dict) or "type" not in obj:
        raise ConfigError("field must be an object with a 'type'")
    kind = obj["type"]
    if kind == "radial-cap":
        extra = sorted(set(obj) - {"type", "cap"})
        if extra:
            raise ConfigError(f"unknown field keys {extra}")
        cap = float(obj.get("cap", 2.0))
        if cap <= 0:
            raise ConfigError(f"field cap {cap} must be positive")
        return radial_field(lambda u: _cap_profile(u, cap)), cap
    if kind == "angular-cos":
        extra = sorted(set(obj) - {"type", "cap", "ell"})
        if extra:
            raise ConfigError(f"unknown field keys {extra}")
        cap = float(obj.get("cap", 2.0))
        ell = int(obj.get("ell", 2))
        if cap <= 0 or ell == 0:
            raise ConfigError("angular-cos field needs cap > 0 and ell != 0")
        import numpy as np

        field = angular_class_field(
            lambda u: _cap_profile(u, cap),
            lambda t: np.cos(ell * t),
            lambda l: 0.5 if abs(l) == abs(ell) else 0.0,
        )
        return field, cap
    raise ConfigError(f"unknown field type {kind!r}")


def _weight_from_config(obj):
    if not isinstance(obj, dict):
        raise ConfigError("weight must be a JSON object")
    kind = obj.get("kind", "entry")
    if kind == "radial-dirac":
        extra = sorted(set(obj) - {"kind", "epsilon"})
        if extra:
            raise ConfigError(f"unknown weight keys {extra}")
        return dirac_kernel(float(obj.get("epsilon", 0.05)))
    allowed = {"kind", "scales", "delta", "order", "parities", "skews"}
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"unknown weight keys {extra}")
    scales = obj.get("scales")
    if not isinstance(scales, (list, tuple)):
        raise ConfigError("weight needs a 'scales' list")
    delta = float(obj.get("delta", 1.0 / 32.0))
    order = obj.get("order", 4)
    parities = tuple(obj["parities"]) if "parities" in obj else None
    bump = (
        make_bump(tuple(float(s) for s in scales), delta, order, parities=parities)
        if parities is not None
        else make_bump(tuple(float(s) for s in scales), delta, order)
    )
    if kind == "entry":
        if len(scales) != 3:
            raise ConfigError("entry weight needs three scales")
        weight = KernelWeight(bump)
        if "skews" in obj:
            r1, r2 = (float(s) for s in obj["skews"])
            weight = weight.skewed(r1, r2)
        return weight
    if kind == "chart":
        if len(scales) != 2:
            raise ConfigError("chart weight needs two scales")
        if "skews" in obj:
            raise ConfigError("chart weights do not take skews")
        return IwasawaWeight(bump)
    raise ConfigError(f"unknown weight kind {kind!r}")


def _lattice_query(cfg: dict) -> LatticeQuery:
    q = cfg.get("q")
    if q is None:
        raise ConfigError("missing required key 'q'")
    ball_keys = {"ball_u", "ball_r"} & set(cfg)
    box_keys = {"bound", "bound_b", "bound_c", "bound_d"} & set(cfg)
    if ball_keys and box_keys:
        raise ConfigError("choose either ball (--ball-u) or box (--bound) selection")
    if "ball_u" in cfg:
        return LatticeQuery.ball(int(q), float(cfg["ball_u"]), float(cfg.get("ball_r", 1.0)))
    if "bound" not in cfg:
        raise ConfigError("missing selection: provide --ball-u or --bound")
    return LatticeQuery.box(
        int(q),
        float(cfg["bound"]),
        bound_b=cfg.get("bound_b"),
        bound_c=cfg.get("bound_c"),
        bound_d=cfg.get("bound_d"),
    )


# --- figures ----------------------------------------------------------------


def _figure_path(run: _Run) -> Path:
    return run.output.with_suffix(".png")


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def _render_table_figure(run: _Run, rows: Sequence[dict]) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["l1"], row["l2"]), []).append(row)
    for (l1, l2), entries in sorted(groups.items()):
        xs = range(len(entries))
        ax.plot(xs, [e["re"] for e in entries], marker="o", label=f"re, types ({l1},{l2})")
        ax.plot(
            xs,
            [e["im"] for e in entries],
            marker="x",
            linestyle="--",
            label=f"im, types ({l1},{l2})",
        )
    ax.set_xlabel("spectral parameter index")
    ax.set_ylabel("transform value")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = _figure_path(run)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    run.artifacts.append(str(path))


def _render_experiment_figure(run: _Run, payload: dict) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    lhs = math.hypot(payload["lhs_re"], payload["lhs_im"])
    ax.bar(["|lhs|", "rhs"], [lhs, payload["rhs"]], color=["tab:blue", "tab:orange"])
    ax.set_ylabel("pairing magnitude")
    ax.set_title(f"ratio = {payload['ratio']:.6g}")
    fig.tight_layout()
    path = _figure_path(run)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    run.artifacts.append(str(path))


def _render_majorant_figure(run: _Run, kernel) -> None:
    import numpy as np

    plt = _pyplot()
    u = (np.cosh(kernel.rho_nodes) - 1.0) / 2.0
    envelope = np.asarray(kernel.line_values) * np.sqrt(1.0 + u)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(u, envelope, label="k(a_u) sqrt(1+u)")
    ax.axhline(kernel.bound_constant, color="tab:red", linestyle="--", label="fitted C")
    ax.set_xscale("symlog", linthresh=1.0)
    ax.set_xlabel("u")
    ax.set_ylabel("envelope")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = _figure_path(run)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    run.artifacts.append(str(path))


# --- subcommand handlers ----------------------------------------------------


def _handle_convert(run: _Run) -> tuple[str, int]:
    cfg = run.command_cfg()
    given = [key for key in ("entries", "iwasawa", "cartan") if key in cfg]
    if len(given) != 1:
        raise ConfigError("convert needs exactly one of entries | iwasawa | cartan")
    if given[0] == "entries":
        g = _group_element(cfg["entries"], "entries")
    elif given[0] == "iwasawa":
        rec = _record(cfg["iwasawa"], ("x", "y", "theta"), "iwasawa")
        g = from_iwasawa(IwasawaCoord(rec["x"], rec["y"], rec["theta"]))
    else:
        rec = _record(cfg["cartan"], ("phi", "u", "vartheta"), "cartan")
        g = from_cartan(CartanCoord(rec["phi"], rec["u"], rec["vartheta"]))
    iw = to_iwasawa(g)
    ca = to_cartan(g)
    payload = {
        "entries": g.to_json(),
        "iwasawa": {"x": iw.x, "y": iw.y, "theta": iw.theta},
        "cartan": {"phi": ca.phi, "u": ca.u, "vartheta": ca.vartheta},
    }
    return _report_text(payload, run.fmt), 0


def _handle_enumerate(run: _Run) -> tuple[str, int]:
    query = _lattice_query(run.command_cfg())
    records = [m.to_json() for m in enumerate_gamma0(query)]
    if run.fmt == "json":
        return _json_lines(records), 0
    return _csv_text(("a", "b", "c", "d"), records), 0


def _handle_count(run: _Run) -> tuple[str, int]:
    query = _lattice_query(run.command_cfg())
    summary = count_gamma0(query)
    payload = {
        "total": summary.total,
        "b0": summary.b0,
        "c0": summary.c0,
        "bc": summary.bc,
    }
    return _report_text(payload, run.fmt), 0


def _handle_harmonic(run: _Run) -> tuple[str, int]:
    cfg = run.command_cfg()
    for key in ("l1", "l2", "nu", "u"):
        if key not in cfg:
            raise ConfigError(f"missing required key {key!r}")
    param = _spectral_parameter(_parse_nu(cfg["nu"]), cfg.get("kind", "auto"))
    value = complex(p_normalized(float(cfg["u"]), param, int(cfg["l1"]), int(cfg["l2"])))
    if run.fmt == "csv":
        return _csv_text(("re", "im"), [{"re": value.real, "im": value.imag}]), 0
    if value.imag == 0.0:
        return json.dumps(value.real) + "\n", 0
    return _json_text({"re": value.real, "im": value.imag}), 0


def _handle_transform_table(run: _Run) -> tuple[str, int]:
    cfg = run.command_cfg()
    field_obj, cap = _field_from_config(cfg.get("field"))
    if "params" not in cfg or "pairs" not in cfg:
        raise ConfigError("transform-table needs 'params' and 'pairs'")
    params = _params_from_config(cfg["params"])
    pairs = _pairs_from_config(cfg["pairs"])
    hint = RadialSupport(float(cfg.get("u_max", cap)))
    rows = transform_rows(field_obj, params, pairs, hint, run.spec)
    if run.output is not None:
        _render_table_figure(run, rows)
    if run.fmt == "json":
        return _json_text(rows), 0
    return _csv_text(_TABLE_COLUMNS, rows), 0


def _kernel_inputs(run: _Run):
    cfg = run.command_cfg()
    q = cfg.get("q")
    if q is None:
        raise ConfigError("missing required key 'q'")
    if "weight" not in cfg:
        raise ConfigError("missing required key 'weight'")
    q = int(q)
    chi = character_from_config(q, cfg.get("chi"))
    weight = _weight_from_config(cfg["weight"])
    tau1 = _group_element(cfg["tau1"], "tau1") if "tau1" in cfg else None
    tau2 = _group_element(cfg["tau2"], "tau2") if "tau2" in cfg else None
    return weight, q, chi, tau1, tau2


def _handle_kernel_sum(run: _Run) -> tuple[str, int]:
    weight, q, chi, tau1, tau2 = _kernel_inputs(run)
    value, enumerated, kept = automorphic_kernel(
        weight, q, chi, tau1, tau2, full_output=True
    )
    payload = {
        "lhs_re": value.real,
        "lhs_im": value.imag,
        "rhs": None,
        "ratio": None,
        "counts": {"enumerated": enumerated, "kept": kept},
        "err_est": 0.0,
    }
    return _report_text(payload, run.fmt), 0


def _handle_discrepancy(run: _Run) -> tuple[str, int]:
    weight, q, chi, tau1, tau2 = _kernel_inputs(run)
    value = discrepancy(weight, q, chi, tau1, tau2, run.spec)
    _, enumerated, kept = automorphic_kernel(weight, q, chi, tau1, tau2, full_output=True)
    mt = main_term(weight, q, chi, run.spec)
    rhs = abs(mt)
    payload = {
        "lhs_re": value.real,
        "lhs_im": value.imag,
        "rhs": rhs,
        "ratio": abs(value) / rhs if rhs > 0.0 else None,
        "counts": {"enumerated": enumerated, "kept": kept},
        "err_est": run.spec.rel_tol * max(abs(value), rhs),
    }
    return _report_text(payload, run.fmt), 0


def _handle_experiment(run: _Run) -> tuple[str, int]:
    report = theorem_experiment(run.command_cfg(), run.spec)
    payload = report.to_json()
    run.constants["experiment_ratio"] = payload["ratio"]
    if run.output is not None:
        _render_experiment_figure(run, payload)
    return _report_text(payload, run.fmt), 0


def _handle_kinv_experiment(run: _Run) -> tuple[str, int]:
    report = kinvariant_experiment(run.command_cfg(), run.spec)
    payload = report.to_json()
    run.constants["experiment_ratio"] = payload["ratio"]
    if run.output is not None:
        _render_experiment_figure(run, payload)
    return _report_text(payload, run.fmt), 0


def _majorant_rows(params, check_report, exceptional_report) -> list[dict]:
    kinds = {}
    for param in params:
        kinds[complex(param.nu)] = param.kind
    rows = []
    for row in check_report.rows:
        rows.append(
            {
                "nu_kind": kinds.get(complex(row["nu"]), "principal"),
                "nu": str(row["nu"]),
                "l1": row["ell"],
                "l2": row["ell"],
                "re": row["square_side"],
                "im": 0.0,
                "err_est": row["violation"],
            }
        )
    if exceptional_report is not None:
        for row in exceptional_report.table:
            rows.append(
                {
                    "nu_kind": "exceptional",
                    "nu": str(complex(row["nu"])),
                    "l1": row["ell"],
                    "l2": row["ell"],
                    "re": row["value"],
                    "im": 0.0,
                    "err_est": 0.0,
                }
            )
    return rows


def _handle_majorant(run: _Run) -> tuple[str, int]:
    cfg = run.command_cfg()
    if "z" not in cfg:
        raise ConfigError("missing required key 'z'")
    z = float(cfg["z"])
    nodes = int(cfg.get("nodes", 513))
    params = _params_from_config(
        cfg.get(
            "params",
            [
                {"kind": "principal", "t": 0.0},
                {"kind": "principal", "t": 1.0},
                {"kind": "exceptional", "nu": 0.25},
            ],
        )
    )
    ells = [int(l) for l in cfg.get("ells", (0, 2))]
    if ("level" in cfg) != ("eta" in cfg):
        raise ConfigError("exceptional certificate needs both 'level' and 'eta'")

    kernel = majorant_kernel(z, run.spec, nodes)
    check = spectral_positivity_check(RadialBump(z), params, ells, run.spec, nodes)
    exceptional = None
    if "level" in cfg:
        exceptional = exceptional_kernel(
            z, int(cfg["level"]), float(cfg["eta"]), run.spec, nodes=nodes
        )
        if exceptional.min_table_entry < -1e-8 or exceptional.subgrid_points > 0:
            raise CertificationFailure(
                "exceptional window table is not certified nonnegative: "
                f"min entry {exceptional.min_table_entry:.3e}, "
                f"{exceptional.subgrid_points} subgrid dips"
            )
    certificates = {
        "C_maj": kernel.bound_constant,
        "c_maj": kernel.support_constant,
        "c0": exceptional.c0 if exceptional is not None else None,
        "grid": {
            "nodes": nodes,
            "u_max": kernel.u_max,
            "rho_max": float(kernel.rho_nodes[-1]),
        },
        "max_violation": check.max_violation,
    }
    run.constants.update(
        {"C_maj": certificates["C_maj"], "c_maj": certificates["c_maj"], "c0": certificates["c0"]}
    )
    rows = _majorant_rows(params, check, exceptional)
    if run.output is not None:
        table_path = run.output.with_name(run.output.stem + "_table.csv")
        table_path.write_text(_csv_text(_TABLE_COLUMNS, rows))
        run.artifacts.append(str(table_path))
        _render_majorant_figure(run, kernel)
    if run.fmt == "csv":
        return _csv_text(_TABLE_COLUMNS, rows), 0
    return _json_text(certificates), 0


def _handle_verify(run: _Run) -> tuple[str, int]:
    suite = run.command_cfg().get("suite", "all")
    report = run_suite(suite, seed=run.seed, spec=run.spec)
    if run.fmt == "csv":
        rows = report.to_json()["checks"]
        text = _csv_text(("check", "invariant", "residual", "tolerance", "status"), rows)
    else:
        text = _json_text(report.to_json())
    return text, 0 if report.passed else 2


_HANDLERS = {
    "convert": _handle_convert,
    "enumerate": _handle_enumerate,
    "count": _handle_count,
    "harmonic": _handle_harmonic,
    "transform-table": _handle_transform_table,
    "kernel-sum": _handle_kernel_sum,
    "discrepancy": _handle_discrepancy,
    "experiment": _handle_experiment,
    "kinv-experiment": _handle_kinv_experiment,
    "majorant": _handle_majorant,
    "verify": _handle_verify,
}


# --- manifest and dispatch --------------------------------------------------


def _config_digest(run: _Run) -> str:
    identity = {
        "command": run.command,
        "config": run.command_cfg(),
        "seed": run.seed,
        "format": run.fmt,
        "tolerances": {
            "rel_tol": run.spec.rel_tol,
            "abs_tol": run.spec.abs_tol,
            "max_panels": run.spec.max_panels,
            "panel_order": run.spec.panel_order,
        },
    }
    blob = json.dumps(identity, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def _manifest(run: _Run, wall_time: float, exit_code: int) -> dict:
    constants = {
        "kappa_bruhat": KAPPA_BRUHAT,
        "envelope_limit": ENVELOPE_LIMIT,
        "derivative_margin": DERIVATIVE_MARGIN,
        "spectral_gap": SPECTRAL_GAP_DEFAULT,
    }
    constants.update(run.constants)
    return {
        "command": run.command,
        "config": run.command_cfg(),
        "config_sha256": _config_digest(run),
        "library_version": __version__,
        "seed": run.seed,
        "threads": run.threads,
        "format": run.fmt,
        "tolerances": {
            "rel_tol": run.spec.rel_tol,
            "abs_tol": run.spec.abs_tol,
            "max_panels": run.spec.max_panels,
            "panel_order": run.spec.panel_order,
        },
        "constants": constants,
        "wall_time_s": wall_time,
        "exit_code": exit_code,
        "artifacts": run.artifacts,
    }


def _dispatch(args: argparse.Namespace) -> int:
    cfg = _merge_config(args.command, args)
    output = Path(cfg["output"]) if "output" in cfg else None
    run = _Run(
        command=args.command,
        cfg=cfg,
        fmt=cfg.get("format") or _DEFAULT_FORMAT.get(args.command, "json"),
        output=output,
        seed=int(cfg.get("seed", 0)),
        threads=int(cfg.get("threads", os.environ.get(THREAD_ENV, "1"))),
        spec=_quadrature_spec(cfg),
    )
    if run.output is not None:
        run.output.parent.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    payload_text, exit_code = _HANDLERS[args.command](run)
    wall_time = time.perf_counter() - start

    if run.output is not None:
        run.output.write_text(payload_text)
        run.artifacts.insert(0, str(run.output))
        manifest_path = run.output.with_name(run.output.name + ".manifest.json")
        manifest_path.write_text(_json_text(_manifest(run, wall_time, exit_code)))
        for path in (*run.artifacts, str(manifest_path)):
            sys.stderr.write(f"wrote {path}\n")
    else:
        sys.stdout.write(payload_text)
        sys.stderr.write(json.dumps(_manifest(run, wall_time, exit_code), sort_keys=True) + "\n")
    return exit_code


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
        return _dispatch(args)
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return 1
    except (
        BadHint,
        ChartSingularity,
        CoprimalityError,
        DomainError,
        NotInGroup,
        ParityError,
        SmallCell,
    ) as exc:
        sys.stderr.write(f"invalid request: {exc}\n")
        return 1
    except CertificationFailure as exc:
        sys.stderr.write(f"certification failure: {exc}\n")
        return 2
    except (NonConvergence, OverflowGuard) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
