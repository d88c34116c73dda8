"""Command-line front end: subcommand dispatch, config parsing, file output.

Subcommands: theta, moments, cphi, apply, study.  CSV tables carry a
comment line with the SHA-256 hash of the effective config so sweeps are
traceable; all files are written atomically (temp file + rename).

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 study FAIL.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .constants import c_phi_fourier, c_phi_measured, c_phi_radial
from .moments import cube_moment, sin2_moment
from .operators import (
    apply_linearized_boltzmann,
    apply_linearized_landau,
    apply_noncutoff_boltzmann,
    get_test_function,
)
from .potential import Potential
from .quad import DEFAULT_SPEC, NonConvergenceError, QuadSpec
from .scattering import born_angle, deflection_angle, deflection_angle_ode, r_min
from .studies import (
    angle_bound_study,
    coulomb_log_study,
    grazing_study,
    hard_potential_study,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_STUDY_FAIL = 4


class ConfigError(ValueError):
    """Invalid or unknown configuration content."""


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    potential: Potential
    quad: QuadSpec
    params: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    seed: int | None = None
    threads: int = 1

    def to_dict(self):
        pot = {"s": self.potential.s, "kind": self.potential.kind,
               "f0": self.potential.f0}
        if self.potential.kind != "pure_power":
            pot["q"] = self.potential.q
        if self.potential.kind == "scaled_bump":
            pot["eps_scale"] = self.potential.eps_scale
        return {
            "potential": pot,
            "quad": asdict(self.quad),
            "study": dict(self.params),
            "output": dict(self.output),
            "seed": self.seed,
            "threads": self.threads,
        }

    def serialize(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _potential_from_dict(d, context="potential"):
    if not isinstance(d, dict):
        raise ConfigError(f"{context} must be an object")
    allowed = {"s", "kind", "f", "f0", "q", "eps_scale"}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)}")
    if "s" not in d:
        raise ConfigError(f"{context}: missing required key 's'")
    s = d["s"]
    if not isinstance(s, (int, float)) or s < 0:
        raise ConfigError(f"{context}: s must be >= 0")
    fdesc = d.get("f", {})
    if not isinstance(fdesc, dict):
        raise ConfigError(f"{context}.f must be an object")
    f_unknown = set(fdesc) - {"kind", "f0", "q"}
    if f_unknown:
        raise ConfigError(f"{context}.f: unknown keys {sorted(f_unknown)}")
    kind = d.get("kind", fdesc.get("kind", "poly_bump"))
    f0 = d.get("f0", fdesc.get("f0", 1.0))
    q = d.get("q", fdesc.get("q", 2))
    if not isinstance(f0, (int, float)) or f0 <= 0:
        raise ConfigError(f"{context}: f0 must be > 0")
    if not isinstance(q, int) or isinstance(q, bool):
        raise ConfigError(f"{context}: q must be an integer")
    try:
        if kind == "scaled_bump":
            return Potential.scaled_bump(
                float(s), eps_scale=float(d["eps_scale"]), f0=float(f0), q=q
            )
        return Potential(s=float(s), kind=kind, f0=float(f0), q=q)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def _quad_from_dict(d):
    if not isinstance(d, dict):
        raise ConfigError("quad must be an object")
    valid = {f.name for f in fields(QuadSpec)}
    unknown = set(d) - valid
    if unknown:
        raise ConfigError(f"quad: unknown keys {sorted(unknown)}")
    try:
        return QuadSpec(**{**asdict(DEFAULT_SPEC), **d})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"quad: {exc}") from exc


def parse_config(text):
    """Validate a JSON config document into a RunConfig.

    Accepts either a nested {"potential": {...}} object or the shorthand
    with "s"/"f" at the top level.  Unknown keys are rejected with the
    offending key named.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")

    allowed = {"potential", "s", "f", "quad", "study", "output", "seed", "threads"}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    if "potential" in doc and ("s" in doc or "f" in doc):
        raise ConfigError("give either 'potential' or top-level 's'/'f', not both")

    if "potential" in doc:
        pot = _potential_from_dict(doc["potential"])
    else:
        pot = _potential_from_dict(
            {"s": doc.get("s"), "f": doc.get("f", {})}
            if "s" in doc
            else {},
        )

    quad = _quad_from_dict(doc.get("quad", {}))
    seed = doc.get("seed")
    if seed is not None:
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError("seed must be an integer")
        quad = QuadSpec(**{**asdict(quad), "rng_seed": seed})
    threads = doc.get("threads", 1)
    if not isinstance(threads, int) or threads < 1:
        raise ConfigError("threads must be a positive integer")

    params = doc.get("study", {})
    if not isinstance(params, dict):
        raise ConfigError("study must be an object")
    output = doc.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output must be an object")
    return RunConfig(
        potential=pot, quad=quad, params=params, output=output,
        seed=seed, threads=threads,
    )


def config_hash(cfg):
    return hashlib.sha256(cfg.serialize().encode()).hexdigest()


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def atomic_write(path, text):
    """Write text to path via a temp file in the same directory + rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-grazing-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text, path):
    if path:
        atomic_write(path, text)
    else:
        sys.stdout.write(text)


def _csv_table(header, rows, cfg):
    buf = io.StringIO()
    buf.write(f"# config-hash: {config_hash(cfg)}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _parse_floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _potential_from_args(args):
    return _potential_from_dict(
        {"s": args.s, "kind": args.kind, "f0": args.f0, "q": args.q},
        context="potential flags",
    )


def _cmd_theta(args):
    p = _potential_from_args(args)
    cfg = RunConfig(
        potential=p,
        quad=DEFAULT_SPEC,
        params={
            "rho": args.rho, "kappa": args.kappa, "ode_tol": args.ode_tol,
        },
        threads=args.threads,
    )
    rows = []
    for rho in _parse_floats(args.rho):
        for kappa in _parse_floats(args.kappa):
            tq = deflection_angle(p, rho, kappa, cfg.quad)
            if rho > 0.0 and kappa > 0.0:
                to, _ = deflection_angle_ode(p, rho, kappa, args.ode_tol)
            else:
                to = 0.0
            tb = born_angle(p, rho, kappa).value if rho > 0.0 else float("nan")
            rm = r_min(p, rho, kappa) if (rho, kappa) != (0.0, 0.0) else 0.0
            rows.append(
                (p.s, p.kind, rho, kappa, tq, to, tb, rm, abs(tq - to))
            )
    text = _csv_table(
        ["s", "f_kind", "rho", "kappa", "theta_quad", "theta_ode",
         "theta_born", "r_min", "err_est"],
        rows,
        cfg,
    )
    _emit(text, args.out)
    print(f"theta: {len(rows)} rows", file=sys.stderr)
    return EXIT_OK


def _cmd_moments(args):
    p = _potential_from_args(args)
    cfg = RunConfig(
        potential=p, quad=DEFAULT_SPEC, params={"kappa": args.kappa},
        threads=args.threads,
    )
    c_ref = c_phi_radial(p, cfg.quad).value if p.s <= 1.0 else float("nan")
    rows = []
    for kappa in _parse_floats(args.kappa):
        s2 = sin2_moment(p, kappa, cfg.quad)
        c3 = cube_moment(p, kappa, cfg.quad)
        ratio = s2 / (kappa * kappa * c_ref) if kappa > 0 and c_ref else float("nan")
        logk = abs(np.log(kappa)) if 0 < kappa < 1 else float("nan")
        clog = s2 / (kappa * kappa * logk) if kappa > 0 else float("nan")
        rows.append((p.s, kappa, s2, c3, ratio, clog))
    text = _csv_table(
        ["s", "kappa", "sin2_moment", "cube_moment", "ratio_to_asymptotic",
         "coulomb_log_ratio"],
        rows,
        cfg,
    )
    _emit(text, args.out)
    print(f"moments: {len(rows)} rows", file=sys.stderr)
    return EXIT_OK


def _cmd_cphi(args):
    p = _potential_from_args(args)
    spec = DEFAULT_SPEC
    radial = c_phi_radial(p, spec)
    fourier = c_phi_fourier(p, spec)
    measured = c_phi_measured(p, spec)
    agreement = abs(radial.value - fourier.value) / max(
        abs(radial.value), abs(fourier.value), 1e-300
    )
    doc = {
        "s": p.s,
        "radial": radial.value,
        "fourier": fourier.value,
        "measured_coefficient": measured.value,
        "agreement": agreement,
    }
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    print(f"cphi: s={p.s} agreement={agreement:.2e}", file=sys.stderr)
    return EXIT_OK


def _cmd_apply(args):
    p = _potential_from_args(args)
    psi = get_test_function(args.psi)
    v1 = _parse_floats(args.v1)
    if len(v1) != 3:
        raise ConfigError("--v1 must be three comma-separated numbers")
    spec = DEFAULT_SPEC
    if args.op == "boltzmann":
        res = apply_linearized_boltzmann(psi, v1, args.eps, p, spec)
    elif args.op == "landau":
        res = apply_linearized_landau(psi, v1, spec)
    else:
        hom = Potential.pure_power(p.s, f0=p.f0)
        res = apply_noncutoff_boltzmann(psi, v1, hom, args.rho_max, spec)
    doc = {
        "value": res.value,
        "error_estimate": res.error_estimate,
        "breakdown": res.breakdown,
    }
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    print(f"apply {args.op}: value={res.value:.6e}", file=sys.stderr)
    return EXIT_OK


_STUDY_DEFAULTS = {
    "grazing": {
        "psi": "gaussian",
        "v1_grid": [[0.0, 0.0, 0.0]],
        "eps_schedule": [1e-1, 1e-2, 1e-3, 1e-4],
    },
    "hard": {
        "psi": "gaussian",
        "v1_grid": [[0.0, 0.0, 0.0]],
        "eps_schedule": [1e-2, 1e-3, 1e-4],
        "rho_max": 400.0,
    },
    "coulomb-log": {
        "kappa_schedule": [1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
    },
    "angle-bound": {
        "eps_schedule": [1e-2, 1e-3, 1e-4],
        "rho_grid": [0.2, 0.4, 0.7],
        "v_rel": 3.0,
    },
}


def _cmd_study(args):
    if args.config:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    else:
        cfg = RunConfig(potential=Potential(s=args.s), quad=DEFAULT_SPEC)
    params = {**_STUDY_DEFAULTS[args.kind], **cfg.params}
    p = cfg.potential
    spec = cfg.quad

    if args.kind == "grazing":
        psi = get_test_function(params["psi"])
        report = grazing_study(
            p, psi, params["v1_grid"], params["eps_schedule"], spec
        )
    elif args.kind == "hard":
        psi = get_test_function(params["psi"])
        report = hard_potential_study(
            p, psi, params["v1_grid"], params["eps_schedule"],
            params["rho_max"], spec,
        )
    elif args.kind == "coulomb-log":
        report = coulomb_log_study(p, params["kappa_schedule"], spec)
    else:
        report = angle_bound_study(
            p.s, params["eps_schedule"], params["rho_grid"], spec,
            v_rel=params.get("v_rel", 3.0),
        )

    json_path = cfg.output.get("json") or args.out
    csv_path = cfg.output.get("csv")
    _emit(report.to_json() + "\n", json_path)
    if csv_path:
        if report.records:
            keys = sorted({k for rec in report.records for k in rec})
            rows = [tuple(rec.get(k, "") for k in keys) for rec in report.records]
        else:
            keys, rows = ["empty"], []
        atomic_write(csv_path, _csv_table(keys, rows, cfg))
    status = "PASS" if report.passed else "FAIL"
    print(
        f"study {args.kind}: {status}"
        + (f" ({'; '.join(report.failures)})" if report.failures else ""),
        file=sys.stderr,
    )
    return EXIT_OK if report.passed else EXIT_STUDY_FAIL


# ---------------------------------------------------------------------------
# Argument parsing and dispatch
# ---------------------------------------------------------------------------


def _add_potential_flags(sub):
    sub.add_argument("--s", type=float, required=True, help="singularity order")
    sub.add_argument(
        "--kind", default="poly_bump",
        choices=["poly_bump", "pure_power", "scaled_bump"],
    )
    sub.add_argument("--f0", type=float, default=1.0)
    sub.add_argument("--q", type=int, default=2)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="grazing",
        description="Scattering, collision operators and grazing-limit studies",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("GRAZING_THREADS", "1")),
        help="worker cap; evaluation is single-threaded, N=1 is the "
        "bit-exact reference",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("theta", help="deflection-angle table")
    _add_potential_flags(sp)
    sp.add_argument("--rho", required=True, help="comma-separated impact parameters")
    sp.add_argument("--kappa", required=True, help="comma-separated couplings")
    sp.add_argument("--ode-tol", type=float, default=1e-10)
    sp.add_argument("--out", default=None)
    sp.set_defaults(handler=_cmd_theta)

    sp = subs.add_parser("moments", help="collision-kernel moment table")
    _add_potential_flags(sp)
    sp.add_argument("--kappa", required=True)
    sp.add_argument("--out", default=None)
    sp.set_defaults(handler=_cmd_moments)

    sp = subs.add_parser("cphi", help="diffusion constant by both routes")
    _add_potential_flags(sp)
    sp.add_argument("--out", default=None)
    sp.set_defaults(handler=_cmd_cphi)

    sp = subs.add_parser("apply", help="evaluate an operator on a test function")
    _add_potential_flags(sp)
    sp.add_argument("--op", required=True, choices=["boltzmann", "landau", "noncutoff"])
    sp.add_argument("--psi", required=True)
    sp.add_argument("--v1", default="0,0,0")
    sp.add_argument("--eps", type=float, default=1e-2)
    sp.add_argument("--rho-max", type=float, default=400.0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(handler=_cmd_apply)

    sp = subs.add_parser("study", help="run a convergence study")
    sp.add_argument(
        "--kind", required=True,
        choices=["grazing", "hard", "coulomb-log", "angle-bound"],
    )
    sp.add_argument("--config", default=None, help="JSON config path")
    sp.add_argument("--s", type=float, default=0.5, help="used without --config")
    sp.add_argument("--out", default=None, help="JSON report path")
    sp.set_defaults(handler=_cmd_study)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
