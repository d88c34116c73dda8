"""Acceptance gate: ten numbered criteria, one printed PASS/FAIL line each.

Run with plain pytest; the verdict lines bypass output capture so they are
visible in any mode.  Each criterion states its tolerance inline.
"""

import json
import math

import numpy as np
import pytest

from grazing.cli import run as cli_run
from grazing.constants import c_phi_fourier, c_phi_measured, c_phi_radial
from grazing.moments import sin2_moment
from grazing.operators import (
    apply_linearized_boltzmann,
    apply_linearized_landau,
    get_test_function,
    quadratic_form,
)
from grazing.potential import Potential
from grazing.scattering import born_angle, deflection_angle, deflection_angle_ode, r_min
from grazing.studies import grazing_study, hard_potential_study


def _verdict(capsys, number, name, ok, detail=""):
    line = f"criterion {number:2d} {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  ({detail})"
    with capsys.disabled():
        print(line, flush=True)
    assert ok, line


def test_criterion_01_scattering_oracle_equivalence(capsys):
    worst = 0.0
    for s in (0.0, 0.5, 1.0, 1.5, 2.0):
        p = Potential.poly_bump(s)
        for rho in (0.1, 0.3, 0.5, 0.7, 0.9):
            for kappa in (1e-3, 1e-2, 1e-1):
                tq = deflection_angle(p, rho, kappa)
                to, _ = deflection_angle_ode(p, rho, kappa)
                worst = max(worst, abs(tq - to))
    _verdict(capsys, 1, "quadrature vs ODE deflection", worst <= 1e-6,
             f"max |diff| = {worst:.2e}")


def test_criterion_02_coulomb_closed_forms(capsys):
    worst = 0.0
    for f0 in (1.0, 1.5):
        p = Potential.pure_power(1.0, f0=f0)
        for rho in (0.1, 0.5, 2.0):
            for kappa in (1e-3, 1e-2, 1e-1):
                exact_rm = kappa * f0 + math.sqrt((kappa * f0) ** 2 + rho**2)
                got_rm = r_min(p, rho, kappa)
                worst = max(worst, abs(got_rm - exact_rm) / exact_rm)
                exact_born = 2.0 * kappa * f0 / rho
                got_born = born_angle(p, rho, kappa).value
                worst = max(worst, abs(got_born - exact_born) / exact_born)
    _verdict(capsys, 2, "Coulomb r_min and Born closed forms", worst <= 1e-10,
             f"max rel diff = {worst:.2e}")


def test_criterion_03_cphi_identity(capsys):
    worst = 0.0
    for s in (0.0, 0.25, 0.5, 0.75):
        p = Potential.poly_bump(s)
        radial = c_phi_radial(p).value
        fourier = c_phi_fourier(p).value
        worst = max(worst, abs(radial - fourier) / abs(radial))
    _verdict(capsys, 3, "radial vs Fourier diffusion constant", worst <= 1e-4,
             f"max rel diff = {worst:.2e}")


def test_criterion_04_coulomb_log_onset(capsys):
    p = Potential.poly_bump(1.0)
    kappas = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
    ratios = [
        sin2_moment(p, k) / (k * k * abs(math.log(k))) for k in kappas
    ]
    diffs = [abs(b - a) for a, b in zip(ratios, ratios[1:])]
    # average shrink factor per decade across the schedule
    shrink = (diffs[0] / diffs[-1]) ** (1.0 / (len(diffs) - 1))
    one = c_phi_measured(Potential.poly_bump(1.0, f0=1.0)).value
    two = c_phi_measured(Potential.poly_bump(1.0, f0=2.0)).value
    amp_ratio = two / one
    decisive = abs(amp_ratio - 4.0) <= 0.4 or abs(amp_ratio - 2.0) <= 0.2
    ok = shrink >= 1.5 and decisive
    _verdict(capsys, 4, "Coulomb log onset and amplitude question", ok,
             f"shrink/decade = {shrink:.3f}, f0-doubling ratio = {amp_ratio:.3f}")


def test_criterion_05_collision_invariants(capsys):
    p = Potential.poly_bump(0.5)
    v1_points = [
        (0.0, 0.0, 0.0),
        (1.0, 0.0, 0.0),
        tuple(np.ones(3) / math.sqrt(3.0)),
    ]
    worst = 0.0
    ok = True
    for name in ("one", "vx", "vy", "vz", "speed2"):
        psi = get_test_function(name)
        for v1 in v1_points:
            for eps in (1e-1, 1e-3):
                bol = apply_linearized_boltzmann(psi, v1, eps, p)
                ok &= abs(bol.value) <= 10.0 * bol.error_estimate
                worst = max(worst, abs(bol.value))
            lan = apply_linearized_landau(psi, v1)
            ok &= abs(lan.value) <= 10.0 * lan.error_estimate
            worst = max(worst, abs(lan.value))
    _verdict(capsys, 5, "collision invariants annihilated", ok,
             f"max |residual| = {worst:.2e}")


def test_criterion_06_grazing_limit_rate(capsys):
    psi = get_test_function("gaussian")
    origin = [(0.0, 0.0, 0.0)]
    schedule = [1e-1, 1e-2, 1e-3, 1e-4]
    details = []
    ok = True
    for s in (0.5, 1.0):
        report = grazing_study(Potential.poly_bump(s), psi, origin, schedule)
        errs = [rec["err"] for rec in report.records]
        ok &= all(b < a for a, b in zip(errs, errs[1:]))
        ok &= errs[-1] <= errs[0] / 3.0
        details.append(f"s={s}: err {errs[0]:.3f} -> {errs[-1]:.4f}")
        if s == 1.0:
            ablation = [rec["err_no_log"] for rec in report.records]
            ok &= all(b > a for a, b in zip(ablation, ablation[1:]))
            details.append("ablation increasing")
    _verdict(capsys, 6, "diffusion limit error decay", ok, "; ".join(details))


def test_criterion_07_scale_identity(capsys):
    psi = get_test_function("gaussian")
    p = Potential.poly_bump(2.0)
    worst = 0.0
    for eps in (1e-2, 1e-4):
        lhs = apply_linearized_boltzmann(psi, (0.0, 0.0, 0.0), eps, p)
        scaled = lhs.value * eps ** (-1.0)
        stretched = Potential.scaled_bump(2.0, eps_scale=math.sqrt(eps))
        rhs = apply_linearized_boltzmann(psi, (0.0, 0.0, 0.0), 1.0, stretched)
        worst = max(worst, abs(scaled - rhs.value) / abs(rhs.value))
    _verdict(capsys, 7, "hard-potential rescaling identity", worst <= 1e-8,
             f"max rel diff = {worst:.2e}")


def test_criterion_08_noncutoff_convergence(capsys):
    psi = get_test_function("gaussian")
    report = hard_potential_study(
        Potential.poly_bump(2.0), psi, [(0.0, 0.0, 0.0)],
        [1e-2, 1e-3, 1e-4, 1e-5], rho_max=400.0,
    )
    errs = [rec["err"] for rec in report.records]
    ok = report.passed and all(b < a for a, b in zip(errs, errs[1:]))
    _verdict(capsys, 8, "non-cutoff limit monotone", ok,
             "err " + " -> ".join(f"{e:.4f}" for e in errs))


def test_criterion_09_quadratic_form_nonpositive(capsys):
    p = Potential.poly_bump(0.5)
    ok = True
    details = []
    for name in ("gaussian", "gaussian_wide", "gaussian_shifted",
                 "sine", "sine_fast"):
        psi = get_test_function(name)
        est = quadratic_form(psi, 1e-2, p)
        ok &= est.value <= 3.0 * est.std_error
        details.append(f"{name}: {est.value:.2e}")
    _verdict(capsys, 9, "quadratic form non-positive", ok, ", ".join(details))


def test_criterion_10_determinism(capsys, tmp_path):
    theta = tmp_path / "theta.csv"
    cphi = tmp_path / "cphi.json"
    cfg = tmp_path / "clog.json"
    csv_out = tmp_path / "clog.csv"
    rep = tmp_path / "clog_report.json"
    cfg.write_text(json.dumps({
        "potential": {"s": 1.0, "kind": "poly_bump"},
        "output": {"csv": str(csv_out)},
    }))

    pairs = []
    for _ in range(2):
        assert cli_run(["--threads", "1", "theta", "--s", "0.5",
                        "--rho", "0.2,0.8", "--kappa", "1e-3,1e-2",
                        "--out", str(theta)]) == 0
        assert cli_run(["--threads", "1", "cphi", "--s", "0.25",
                        "--out", str(cphi)]) == 0
        assert cli_run(["--threads", "1", "study", "--kind", "coulomb-log",
                        "--config", str(cfg), "--out", str(rep)]) == 0
        pairs.append((theta.read_bytes(), cphi.read_bytes(),
                      csv_out.read_bytes(), rep.read_bytes()))
    ok = pairs[0] == pairs[1]
    _verdict(capsys, 10, "byte-identical repeated runs", ok,
             "theta csv, cphi json, study csv+json")
