"""Command-line entry point: ``bridgewobble <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import dde, double_hopf, hopf, output, spectrum
from .model import NormalizedModel, load_scenario

EXIT_OK, EXIT_CHECK_FAILED, EXIT_BAD_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# --- argument helpers ---------------------------------------------------------------


def _linspace(spec: Optional[Sequence[float]]) -> Optional[np.ndarray]:
    if spec is None:
        return None
    lo, hi, n = spec
    if n < 1 or int(n) != n:
        raise InputError("grid size must be a positive integer")
    return np.linspace(lo, hi, int(n))


def _scenario(args) -> Optional[NormalizedModel]:
    if not getattr(args, "scenario", None):
        return None
    try:
        return load_scenario(args.scenario)
    except (ValueError, OSError, TypeError) as exc:
        raise InputError(f"bad scenario {args.scenario!r}: {exc}") from exc


def _alphas(args, need_tau: bool = False) -> tuple[float, float, float, float]:
    """``(alpha2, alpha3, k3, tau)`` from explicit flags, falling back on the scenario."""
    sc = _scenario(args)
    k3 = args.k3 if getattr(args, "k3", None) is not None else (sc.k3 if sc else 1.0)
    a2 = args.alpha2 if args.alpha2 is not None else (sc.alpha2 if sc else None)
    if getattr(args, "alpha3", None) is not None:
        a3 = args.alpha3
    elif getattr(args, "kappa", None) is not None:
        a3 = args.kappa * k3
    else:
        a3 = sc.alpha3 if sc else None
    tau = getattr(args, "tau", None)
    tau = tau if tau is not None else (sc.tau if sc else None)
    if a2 is None or a3 is None:
        raise InputError("give --alpha2 and --alpha3 (or --kappa), or a --scenario")
    if need_tau and tau is None:
        raise InputError("give --tau or a scenario with tau")
    if not (a2 > 0 and a3 > 0 and k3 > 0) or (tau is not None and tau < 0):
        raise InputError("alpha2, alpha3, k3 must be positive and tau non-negative")
    return float(a2), float(a3), float(k3), (float(tau) if tau is not None else None)


class Run:
    """Collects outputs and writes the run manifest."""

    def __init__(self, args, name: str):
        self.args = args
        self.name = name
        self.out = Path(args.out)
        self.outputs: list[str] = []
        self.start = time.perf_counter()

    def path(self, filename: str) -> Path:
        p = self.out / filename
        self.outputs.append(str(p))
        return p

    def table(self, stem: str, header, rows) -> Path:
        if self.args.format == "json":
            return output.write_json(self.path(stem + ".json"), [dict(zip(header, r)) for r in rows])
        return output.write_csv(self.path(stem + ".csv"), header, rows)

    def finish(self, status: int) -> int:
        params = {k: v for k, v in vars(self.args).items() if k not in ("func", "argv")}
        manifest = {
            "subcommand": self.name,
            "argv": self.args.argv,
            "parameters": params,
            "outputs": self.outputs,
            "version": _version(),
            "wall_clock_seconds": round(time.perf_counter() - self.start, 3),
            "exit_status": status,
        }
        output.write_json(self.out / f"manifest-{self.name}.json", manifest)
        return status


# --- subcommands --------------------------------------------------------------------


def cmd_stability(args) -> int:
    run = Run(args, "stability")
    a2_grid, a3_grid = _linspace(args.alpha2_range), _linspace(args.alpha3_range)
    if a2_grid is not None or a3_grid is not None:
        if a2_grid is None or a3_grid is None:
            raise InputError("a chart needs both --alpha2-range and --alpha3-range")
        tau = args.tau if args.tau is not None else 0.0
        rows = _chart(a2_grid, a3_grid, tau, args.workers)
        run.table("stability_chart", ["alpha2", "alpha3", "tau", "region", "stable", "unstable_pairs", "marginal"], rows)
        labels = [[None] * len(a2_grid) for _ in a3_grid]
        for n, row in enumerate(rows):
            i, j = n % len(a3_grid), n // len(a3_grid)
            labels[i][j] = row[3]
        c1 = ("C1: alpha3 = alpha2", a2_grid, a2_grid)
        c2 = ("C2", a2_grid, np.array([spectrum.c2_curve(a) for a in a2_grid]))
        svg = output.svg_region_map(
            a2_grid, a3_grid, labels, "stability partition", "alpha2", "alpha3", curves=[c1, c2]
        )
        output.write_text(run.path("stability_chart.svg"), svg)
        print(f"{len(rows)} cells written to {run.out}")
        return run.finish(EXIT_OK)
    a2, a3, _, tau = _alphas(args)
    taus = _linspace(args.tau_range)
    if taus is not None:
        rows = []
        for t in taus:
            v = spectrum.stability(a2, a3, float(t), cross_check=True)
            rows.append((a2, a3, float(t), v.region, v.stable, v.unstable_root_pairs, v.marginal, v.cross_checked))
        header = ["alpha2", "alpha3", "tau", "region", "stable", "unstable_pairs", "marginal", "cross_checked"]
        run.table("stability_tau_scan", header, rows)
        series = [("unstable pairs", [r[2] for r in rows], [r[5] for r in rows])]
        output.write_text(run.path("stability_tau_scan.svg"), output.svg_lines(series, "unstable pairs", "tau", "pairs"))
        print(f"{len(rows)} delays written to {run.out}")
        return run.finish(EXIT_OK)
    if tau is None:
        raise InputError("give --tau, --tau-range or a chart grid")
    v = spectrum.stability(a2, a3, tau)
    report = {
        "alpha2": a2,
        "alpha3": a3,
        "tau": tau,
        "region": v.region,
        "stable": v.stable,
        "unstable_root_pairs": v.unstable_root_pairs,
        "marginal": v.marginal,
        "stability_windows": [list(w) for w in v.stability_windows],
        "cross_checked": v.cross_checked,
    }
    output.write_json(run.path("stability.json"), report)
    if args.format == "json":
        print(output.dumps(report))
    else:
        state = "marginal" if v.marginal else ("stable" if v.stable else "unstable")
        print(f"{v.region}, {state}")
    return run.finish(EXIT_OK)


def _chart_row(job):
    a2, a3s, tau = job
    return spectrum.stability_chart([a2], a3s, tau)


def _chart(a2s, a3s, tau: float, workers: Optional[int]) -> list[tuple]:
    """Stability chart with one task per ``alpha2`` column; row order is fixed."""
    jobs = [(float(a2), a3s, tau) for a2 in a2s]
    n = dde.worker_count(workers)
    if n == 1 or len(jobs) < 8:
        parts = [_chart_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(n, len(jobs))) as pool:
            parts = list(pool.map(_chart_row, jobs))
    return [row for part in parts for row in part]


def cmd_critical_delays(args) -> int:
    run = Run(args, "critical-delays")
    sc = _scenario(args)
    a2 = args.alpha2 if args.alpha2 is not None else (sc.alpha2 if sc else None)
    if a2 is None or a2 <= 0:
        raise InputError("give a positive --alpha2")
    grid = _linspace(args.alpha3_range) if args.alpha3_range else np.linspace(a2 + 1e-3, a2 + 5.0, 500)
    rows = spectrum.critical_delay_curves(a2, grid, args.j_max)
    run.table("critical_delays", ["alpha3", "branch", "j", "tau", "omega"], rows)
    points = double_hopf.scan_double_hopf(a2, args.j_max, args.j_max)
    lo, hi = float(np.min(grid)), float(np.max(grid))
    points = [p for p in points if lo <= p.alpha30 <= hi]
    ok = True
    prow = []
    for p in points:
        again = double_hopf.find_double_hopf(a2, p.k, p.l, (p.alpha30 - 1e-6, p.alpha30 + 1e-6))
        recheck = abs(again.alpha30 - p.alpha30)
        ok &= recheck < 1e-10 and max(p.residuals) < 1e-8
        prow.append((p.k, p.l, p.alpha30, p.tau0, p.omega1, p.omega2, max(p.residuals), recheck, p.nonresonant))
    header = ["k", "l", "alpha30", "tau0", "omega1", "omega2", "residual", "recheck", "nonresonant"]
    run.table("double_hopf_points", header, prow)
    series = []
    for branch in ("plus", "minus"):
        for j in range(args.j_max + 1):
            sel = [r for r in rows if r[1] == branch and r[2] == j]
            series.append((f"tau_{j}^{'+' if branch == 'plus' else '-'}", [r[0] for r in sel], [r[3] for r in sel]))
    taus = [r[3] for r in rows]
    ymax = min(max(taus), 4.0 * np.median(taus)) if taus else 1.0
    svg = output.svg_lines(
        series, f"critical delays, alpha2={a2:g}", "alpha3", "tau",
        markers=[(p.alpha30, p.tau0) for p in points], ylim=(0.0, ymax),
    )
    output.write_text(run.path("critical_delays.svg"), svg)
    print(f"{len(rows)} curve samples, {len(points)} double-Hopf points written to {run.out}")
    return run.finish(EXIT_OK if ok else EXIT_CHECK_FAILED)


def cmd_hopf(args) -> int:
    run = Run(args, "hopf")
    if args.branch == "resonant":
        sc = _scenario(args)
        a2 = args.alpha2 if args.alpha2 is not None else (sc.alpha2 if sc else None)
        if a2 is None:
            raise InputError("give --alpha2")
        k3 = args.k3 if args.k3 is not None else (sc.k3 if sc else 1.0)
        if args.j < 1:
            raise InputError("the resonant case needs --j >= 1")
        hp = hopf.hopf_in_alpha(a2, args.j, k3=k3, kappa=args.kappa)
        checks = {
            "re_f21_negative": hp.f21.real < 0,
            "slope_positive": hp.dsigma_rescaled > 0,
            "slope_ratio": abs(hp.dsigma_rescaled / -hp.f21.real - 1.0 / (-3.0 * hp.alpha4)) < 1e-12,
        }
        predict = hopf.predicted_cycle_alpha
        default_mus = np.linspace(1e-3, max(hp.mu_max, 2e-3), 50)
    else:
        a2, a3, k3, _ = _alphas(args)
        hp = hopf.hopf_in_tau(a2, a3, args.branch, args.j, k3=k3)
        cross = spectrum.crossing_derivatives(a2, a3, args.branch, args.j)
        checks = {
            "re_f21_negative": hp.f21.real < 0,
            "dc_positive": hp.dc > 0,
            "slope_matches_spectrum": abs(hp.dsigma - cross.dsigma) <= 1e-10,
            "criticality_consistent": (hp.criticality == "supercritical") == (args.branch == "plus"),
        }
        predict = hopf.predicted_cycle_tau
        sign = 1.0 if hp.dsigma > 0 else -1.0
        default_mus = sign * np.linspace(1e-3, hp.mu_max, 50)
    preds = []
    for mu in args.mu or ():
        a, w = predict(hp, mu, warn=True)
        preds.append({"mu": mu, "amplitude": a, "omega": w, "beyond_trust_bound": abs(mu) > hp.mu_max})
    report = {"hopf_point": hp.to_dict(), "predictions": preds, "checks": {k: bool(v) for k, v in checks.items()}}
    output.write_json(run.path("hopf.json"), report)
    curve = hopf.amplitude_curve(hp, default_mus)
    run.table("amplitude_law", ["mu", "amplitude", "omega"], curve.tolist())
    svg = output.svg_lines([("a(mu)", curve[:, 0], curve[:, 1])], f"amplitude law ({hp.case_tag})", "mu", "amplitude")
    output.write_text(run.path("amplitude_law.svg"), svg)
    print(output.dumps(report))
    return run.finish(EXIT_OK if all(checks.values()) else EXIT_CHECK_FAILED)


def cmd_double_hopf(args) -> int:
    run = Run(args, "double-hopf")
    sc = _scenario(args)
    a2 = args.alpha2 if args.alpha2 is not None else (sc.alpha2 if sc else None)
    if a2 is None:
        raise InputError("give --alpha2")
    try:
        pt = double_hopf.find_double_hopf(a2, args.k, args.l, tuple(args.bracket) if args.bracket else None)
    except double_hopf.DoubleHopfNotFound as exc:
        print(f"not found: {exc}", file=sys.stderr)
        return run.finish(EXIT_CHECK_FAILED)
    k3 = args.k3 if args.k3 is not None else 1.0
    u = double_hopf.unfolding(pt, k3=k3, sigma=tuple(args.sigma))
    report = u.to_dict()
    lhs, rhs = double_hopf.im_d_identity(pt)
    report["im_d_identity"] = {"lhs": lhs, "rhs": rhs, "informational": True}
    output.write_json(run.path("double_hopf.json"), report)
    d1, d2 = u.delta
    s = np.linspace(-1.0, 1.0, 81)
    labels = [[_region_or_boundary(a, b, d1, d2) for a in s] for b in s]
    t = np.linspace(0.0, 1.0, 50)
    curves = [("T1: sigma1 = delta1 sigma2", d1 * t, t), ("T2: sigma2 = delta2 sigma1", t, d2 * t)]
    svg = output.svg_region_map(s, s, labels, "amplitude-system regions", "sigma1", "sigma2", curves)
    output.write_text(run.path("sigma_regions.svg"), svg)
    rows = [("H1", 0.0, 0.0, 0.0, 1.0), ("H2", 0.0, 0.0, 1.0, 0.0), ("T1", 0.0, 0.0, d1, 1.0), ("T2", 0.0, 0.0, 1.0, d2)]
    run.table("sigma_boundaries", ["curve", "sigma1_start", "sigma2_start", "sigma1_dir", "sigma2_dir"], rows)
    checks = report["checks"]
    print(output.dumps(report))
    failed = [k for k, v in checks.items() if not v]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
    return run.finish(EXIT_CHECK_FAILED if failed else EXIT_OK)


def _region_or_boundary(s1, s2, d1, d2) -> str:
    if s1 == 0 and s2 == 0:
        return "I"
    return double_hopf.classify_sigma_region(s1, s2, d1, d2)


def _sim_model(args) -> NormalizedModel:
    a2, a3, k3, tau = _alphas(args, need_tau=True)
    return NormalizedModel.from_alphas(a2, a3, k3=k3, tau=tau)


def _seed_frequency(model: NormalizedModel, given: Optional[float]) -> float:
    if given:
        return given
    lam = spectrum.rightmost_root(model.alpha2, model.alpha3, model.tau)
    return abs(lam.imag) or 1.0


def cmd_simulate(args) -> int:
    run = Run(args, "simulate")
    model = _sim_model(args)
    w0 = _seed_frequency(model, args.omega0)
    duration = args.duration or args.periods * 2.0 * math.pi / w0
    transient = args.transient if args.transient is not None else 0.75 * duration
    cfg = dde.SimConfig(
        duration=duration,
        transient=transient,
        history=dde.SinusoidalHistory(args.amplitude, w0),
        steps_per_delay=args.steps_per_delay,
        h=None if model.tau > 0 else 2.0 * math.pi / w0 / args.steps_per_delay,
    )
    try:
        traj = dde.simulate(model, cfg)
    except dde.SimulationDiverged as exc:
        output.write_json(run.path("simulate.json"), {"diverged": True, "t_fail": exc.t, "model": model.to_dict()})
        print(f"diverged at t={exc.t:.6g}", file=sys.stderr)
        return run.finish(EXIT_CHECK_FAILED)
    summary = dde.summarize(traj, transient)
    sec = dde.poincare_section(traj, transient)
    summary.update(
        {
            "model": model.to_dict(),
            "alpha3": model.alpha3,
            "seed_omega": w0,
            "duration": duration,
            "transient": transient,
            "h": traj.h,
            "section_diameter": sec.diameter,
            "section_points": int(len(sec.points)),
        }
    )
    output.write_json(run.path("simulate.json"), summary)
    t, x1, x2 = traj.solution(0.0)
    every = max(1, args.every)
    run.table("trajectory", ["t", "x1", "x2"], zip(t[::every], x1[::every], x2[::every]))
    run.table("section", ["x1", "x2_lagged"], sec.points.tolist())
    tail = t >= max(transient, duration - 20.0 * 2.0 * math.pi / w0)
    svg = output.svg_lines([("x1", t[tail], x1[tail])], "displacement after transient", "t", "x1")
    output.write_text(run.path("trajectory.svg"), svg)
    if len(sec.points):
        pts = sec.points
        svg = output.svg_lines([], "section", "x1", "x2(t - tau)", markers=[tuple(q) for q in pts],
                               xlim=_pad(pts[:, 0]), ylim=_pad(pts[:, 1]))
        output.write_text(run.path("section.svg"), svg)
    print(output.dumps(summary))
    return run.finish(EXIT_OK)


def _pad(v) -> tuple[float, float]:
    lo, hi = float(np.min(v)), float(np.max(v))
    r = max(hi - lo, 1e-3 * max(abs(lo), abs(hi), 1e-12))
    return lo - 0.1 * r, hi + 0.1 * r


def cmd_sweep(args) -> int:
    run = Run(args, "sweep")
    base = _sim_model(args)
    values = _linspace(args.values)
    if values is None:
        raise InputError("give --values LO HI N")
    jobs, params = [], []
    for n, v in enumerate(values):
        if args.param == "tau":
            m = base.with_tau(float(v))
        else:
            m = NormalizedModel.from_alphas(base.alpha2, float(v), k3=base.k3, tau=base.tau)
        w0 = _seed_frequency(m, args.omega0)
        duration = args.periods * 2.0 * math.pi / w0
        cfg = dde.SimConfig(
            duration=duration,
            transient=0.75 * duration,
            history=dde.SinusoidalHistory(args.amplitude, w0),
            steps_per_delay=args.steps_per_delay,
            h=None if m.tau > 0 else 2.0 * math.pi / w0 / args.steps_per_delay,
        )
        jobs.append((m, cfg))
        params.append({"run_id": f"run{n:04d}", args.param: float(v), **m.to_dict(), "alpha3": m.alpha3})
    results = dde.run_sweep(jobs, workers=args.workers)
    header = [args.param, "amplitude", "omega", "settled", "diverged"]
    rows = [
        (p[args.param], r.get("amplitude"), r.get("omega"), r.get("settled"), r.get("diverged"))
        for p, r in zip(params, results)
    ]
    run.table("sweep", header, rows)
    output.write_json(run.path("sweep_runs.json"), {p["run_id"]: {**p, **r} for p, r in zip(params, results)})
    svg = output.svg_lines([("amplitude", [r[0] for r in rows], [r[1] or 0.0 for r in rows])], "sweep", args.param, "amplitude")
    output.write_text(run.path("sweep.svg"), svg)
    print(f"{len(rows)} runs written to {run.out}")
    return run.finish(EXIT_OK)


def cmd_replay(args) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text())
        argv = list(manifest["argv"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"unreadable manifest {args.manifest!r}: {exc}") from exc
    if args.replay_out:
        argv += ["--out", args.replay_out]
    return main(argv)


# --- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario JSON file or inline JSON object")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="format of tabular outputs")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--alpha2", type=float)
    model.add_argument("--alpha3", type=float)
    model.add_argument("--kappa", type=float)
    model.add_argument("--k3", type=float)

    parser = argparse.ArgumentParser(prog="bridgewobble", description=__doc__)
    parser.add_argument("--version", action="version", version=_version())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stability", parents=[common, model], help="stability verdicts and charts")
    p.add_argument("--tau", type=float)
    p.add_argument("--tau-range", type=float, nargs=3, metavar=("LO", "HI", "N"))
    p.add_argument("--alpha2-range", type=float, nargs=3, metavar=("LO", "HI", "N"))
    p.add_argument("--alpha3-range", type=float, nargs=3, metavar=("LO", "HI", "N"))
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("critical-delays", parents=[common], help="critical-delay curves and double-Hopf points")
    p.add_argument("--alpha2", type=float)
    p.add_argument("--alpha3-range", type=float, nargs=3, metavar=("LO", "HI", "N"))
    p.add_argument("--j-max", type=int, default=6)
    p.set_defaults(func=cmd_critical_delays)

    p = sub.add_parser("hopf", parents=[common, model], help="Hopf normal form and amplitude law")
    p.add_argument("--branch", choices=("plus", "minus", "resonant"), default="plus")
    p.add_argument("--j", type=int, default=0)
    p.add_argument("--mu", type=float, nargs="*")
    p.set_defaults(func=cmd_hopf)

    p = sub.add_parser("double-hopf", parents=[common], help="double-Hopf unfolding and KAM checks")
    p.add_argument("--alpha2", type=float)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--k3", type=float)
    p.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--sigma", type=float, nargs=2, default=(1.0, 1.0), metavar=("S1", "S2"))
    p.set_defaults(func=cmd_double_hopf)

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--tau", type=float)
    sim.add_argument("--omega0", type=float, help="seed frequency (default: rightmost root)")
    sim.add_argument("--amplitude", type=float, default=0.05, help="seed amplitude")
    sim.add_argument("--periods", type=float, default=400)
    sim.add_argument("--steps-per-delay", type=int, default=200)

    p = sub.add_parser("simulate", parents=[common, model, sim], help="integrate the delayed oscillator")
    p.add_argument("--duration", type=float)
    p.add_argument("--transient", type=float)
    p.add_argument("--every", type=int, default=10, help="write every n-th sample")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common, model, sim], help="parallel parameter sweep of simulations")
    p.add_argument("--param", choices=("tau", "alpha3"), default="tau")
    p.add_argument("--values", type=float, nargs=3, metavar=("LO", "HI", "N"))
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", dest="replay_out", help="write outputs here instead of the recorded directory")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        return args.func(args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except RuntimeError as exc:
        print(f"{args.command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
