"""
Command-line front end.

    python -m scripts.travelwave analyze  --config run.toml
    python -m scripts.travelwave wave     --config run.toml --c cstar
    python -m scripts.travelwave simulate --config run.toml --logistic
    python -m scripts.travelwave sweep    --config run.toml --threads 4
    python -m scripts.travelwave selftest

Exit codes: 0 success, 1 usage/config error, 2 violated mathematical
precondition, 3 numerical failure.
"""

import argparse
import itertools
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import ValidationError
from tqdm import tqdm

from .bounds import build_supersub, verify_supersub
from .config import RunConfig, default_output_dir, default_threads, load_config
from .dispersion import dispersion_report
from .errors import (
    AssumptionViolation,
    ConsistencyError,
    InadmissibleParamsError,
    NoRootsError,
    NonConvergenceError,
    TravelWaveError,
    UsageError,
)
from .evolve import (
    exclusion_ray,
    front_speed,
    run_invasion,
    run_logistic_comparison,
    slow_wave_excluded,
    translation_history,
)
from .kernel import MomentDefinedKernel, GaussianKernel, discretize
from .kinetics import check_strong_allee_assumption, equilibria
from .models import Params
from .profile import (
    audit_quasi_monotone,
    classify_left_limit,
    make_grid,
    resolve_grid,
    right_tail_bounds,
    solve_profile,
    solve_profile_at_cstar,
    tail_decay_rate,
)
from .reports import ReportWriter
from .squeeze import contraction_ratio, run_squeeze

PACKAGE_LOGGER = "scripts.travelwave"
EXCLUSION_FRACTIONS = (0.5, 0.8)
SELFTEST_SPEED = 1.5

logger = logging.getLogger(__name__)


# ============================================================================
# LOGGING
# ============================================================================

class _JsonLineFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        return json.dumps({
            "timestamp": self.formatTime(record),
            "level": record.levelname,
            "message": record.getMessage(),
        })


def setup_logger(output_dir: Optional[Path] = None, level: int = logging.INFO) -> logging.Logger:
    """
    Configure the package logger: console always, JSON lines in <output_dir>/run.log when given.

    Calling it again replaces the handlers.
    """
    package_logger = logging.getLogger(PACKAGE_LOGGER)
    package_logger.setLevel(level)
    for handler in list(package_logger.handlers):
        package_logger.removeHandler(handler)
        handler.close()

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    package_logger.addHandler(console_handler)

    if output_dir is not None:
        Path(output_dir).mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(Path(output_dir) / "run.log")
        file_handler.setLevel(level)
        file_handler.setFormatter(_JsonLineFormatter())
        package_logger.addHandler(file_handler)
    return package_logger


# ============================================================================
# COMMANDS
# ============================================================================

def _require_admissible(p: Params) -> None:
    record = check_strong_allee_assumption(p)
    if not record.admissible:
        named = ", ".join(f"{name}={getattr(record, name):.6g}" for name in record.violated)
        raise InadmissibleParamsError(f"m={p.m} is not below {named}", record)


def cmd_analyze(args, config: RunConfig, writer: ReportWriter) -> int:
    """Equilibria, admissibility and dispersion data for every requested speed."""
    p = config.params
    k1, k2 = config.kernels()
    eq = equilibria(p)
    record = check_strong_allee_assumption(p)
    writer.write_json("equilibria.json", {"params": p, "equilibria": eq, "admissibility": record})
    _require_admissible(p)

    base = dispersion_report(p, k1, k2)
    speeds = list(config.speeds) + [f * base.c_star for f in config.speed_factors]
    rows = []
    for c in speeds:
        try:
            rep = dispersion_report(p, k1, k2, c)
            rows.append({"c": c, "lambda1": rep.lambda1, "lambda2": rep.lambda2, "eta": rep.eta,
                         "sign_pattern_ok": rep.sign_pattern_ok, "error": None})
        except NoRootsError as e:
            rows.append({"c": c, "lambda1": None, "lambda2": None, "eta": None,
                         "sign_pattern_ok": None, "error": str(e)})

    writer.write_json("dispersion.json", {
        "c_star": base.c_star,
        "lambda_star": base.lambda_star,
        "kernel1": k1.describe(),
        "kernel2": k2.describe(),
        "speeds": rows,
    })
    writer.write_csv(
        "dispersion.csv",
        ["c", "lambda1", "lambda2", "eta", "sign_pattern_ok", "error"],
        ([r[k] for k in ("c", "lambda1", "lambda2", "eta", "sign_pattern_ok", "error")] for r in rows),
    )
    logger.info(f"c* = {base.c_star:.12g}, lambda* = {base.lambda_star:.12g}")
    return 0


def _parse_speed(raw: Optional[str], c_star: float, config: RunConfig):
    if raw is None:
        return config.speed_factors[0] * c_star
    if raw.strip().lower() == "cstar":
        return "cstar"
    try:
        return float(raw)
    except ValueError as e:
        raise UsageError(f"--c expects a number or 'cstar', got {raw!r}") from e


def _write_profile(writer: ReportWriter, profile) -> None:
    writer.write_columns("profile.csv", {"xi": profile.xi, "phi": profile.phi, "psi": profile.psi})


def _write_history(writer: ReportWriter, error: NonConvergenceError) -> None:
    history = error.history
    writer.write_columns("residual_history.csv", {"iteration": range(1, len(history) + 1), "diff": history})


def cmd_wave(args, config: RunConfig, writer: ReportWriter) -> int:
    """Upper/lower solutions, squeeze trace and a profile solve at one speed or at c*."""
    p = config.params
    k1, k2 = config.kernels()
    _require_admissible(p)
    base = dispersion_report(p, k1, k2)
    target = _parse_speed(args.c, base.c_star, config)
    u2 = equilibria(p).u2_star

    trace = run_squeeze(p)
    writer.write_columns("squeeze.csv", {"n": list(range(-1, len(trace.gammas) - 1)), "gamma": trace.gammas})
    summary: Dict = {
        "c_star": base.c_star,
        "squeeze": {"limit": trace.limit, "rho": trace.rho, "steps": trace.n_steps,
                    "max_step_ratio": trace.max_step_ratio,
                    "rate_exceeded": trace.rate_exceeded},
    }

    if target == "cstar":
        try:
            result = solve_profile_at_cstar(p, k1, k2, config.solver, config.continuation, progress=True)
        except NonConvergenceError as e:
            _write_history(writer, e)
            raise
        _write_profile(writer, result.profile)
        writer.write_columns("continuation.csv", {
            "c": result.speeds,
            "gap": [None] + result.gaps,
        })
        left = classify_left_limit(result.profile, p)
        summary.update({
            "mode": "cstar",
            "delta": result.delta,
            "speeds": result.speeds,
            "gaps": result.gaps,
            "converged": result.converged,
            "left_limit": left[0],
            "right_tail": right_tail_bounds(result.profile),
        })
        writer.write_json("summary.json", summary)
        return 0

    c = float(target)
    if c <= base.c_star:
        raise NoRootsError(f"c = {c:.6g} is below minimal speed c* = {base.c_star:.6g}")
    rep = dispersion_report(p, k1, k2, c)

    pair = build_supersub(c, p, rep, k2)
    L, h = resolve_grid(config.solver, rep)
    xi = make_grid(L, h)
    h = float(xi[1] - xi[0])
    dk1, dk2 = discretize(k1, h), discretize(k2, h)
    check = verify_supersub(pair, c, p, dk1, dk2, xi)
    writer.write_columns("supersub_residuals.csv", {"xi": check.xi, **check.residuals})

    try:
        profile = solve_profile(c, p, k1, k2, config.solver, rep)
    except NonConvergenceError as e:
        _write_history(writer, e)
        raise
    lam_hat = tail_decay_rate(profile, u2_star=u2)
    audit = audit_quasi_monotone(c, p, dk1, dk2, profile.beta, rng=np.random.default_rng(config.seed))

    interior = slice(1, -1)
    sandwich_ok = (
        profile.projection_gap < 1e-12
        and float(profile.phi[interior].min()) > 0.5 * (1.0 + p.b)
        and float(profile.psi[interior].min()) > 0.0
    )
    _write_profile(writer, profile)
    writer.write_json("profile.json", {
        "c": profile.c,
        "residual": profile.residual,
        "fixed_point_gap": profile.fixed_point_gap,
        "beta": profile.beta,
        "iterations": profile.iterations,
        "lambda_hat": lam_hat,
    })
    summary.update({
        "mode": "speed",
        "c": c,
        "lambda1": rep.lambda1,
        "lambda2": rep.lambda2,
        "eta": rep.eta,
        "supersub": {"epsilon": pair.epsilon, "r": pair.r, "xi1": pair.xi1,
                     "extremes": check.extremes, "passed": check.passed},
        "sandwich": "pass" if sandwich_ok else "fail",
        "lambda_hat": lam_hat,
        "lambda_hat_rel_error": abs(lam_hat - rep.lambda1) / rep.lambda1,
        "quasi_monotone_audit": audit,
        "left_limit": classify_left_limit(profile, p)[0],
        "right_tail": right_tail_bounds(profile),
    })
    writer.write_json("summary.json", summary)
    return 0


def cmd_simulate(args, config: RunConfig, writer: ReportWriter) -> int:
    """Invasion run with exclusion probes, optionally the logistic comparison run."""
    p = config.params
    k1, k2 = config.kernels()
    summary: Dict = {}

    if args.self_test_translation:
        x = config.domain.grid()
        history = translation_history(SELFTEST_SPEED, x, np.arange(0.0, 20.0, 1.0))
        estimate = front_speed(history)
        logger.info(f"Translation self-test: measured {estimate.speed:.12g} for speed {SELFTEST_SPEED}")
        summary["translation_self_test"] = {"speed": SELFTEST_SPEED, "measured": estimate.speed}

    c_star = dispersion_report(p, k1, k2).c_star
    rays = [exclusion_ray(f * c_star, c_star) for f in EXCLUSION_FRACTIONS]
    sim = config.sim.model_copy(update={
        "probe_speeds": tuple(config.sim.probe_speeds) + tuple(rays),
        "progress": True,
    })
    result = run_invasion(p, k1, k2, config.domain, sim)

    times = np.array([t for t, _ in result.state.front_history])
    fronts = np.array([xf for _, xf in result.state.front_history])
    running = np.gradient(fronts, times) if times.size > 1 else np.full(times.size, math.nan)
    writer.write_columns("front_history.csv", {"t": times, "front_x": fronts, "speed_running": running})
    writer.write_columns("fields.csv", {"x": result.state.x, "u": result.state.u, "v": result.state.v})
    probe_rows = [
        (speed, t, v) for speed, samples in result.state.probe_history.items() for t, v in samples
    ]
    writer.write_csv("probes.csv", ["ray_speed", "t", "v"], probe_rows)

    summary.update({
        "c_star": c_star,
        "speed": result.speed.speed,
        "half_width": result.speed.half_width,
        "ratio": result.ratio,
        "v_clips": result.state.v_clips,
        "theta": result.theta,
        "slow_wave_excluded": {
            str(f): slow_wave_excluded(result, f * c_star) for f in EXCLUSION_FRACTIONS
        },
    })

    if args.logistic:
        report = run_logistic_comparison(
            p, k2, config.domain, config.sim.model_copy(update={"progress": True}), config.logistic
        )
        columns = {"t": report.times}
        for j, c in enumerate(report.speeds):
            columns[f"floor_c{j}"] = report.floors[:, j] if report.floors.size else []
        writer.write_columns("logistic.csv", columns)
        summary["logistic"] = {
            "capacity": report.capacity,
            "speeds": report.speeds,
            "final_floors": report.final_floors if report.floors.size else [],
        }

    writer.write_json("summary.json", summary)
    return 0


def _sweep_point(index: int, values: Dict[str, float], config: RunConfig) -> Dict:
    row: Dict = {"index": index, **values, "admissible": None, "violated": "", "min_term": None,
                 "c_star": None, "rho": None, "wave_residual": None, "error": ""}
    try:
        p = Params(**{**config.params.model_dump(), **values})
        k1, k2 = config.kernels()
        record = check_strong_allee_assumption(p)
        row.update(admissible=record.admissible, violated=";".join(record.violated), min_term=record.min_term)
        row["c_star"] = dispersion_report(p, k1, k2).c_star
        try:
            row["rho"] = contraction_ratio(p)
        except AssumptionViolation:
            pass
        if config.sweep.solve_wave and record.admissible:
            wave = solve_profile(config.sweep.wave_factor * row["c_star"], p, k1, k2, config.solver)
            row["wave_residual"] = wave.residual
    except ValidationError as e:
        row["error"] = f"ValidationError: {e.errors()[0]['msg']}"
    except TravelWaveError as e:
        row["error"] = f"{type(e).__name__}: {e}"
    except Exception as e:
        logger.error(f"Sweep point {index} ({values}) failed unexpectedly: {e}", exc_info=True)
        row["error"] = f"{type(e).__name__}: {e}"
    return row


def cmd_sweep(args, config: RunConfig, writer: ReportWriter) -> int:
    """Parameter atlas over the Cartesian product of the configured axes."""
    axes = config.sweep.axes
    if not axes or any(len(v) == 0 for v in axes.values()):
        raise UsageError("sweep needs at least one non-empty axis under [sweep.axes]")

    names = list(axes)
    points = [dict(zip(names, combo)) for combo in itertools.product(*(axes[n] for n in names))]
    threads = args.threads or default_threads()
    logger.info(f"Sweeping {len(points)} points over {names} with {threads} threads")

    rows: List[Dict] = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_sweep_point, i, values, config) for i, values in enumerate(points)]
        with tqdm(total=len(futures), desc="Sweep", unit="point") as pbar:
            for future in as_completed(futures):
                rows.append(future.result())
                pbar.update(1)
    rows.sort(key=lambda r: r["index"])

    header = ["index", *names, "admissible", "violated", "min_term", "c_star", "rho", "wave_residual", "error"]
    writer.write_csv("atlas.csv", header, ([r[k] for k in header] for r in rows))
    failed = sum(1 for r in rows if r["error"])
    logger.info(f"Sweep finished: {len(rows) - failed} points ok, {failed} with errors")
    return 0


def cmd_selftest(args, config: Optional[RunConfig], writer: ReportWriter) -> int:
    """Reference values every build must reproduce."""
    ref = Params(d1=1, d2=1, m=0.1, a=1, s=1, b=0.2)
    checks = []

    def check(name: str, value: float, expected: float, tol: float) -> None:
        checks.append({"name": name, "value": value, "expected": expected, "passed": abs(value - expected) <= tol})

    eq = equilibria(ref)
    check("u2_star", eq.u2_star, 0.9872983346207417, 1e-9)
    check("b1", eq.b1, 0.6417424305044159, 1e-9)
    check("term1", check_strong_allee_assumption(ref.model_copy(update={"m": 0.5})).term1, 0.48, 1e-12)
    local = MomentDefinedKernel.from_coefficients([1.0])
    check("c_star_local", dispersion_report(ref, local, local).c_star, 2.0, 1e-8)
    gaussian = GaussianKernel(1.0)
    check("c_star_gaussian", dispersion_report(ref, gaussian, gaussian).c_star, math.sqrt(math.e), 1e-8)
    check("squeeze_limit", run_squeeze(ref).limit, eq.u2_star, 1e-10)
    x = make_grid(60.0, 0.2)
    history = translation_history(SELFTEST_SPEED, x, np.arange(0.0, 20.0, 1.0))
    check("translation_speed", front_speed(history).speed, SELFTEST_SPEED, 1e-8)

    writer.write_json("selftest.json", {"checks": checks})
    failed = [c["name"] for c in checks if not c["passed"]]
    for c in checks:
        logger.info(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['value']:.12g} (expected {c['expected']:.12g})")
    if failed:
        raise ConsistencyError(f"self-test failed: {', '.join(failed)}")
    return 0


COMMANDS: Dict[str, Callable] = {
    "analyze": cmd_analyze,
    "wave": cmd_wave,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "selftest": cmd_selftest,
}


# ============================================================================
# CLI INTERFACE
# ============================================================================

class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors raise UsageError (exit 1)."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="travelwave",
        description="Traveling invasion waves of a nonlocal ratio-dependent predator-prey system",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Minimal speed and decay rates
  python -m scripts.travelwave analyze --config configs/reference.toml

  # Profile at 1.3 c*, or at c* by continuation
  python -m scripts.travelwave wave --config configs/reference.toml --c 2.1
  python -m scripts.travelwave wave --config configs/reference.toml --c cstar

  # Invasion run plus the logistic comparison run
  python -m scripts.travelwave simulate --config configs/reference.toml --logistic
        """,
    )
    common = _Parser(add_help=False)
    common.add_argument("--out", type=str, metavar="DIR", help="Output directory")
    common.add_argument("--seed", type=int, metavar="N", help="Seed for randomized audits (overrides config)")
    common.add_argument("--verbose", action="store_true", help="Log per-iteration diagnostics")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (
        ("analyze", "equilibria, admissibility and dispersion relation"),
        ("wave", "upper/lower solutions, squeeze sequence and profile solve"),
        ("simulate", "time-domain invasion run"),
        ("sweep", "parameter atlas"),
    ):
        cmd = sub.add_parser(name, parents=[common], help=help_text)
        cmd.add_argument("--config", type=str, required=True, metavar="PATH", help="TOML or JSON run configuration")
        if name == "wave":
            cmd.add_argument("--c", type=str, metavar="SPEED", help="Wave speed or 'cstar' (default: first speed factor times c*)")
        if name == "simulate":
            cmd.add_argument("--logistic", action="store_true", help="Also run the logistic comparison equation")
            cmd.add_argument("--self-test-translation", action="store_true",
                             help="Check the front tracker on an exactly translating field")
        if name == "sweep":
            cmd.add_argument("--threads", type=int, metavar="N", help="Worker threads (default: TRAVELWAVE_THREADS or CPU count)")

    selftest = sub.add_parser("selftest", parents=[common], help="reproduce reference values")
    selftest.add_argument("--config", type=str, metavar="PATH", help="Unused; accepted for symmetry")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command, and map errors to exit codes."""
    setup_logger()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        logger.error(str(e))
        return e.exit_code

    try:
        config = load_config(args.config) if args.config and args.command != "selftest" else None
        if config is not None and args.seed is not None:
            config = config.model_copy(update={"seed": args.seed})
        if config is not None:
            out = config.resolved_output_dir(args.out)
        else:
            out = Path(args.out) if args.out else default_output_dir()
        setup_logger(out, logging.DEBUG if args.verbose else logging.INFO)
        writer = ReportWriter(out)
        return COMMANDS[args.command](args, config, writer)
    except TravelWaveError as e:
        suggestion = getattr(e, "suggested", None)
        logger.error(f"{type(e).__name__}: {e}")
        if suggestion is not None:
            logger.error(f"Suggested domain size: {suggestion:.6g}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
