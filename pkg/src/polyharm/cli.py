"""Command-line driver: ``polyharm <command> --config run.cfg --out results/``."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from polyharm import __version__
from polyharm import functions
from polyharm._parallel import ENV_THREADS, ordered_map, resolve_threads
from polyharm.config import RunConfig, load_config
from polyharm.errors import ConfigError, PolyharmError
from polyharm.harmonics import build_basis, build_quadrature, mode_dimension
from polyharm.interp import (
    evaluate,
    interpolate_general,
    interpolate_spheres,
    knot_residuals,
    l2_error_on_sphere,
    l2_error_parseval,
    polyharmonic_certificate,
)
from polyharm.radial import DECAY_REL_FLOOR, BallFunction, SampledBallFunction, radial_profiles, trace_table, seminorm
from polyharm.theory import check_theorem1, check_theorem2, divergence_demo

EXIT_CODES = """\
exit codes:
  0  success
  1  other library error
  2  configuration error (bad file, unknown field, value out of range)
  3  domain error (radius outside the ball, unsupported dimension)
  4  degenerate knots (coincident radii, zero radius with k >= 1)
  5  insufficient or inconsistent input
  6  zero sphere trace (no decay rate can be fitted)
  7  magnitude overflow of phi / r^k
  8  boundary case C * R = 1
"""


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


class Run:
    """Output directory bookkeeping: CSV writing, stage timings and the manifest."""

    def __init__(self, command: str, cfg: RunConfig, out: Path, threads: int):
        self.command = command
        self.cfg = cfg
        self.out = out
        self.threads = threads
        self.outputs: List[Path] = []
        self.timings: dict = {}
        out.mkdir(parents=True, exist_ok=True)

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        yield
        self.timings[name] = round(time.perf_counter() - t0, 6)

    def write_text(self, name: str, text: str) -> Path:
        path = self.out / name
        path.write_text(text)
        self.outputs.append(path)
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        lines = [",".join(header)]
        lines.extend(",".join(fmt(v) for v in row) for row in rows)
        return self.write_text(name, "\n".join(lines) + "\n")

    def finish(self) -> Path:
        manifest = {
            "command": self.command,
            "version": __version__,
            "config": self.cfg.echo(),
            "timings": self.timings,
            "outputs": [
                {"file": p.name, "sha256": hashlib.sha256(p.read_bytes()).hexdigest()} for p in self.outputs
            ],
        }
        path = self.out / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2) + "\n")
        return path


# ---------------------------------------------------------------------------
# Setup helpers
# ---------------------------------------------------------------------------


def build_function(cfg: RunConfig, quadrature) -> BallFunction:
    n, R = cfg.n, cfg.R
    name = cfg.function
    if name == "constant":
        return functions.constant(n, R, cfg.value)
    if name == "zero":
        return functions.zero(n, R)
    if name == "gaussian":
        return functions.gaussian(n, R, cfg.center, cfg.scale)
    if name == "exp-linear":
        return functions.exp_linear(n, R, cfg.direction)
    if name == "finite-mode":
        return functions.finite_mode(n, R, cfg.modes)
    if name == "example-geometric":
        return functions.example_geometric(n, R, cfg.C, cfg.k_max)
    if name == "samples":
        return SampledBallFunction.from_csv(cfg.samples_file, n, R, quadrature)
    raise ConfigError(f"unknown function {name!r}")


def probe_radii(cfg: RunConfig) -> np.ndarray:
    grid = np.linspace(0.0, cfg.R, cfg.probes)
    if cfg.random_probes:
        rng = np.random.default_rng(cfg.seed)
        grid = np.concatenate([grid, rng.uniform(0.0, cfg.R, cfg.random_probes)])
    return np.unique(grid)


def _setup(cfg: RunConfig):
    basis = build_basis(cfg.n, cfg.k_max)
    quadrature = build_quadrature(cfg.n, cfg.quadrature_exactness)
    return basis, quadrature, build_function(cfg, quadrature)


def _profiles(run: Run, f, basis, quadrature):
    cfg = run.cfg
    kwargs = {}
    if isinstance(f, SampledBallFunction):
        kwargs = {"radii": f.radii, "r_min": float(f.radii[0])}
    return radial_profiles(f, basis, quadrature, n_cheb=cfg.n_cheb, threads=run.threads, **kwargs)


def _error_curve(run: Run, name: str, f, h, quadrature, radii):
    def both(r):
        return r, l2_error_on_sphere(f, h, r, quadrature), l2_error_parseval(f, h, r, quadrature)

    rows = ordered_map(both, list(radii), run.threads)
    run.write_csv(name, ["r", "l2_error", "l2_error_parseval"], rows)
    return rows


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_modes(run: Run) -> None:
    cfg = run.cfg
    rows, total = [], 0
    with run.stage("modes"):
        for k in range(cfg.k_max + 1):
            d = mode_dimension(cfg.n, k)
            total += d
            rows.append((k, d, total))
    run.write_csv("modes.csv", ["k", "d_k", "cumulative"], rows)


def _interpolant(run: Run, f, basis, quadrature):
    cfg = run.cfg
    knots = cfg.knot_set()
    if knots.variant == "spheres":
        with run.stage("traces"):
            traces = trace_table(f, knots.radii, basis, quadrature, run.threads)
        with run.stage("interpolate"):
            return interpolate_spheres([tr.denoised() for tr in traces], R=cfg.R)
    with run.stage("profiles"):
        profiles = _profiles(run, f, basis, quadrature)
    with run.stage("interpolate"):
        return interpolate_general(profiles, knots, n=cfg.n, R=cfg.R, k_max=cfg.k_max)


def cmd_interpolate(run: Run) -> None:
    cfg = run.cfg
    with run.stage("setup"):
        basis, quadrature, f = _setup(cfg)
    h = _interpolant(run, f, basis, quadrature)
    with run.stage("certify"):
        residuals = knot_residuals(h)
        cert = polyharmonic_certificate(h)
        sphere_residual = None
        if h.knot_variant == "spheres" and not isinstance(f, SampledBallFunction):
            sphere_residual = max(
                float(np.max(np.abs(evaluate(h, r, quadrature.nodes) - f.on_sphere(r, quadrature.nodes))))
                for r in np.sqrt(h.knots_t[0])
            )
    run.write_text("interpolant.json", h.to_json())
    run.write_csv(
        "residuals.csv",
        ["k", "ell", "max_knot_residual"],
        [(m.k, m.ell, float(np.max(residuals[p]))) for p, m in enumerate(h.modes)],
    )
    run.write_csv(
        "certificate.csv",
        ["quantity", "value"],
        [
            ("laplacian_power_N_relative", cert),
            ("max_knot_residual", float(np.max(residuals))),
            ("max_sphere_residual", sphere_residual),
        ],
    )


def cmd_report_t1(run: Run) -> None:
    cfg = run.cfg
    with run.stage("setup"):
        basis, quadrature, f = _setup(cfg)
    with run.stage("profiles"):
        profiles = _profiles(run, f, basis, quadrature)
    with run.stage("interpolate"):
        h = interpolate_general(profiles, cfg.knot_set(), n=cfg.n, R=cfg.R, k_max=cfg.k_max)
    with run.stage("seminorm"):
        est = seminorm(profiles, cfg.N, cfg.R, k_tail=cfg.k_tail)
    probes = f.radii if isinstance(f, SampledBallFunction) else probe_radii(cfg)
    with run.stage("errors"):
        report = check_theorem1(cfg.R, cfg.N, est, h, f, probes, quadrature)
        _error_curve(run, "error_curve_t1.csv", f, h, quadrature, probes)
    header = [
        "kind", "r", "l2_error", "R", "N", "k_tail", "seminorm", "product", "satisfied",
        "bound_shape", "max_error", "empirical_ratio",
    ]
    rows = [("probe", r, e) + (None,) * 9 for r, e in report.measured_errors]
    rows.append(
        ("summary", None, None, cfg.R, cfg.N, est.k_tail, est.value, report.product, report.satisfied,
         report.bound_shape, report.max_error, report.empirical_ratio)
    )
    run.write_csv("theorem1.csv", header, rows)


def cmd_report_t2(run: Run) -> None:
    cfg = run.cfg
    if cfg.knots != "spheres":
        raise ConfigError(f"{cfg.source}: field 'knots': report-t2 needs concentric-sphere knots")
    with run.stage("setup"):
        basis, quadrature, f = _setup(cfg)
    with run.stage("traces"):
        traces = trace_table(f, cfg.radii, basis, quadrature, run.threads)
    with run.stage("theorem2"):
        report = check_theorem2(cfg.R, traces, rel_floor=DECAY_REL_FLOOR)
        h = interpolate_spheres([tr.denoised() for tr in traces], R=cfg.R)
    with run.stage("errors"):
        if not isinstance(f, SampledBallFunction):
            _error_curve(run, "error_curve_t2.csv", f, h, quadrature, probe_radii(cfg))
    header = [
        "kind", "j", "r_j", "eta_j", "K_j", "ratio_j", "R", "M", "product", "satisfied",
        "delta", "tail_ratio", "tail_ok",
    ]
    rows = [
        ("sphere", j, r, d.eta, d.K, q) + (None,) * 7
        for j, (r, d, q) in enumerate(zip(report.radii, report.decays, report.ratios))
    ]
    rows.append(
        ("summary", None, None, None, None, None, report.R, report.M, report.product, report.satisfied,
         report.delta, report.tail_ratio, report.tail_ok)
    )
    run.write_csv("theorem2.csv", header, rows)
    inc = np.diff(report.partial_sums, prepend=0.0)
    run.write_csv(
        "partial_sums_t2.csv", ["K", "increment", "partial_sum"],
        [(K, inc[K], s) for K, s in enumerate(report.partial_sums)],
    )


def cmd_diverge(run: Run) -> None:
    cfg = run.cfg
    if cfg.function != "example-geometric":
        raise ConfigError(f"{cfg.source}: field 'function': diverge needs function = example-geometric")
    with run.stage("diverge"):
        demo = divergence_demo(
            cfg.C, cfg.R, cfg.N, cfg.radii, cfg.k_max, n=cfg.n, all_ell=cfg.all_ell,
            growth_threshold=cfg.growth_threshold,
        )
    header = [
        "kind", "K", "increment", "partial_sum", "closed_form_term", "lower_bound_term", "relative_deviation",
        "C", "R", "N", "CR", "increasing_from", "tail_ratio", "verdict",
    ]
    rows = []
    for K in range(demo.k_max + 1):
        closed = demo.closed_form_terms[K]
        dev = abs(demo.increments[K] - closed) / closed
        rows.append(("term", K, demo.increments[K], demo.partial_sums[K], closed, demo.lower_bound_terms[K], dev)
                    + (None,) * 7)
    rows.append(
        ("summary",) + (None,) * 6
        + (demo.C, demo.R, demo.N, demo.C * demo.R, demo.increasing_from, demo.tail_ratio, demo.verdict)
    )
    run.write_csv("divergence.csv", header, rows)


COMMANDS = {
    "modes": cmd_modes,
    "interpolate": cmd_interpolate,
    "report-t1": cmd_report_t1,
    "report-t2": cmd_report_t2,
    "diverge": cmd_diverge,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyharm",
        description="Polyharmonic interpolation on the ball: mode tables, interpolants, convergence reports.",
        epilog=EXIT_CODES,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "modes": "table of k, d_k and cumulative mode count",
        "interpolate": "build and serialize the interpolant, with knot residuals and the Delta^N certificate",
        "report-t1": "general-knot condition R*||f|_N < 1, error curve and bound-shape ratio",
        "report-t2": "sphere-knot condition R*max_j exp(-eta_j)/r_j < 1 and ball-norm partial sums",
        "diverge": "partial sums of the divergent geometric construction against their closed form",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, epilog=EXIT_CODES, formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", required=True, help="key = value run configuration file")
        p.add_argument("--out", default="polyharm-out", help="output directory (default: %(default)s)")
        p.add_argument(
            "--threads", type=int, default=None,
            help=f"worker threads, 0 = one per CPU (default: ${ENV_THREADS} or 1)",
        )
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config field")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        threads = resolve_threads(args.threads)
        cfg = load_config(args.config, overrides=args.set)
        run = Run(args.command, cfg, Path(args.out), threads)
        COMMANDS[args.command](run)
        run.finish()
    except PolyharmError as exc:
        print(f"polyharm {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"polyharm {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
