"""Command-line interface: ``spectral-cggm <subcommand> ...``.

Subcommands
-----------
transform   Gaussianize every channel of a panel (copula transform).
spectrum    Band-collapsed cross-spectral matrix of a panel.
estimate    Run one solver on a matrix or on a sample table.
pipeline    Panel file to connectivity matrix, edge list, heatmap, manifest.
simulate    Replicated benchmark on the cliques and random models.

Exit status is 0 on success, 2 on a usage error and 1 on a runtime error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .copula import to_gaussian_panel
from .errors import CggmError
from .numerics import sym
from .panel import FORMATS, load_panel, save_panel
from .pipeline import (RunConfig, read_matrix_csv, run_pipeline, write_matrix_csv)
from .simbench import BENCH_MAX_OUTER_ITERS, MODELS, GeneratorSpec, run_benchmark
from .solvers import (SOLVER_IDS, SOLVERS, SolverConfig, cross_validate_lambda,
                      default_grid, kfold_covariances, ledoit_wolf, sample_covariance)
from .spectral import (DEFAULT_TAPERS, FrequencyBand, band_collapse, estimate_spectrum,
                       partial_coherence_screen)


def _lam(text):
    if text == "cv":
        return "cv"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'cv' or a number, got {text!r}") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError("lambda must be >= 0")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _add_panel_args(p):
    p.add_argument("--input", required=True, help="panel file")
    p.add_argument("--format", choices=FORMATS, default="csv-long")
    p.add_argument("--sampling-rate", type=float, default=None,
                   help="Hz (csv-long default 1.0; f64-binary reads the sidecar)")


def _add_band_args(p):
    p.add_argument("--band-low", type=float, default=None, help="Hz; default 0")
    p.add_argument("--band-high", type=float, default=None, help="Hz; default Nyquist")
    p.add_argument("--band-name", default="")
    p.add_argument("--taper-count", type=_positive_int, default=DEFAULT_TAPERS)


def _add_solver_args(p, max_outer=200):
    d = SolverConfig()
    p.add_argument("--lam", "--lambda", dest="lam", type=_lam, default="cv",
                   help="penalty, or 'cv' for cross-validation (default)")
    p.add_argument("--max-outer-iters", type=_positive_int, default=max_outer)
    p.add_argument("--tol", type=float, default=d.tol)
    p.add_argument("--delta", type=float, default=d.delta)
    p.add_argument("--step-shrink", type=float, default=d.step_shrink)
    p.add_argument("--max-inner-iters", type=_positive_int, default=d.max_inner_iters)
    p.add_argument("--n-folds", type=int, default=5)


def _solver_config(args, lam=0.0):
    return SolverConfig(lam=lam, max_outer_iters=args.max_outer_iters, tol=args.tol,
                        delta=args.delta, step_shrink=args.step_shrink,
                        max_inner_iters=args.max_inner_iters)


def _band(args, panel_rate):
    if args.band_low is None and args.band_high is None:
        return None
    high = panel_rate / 2.0 if args.band_high is None else args.band_high
    return FrequencyBand(args.band_low or 0.0, high, args.band_name)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spectral-cggm",
        description="Sparse connectivity estimation for multichannel time series.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="copula-transform every channel")
    _add_panel_args(p)
    p.add_argument("--output", required=True)
    p.add_argument("--output-format", choices=FORMATS, default=None,
                   help="defaults to the input format")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")

    p = sub.add_parser("spectrum", help="band-collapsed cross-spectral matrix")
    _add_panel_args(p)
    _add_band_args(p)
    p.add_argument("--no-copula", dest="copula", action="store_false",
                   help="skip the Gaussianizing transform")
    p.add_argument("--output", required=True, help="matrix CSV")
    p.add_argument("--screen", default=None,
                   help="also write the partial-coherence screen to this CSV")
    p.add_argument("--ridge", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")

    p = sub.add_parser("estimate", help="run one solver on a matrix or sample table")
    p.add_argument("--input", required=True,
                   help="matrix CSV (header = labels) or, with --samples, an n x p table")
    p.add_argument("--samples", action="store_true",
                   help="input rows are samples rather than a p x p matrix")
    p.add_argument("--assume-centered", action="store_true",
                   help="samples are zero-mean; skip removing column means")
    p.add_argument("--solver", choices=SOLVER_IDS, default="glasso")
    _add_solver_args(p)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--seed", type=int, default=0, help="fold assignment for --lam cv")

    p = sub.add_parser("pipeline", help="panel to connectivity artifacts")
    _add_panel_args(p)
    _add_band_args(p)
    p.add_argument("--solver", choices=SOLVER_IDS, default="glasso")
    _add_solver_args(p)
    p.add_argument("--edge-threshold", type=float, default=0.1)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--no-copula", dest="copula", action="store_false")
    p.add_argument("--seed", type=int, default=0, help="fold assignment for --lam cv")

    p = sub.add_parser("rerun", help="repeat a pipeline run from its manifest")
    p.add_argument("manifest")
    p.add_argument("--output-dir", default=None, help="default: the recorded one")
    p.add_argument("--seed", type=int, default=None, help="override the recorded seed")

    p = sub.add_parser("simulate", help="replicated solver benchmark")
    p.add_argument("--model", choices=(*MODELS, "both"), default="both")
    p.add_argument("--reps", type=_positive_int, default=100)
    p.add_argument("--n-samples", type=_positive_int, default=200)
    p.add_argument("--p", type=_positive_int, default=18)
    p.add_argument("--block-size", type=_positive_int, default=6)
    p.add_argument("--n-blocks", type=_positive_int, default=None,
                   help="default p / block_size")
    p.add_argument("--edge-prob", type=float, default=0.02)
    p.add_argument("--solvers", nargs="+", choices=SOLVER_IDS, default=list(SOLVER_IDS))
    _add_solver_args(p, max_outer=BENCH_MAX_OUTER_ITERS)
    p.add_argument("--output-dir", default=".")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    return parser


def cmd_transform(args):
    panel = load_panel(args.input, args.format, args.sampling_rate)
    out = panel.with_data(to_gaussian_panel(panel.data))
    save_panel(out, args.output, args.output_format or args.format)
    print(f"wrote {args.output}")


def cmd_spectrum(args):
    panel = load_panel(args.input, args.format, args.sampling_rate)
    if args.copula:
        panel = panel.with_data(to_gaussian_panel(panel.data))
    band = _band(args, panel.sampling_rate) or FrequencyBand.full(panel.sampling_rate)
    band.check(panel.nyquist)
    sd = estimate_spectrum(panel, args.taper_count)
    write_matrix_csv(band_collapse(sd, band), panel.channel_labels, args.output)
    print(f"wrote {args.output}")
    if args.screen:
        write_matrix_csv(partial_coherence_screen(sd, band, args.ridge),
                         panel.channel_labels, args.screen)
        print(f"wrote {args.screen}")


def _read_samples(path):
    with open(path) as fh:
        labels = [h.strip() for h in fh.readline().split(",")]
    x = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return x, labels


def cmd_estimate(args):
    out = Path(args.output_dir)
    if args.samples:
        x, labels = _read_samples(args.input)
        if not args.assume_centered:
            x = x - x.mean(axis=0)
        s = sample_covariance(x, assume_centered=True)
    else:
        s, labels = read_matrix_csv(args.input)
        s = sym(s)
        x = None
    cfg = _solver_config(args)
    lam, cv = args.lam, None
    if args.solver == "ledoit_wolf":
        if x is None:
            raise CggmError("ledoit_wolf needs sample rows; pass --samples")
        result = ledoit_wolf(x, assume_centered=True)
    else:
        if lam == "cv":
            if x is None:
                raise CggmError("--lam cv needs sample rows; pass --samples or a number")
            folds = kfold_covariances(x, args.n_folds, np.random.default_rng(args.seed),
                                      assume_centered=True)
            cv = cross_validate_lambda(folds, default_grid(), args.solver, cfg)
            lam = cv.lam
        result = SOLVERS[args.solver](s, cfg.replace(lam=float(lam)))
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(result.estimate, labels, out / f"{result.estimate_kind}.csv")
    summary = {
        "solver": args.solver,
        "estimate_kind": result.estimate_kind,
        "lambda": result.lam,
        "objective": result.objective,
        "iterations": result.iterations,
        "converged": result.converged,
        "wall_time": result.wall_time,
        "cv": None if cv is None else {
            "grid": [float(g) for g in cv.grid],
            "mean_scores": [float(v) for v in cv.mean_scores]},
    }
    (out / "result.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"{args.solver}: lambda={result.lam:.6g} objective={result.objective:.6g} "
          f"iterations={result.iterations} converged={result.converged}")


def _report(result):
    m = result["manifest"]["solver"]
    print(f"{m['name']}: lambda={m['lambda']:.6g} iterations={m['iterations']} "
          f"converged={m['converged']} edges={len(result['edges'])}")
    for name, path in result["paths"].items():
        print(f"  {name}: {path}")


def cmd_pipeline(args):
    rate = args.sampling_rate
    band = None
    if args.band_low is not None or args.band_high is not None:
        high = args.band_high
        if high is None:
            high = load_panel(args.input, args.format, rate).nyquist
        band = FrequencyBand(args.band_low or 0.0, high, args.band_name)
    cfg = RunConfig(
        input=args.input, output_dir=args.output_dir, format=args.format,
        sampling_rate=rate, band=band, solver=args.solver, lam=args.lam,
        solver_config=_solver_config(args), taper_count=args.taper_count,
        edge_threshold=args.edge_threshold, seed=args.seed, n_folds=args.n_folds,
        copula=args.copula)
    _report(run_pipeline(cfg))


def cmd_rerun(args):
    manifest = json.loads(Path(args.manifest).read_text())
    cfg = RunConfig.from_dict(manifest["config"])
    if args.output_dir is not None:
        cfg.output_dir = args.output_dir
    if args.seed is not None:
        cfg.seed = args.seed
    _report(run_pipeline(cfg))


def cmd_simulate(args):
    models = MODELS if args.model == "both" else (args.model,)
    out = Path(args.output_dir)
    cfg = _solver_config(args)
    policy = args.lam
    report = None
    for model in models:
        if model == "cliques":
            n_blocks = args.n_blocks or max(1, args.p // args.block_size)
            spec = GeneratorSpec("cliques", args.p, args.block_size, n_blocks,
                                 args.edge_prob)
        else:
            spec = GeneratorSpec("random", args.p, edge_prob=args.edge_prob)

        def progress(rep, model=model):
            if not args.quiet:
                print(f"\r{model}: replication {rep + 1}/{args.reps}", end="",
                      file=sys.stderr, flush=True)

        part = run_benchmark(spec, args.solvers, args.n_samples, args.reps, policy,
                             seed=args.seed, cfg=cfg, n_folds=args.n_folds,
                             progress=progress)
        if not args.quiet:
            print(file=sys.stderr)
        report = part if report is None else report.merge(part)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bench_report.json").write_text(report.to_json())
    (out / "bench_report.txt").write_text(report.to_text())
    print(report.to_text(), end="")
    print(f"wrote {out / 'bench_report.json'} and {out / 'bench_report.txt'}")
    return report


COMMANDS = {
    "transform": cmd_transform,
    "spectrum": cmd_spectrum,
    "estimate": cmd_estimate,
    "pipeline": cmd_pipeline,
    "rerun": cmd_rerun,
    "simulate": cmd_simulate,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        COMMANDS[args.command](args)
    except (CggmError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
