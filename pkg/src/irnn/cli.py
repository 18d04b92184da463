"""Command-line interface.

Subcommands:

* ``bench phase``     noise-free recovery sweep over a rank grid
* ``bench noisy``     noisy recovery sweep (mean relative error)
* ``complete``        recover one matrix from an observed-entry CSV
* ``inpaint``         image recovery from random corruption or a text mask
* ``penalty curves``  sample penalty values and supergradients to CSV

Options can also come from a TOML file via ``--config``; explicit flags
override file values, which override built-in defaults.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import bench as bench_mod
from .baselines import ConvexConfig, solve_convex
from .imaging import ImageBuffer, apply_text_mask, corrupt_random, inpaint, psnr
from .losses import load_triplets, save_dense
from .penalties import PENALTY_KINDS, Penalty, supergradient, value
from .solver import (
    ContinuationSchedule,
    SolverConfig,
    noise_free_config,
    solve,
)

__all__ = ["main"]


class _UsageError(Exception):
    pass


def _parse_ranks(text):
    if isinstance(text, (list, tuple)):
        return tuple(int(r) for r in text)
    text = str(text).strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _parse_grid(text):
    start, stop, step = (float(tok) for tok in str(text).split(":"))
    if step <= 0 or stop < start:
        raise ValueError(f"bad grid spec {text!r}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


class _Resolver:
    """Flags beat TOML values beat defaults."""

    def __init__(self, args):
        self.args = vars(args)
        self.toml = {}
        path = self.args.get("config")
        if path:
            with open(path, "rb") as fh:
                self.toml = tomllib.load(fh)

    def get(self, key, default=None):
        v = self.args.get(key)
        if v is not None:
            return v
        if key in self.toml:
            return self.toml[key]
        return default

    def require(self, key, hint):
        v = self.get(key)
        if v is None:
            raise _UsageError(f"{hint} is required (flag or config file)")
        return v


def _build_penalty(res: _Resolver, lam: float = 1.0) -> Penalty:
    return Penalty(
        kind=str(res.get("penalty", "lp")),
        lam=lam,
        gamma=res.get("gamma"),
        p=res.get("p"),
        trunc_rank=res.get("trunc_rank"),
    )


def _add_penalty_flags(p):
    p.add_argument("--penalty", help="penalty kind (default lp)")
    p.add_argument("--gamma", type=float, help="shape parameter")
    p.add_argument("--p", type=float, dest="p", help="lp exponent in (0,1)")
    p.add_argument("--trunc-rank", type=int, dest="trunc_rank")


def _add_solver_flags(p):
    p.add_argument("--mu", type=float, help="proximal step constant (default 1.1)")
    p.add_argument("--eta", type=float, help="continuation decay (default 0.7)")
    p.add_argument("--max-iters", type=int, dest="max_iters")


def _cmd_bench(args, noisy: bool) -> int:
    res = _Resolver(args)
    seed = int(res.require("seed", "--seed"))
    spec = bench_mod.ExperimentSpec(
        m=int(res.get("m", 60)),
        n=int(res.get("n", 60)),
        rank_grid=_parse_ranks(res.get("ranks", "3..12")),
        trials=int(res.get("trials", 20)),
        observe_fraction=float(res.get("observe_fraction", 0.5)),
        penalty=_build_penalty(res),
        seed=seed,
        noise_sigma=float(res.get("noise_sigma", 0.1)) if noisy else 0.0,
        mu=float(res.get("mu", 1.1)),
        eta=float(res.get("eta", 0.7)),
        max_iters=int(res.get("max_iters", 500)),
        success_threshold=float(res.get("success_threshold", 1e-3)),
    )
    out_dir = Path(res.get("out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    result = bench_mod.run_experiment(spec)
    label = spec.penalty.kind
    trials_path = out_dir / f"{label}_trials.csv"
    agg_path = out_dir / f"{label}_aggregate.csv"
    result.to_csv(trials_path)
    result.aggregate_to_csv(agg_path)
    for rank, (freq, err) in sorted(result.aggregates().items()):
        print(f"rank {rank:3d}: success {freq:.2f}  mean rel error {err:.3e}")
    print(f"wrote {trials_path}")
    print(f"wrote {agg_path}")
    return 0


def _cmd_complete(args) -> int:
    res = _Resolver(args)
    problem = load_triplets(res.require("input", "--input"))
    out_path = res.require("out", "--out")
    mu = float(res.get("mu", 1.1))
    eta = float(res.get("eta", 0.7))
    max_iters = int(res.get("max_iters", 500))

    algorithm = str(res.get("algorithm", "irnn"))
    if algorithm == "apg":
        lam = res.require("fixed_lambda", "--fixed-lambda (for --algorithm apg)")
        cfg = ConvexConfig(
            lam=float(lam),
            max_iters=max_iters,
            tol=float(res.get("stop_step", 1e-8)),
            acceleration=bool(res.get("acceleration", True)),
        )
        report = solve_convex(problem, cfg)
    else:
        config = noise_free_config(problem, mu=mu, eta=eta, max_iters=max_iters)
        fixed = res.get("fixed_lambda")
        if fixed is not None:
            config = dataclasses.replace(
                config, lam_fixed=float(fixed), schedule=None
            )
        else:
            lam0 = res.get("lambda0")
            lam_t = res.get("lambda_target")
            if lam0 is not None or lam_t is not None:
                lam0 = float(lam0) if lam0 is not None else config.schedule.lam0
                lam_t = float(lam_t) if lam_t is not None else 1e-5 * lam0
                config = dataclasses.replace(
                    config, schedule=ContinuationSchedule(lam0, lam_t, eta)
                )
        stop_residual = res.get("stop_residual")
        if stop_residual is not None:
            config = dataclasses.replace(config, stop_residual=float(stop_residual))
        stop_step = res.get("stop_step")
        if stop_step is not None:
            config = dataclasses.replace(config, stop_step=float(stop_step))
        report = solve(problem, _build_penalty(res), config)

    save_dense(out_path, report.final_X)
    print(f"wrote {out_path} ({report.iterations} iterations, {report.termination})")
    trace = res.get("trace")
    if trace:
        report.to_csv(trace)
        print(f"wrote {trace}")
    return 0


def _cmd_inpaint(args) -> int:
    res = _Resolver(args)
    image = ImageBuffer.from_png(res.require("input", "--in"))
    mask_path = res.get("mask")
    random_fraction = res.get("random")
    if (mask_path is None) == (random_fraction is None):
        raise _UsageError("give exactly one of --mask and --random")

    if random_fraction is not None:
        seed = int(res.require("seed", "--seed (with --random)"))
        corrupted, mask = corrupt_random(image, float(random_fraction), seed)
        corrupted_view = corrupted
    else:
        corrupted, mask = apply_text_mask(image, ImageBuffer.from_png(mask_path))
        # Visualization of the missing set: masked pixels blanked.
        planes = image.planes.copy()
        planes[~mask] = 0.0
        corrupted_view = ImageBuffer(planes)

    recovered = inpaint(
        corrupted,
        mask,
        _build_penalty(res),
        mu=float(res.get("mu", 1.1)),
        eta=float(res.get("eta", 0.7)),
        max_iters=int(res.get("max_iters", 500)),
    )
    out_path = res.require("out", "--out")
    recovered.to_png(out_path)
    print(f"wrote {out_path}")

    save_corrupted = res.get("save_corrupted")
    if save_corrupted:
        corrupted_view.to_png(save_corrupted)
        print(f"wrote {save_corrupted}")

    psnr_corrupted = psnr(image, corrupted_view)
    psnr_recovered = psnr(image, recovered)
    print(f"psnr corrupted {psnr_corrupted:.2f} dB, recovered {psnr_recovered:.2f} dB")
    report_path = res.get("report")
    if report_path:
        with open(report_path, "w", newline="") as fh:
            fh.write("stage,psnr\n")
            fh.write(f"corrupted,{psnr_corrupted!r}\n")
            fh.write(f"recovered,{psnr_recovered!r}\n")
        print(f"wrote {report_path}")
    return 0


def _cmd_penalty_curves(args) -> int:
    res = _Resolver(args)
    kind = str(res.require("kind", "--kind"))
    if kind in ("truncated", "truncated_nuclear", "tnn"):
        raise _UsageError("the truncated penalty is per-index, not a theta curve")
    pen = Penalty(
        kind=kind,
        lam=float(res.get("lam", 1.0)),
        gamma=res.get("gamma"),
        p=res.get("p"),
    )
    grid = _parse_grid(res.get("grid", "0:10:0.01"))
    out_path = res.require("out", "--out")
    vals = value(pen, grid)
    grads = supergradient(pen, grid)
    with open(out_path, "w", newline="") as fh:
        fh.write("theta,value,supergradient\n")
        for t, v, g in zip(grid, vals, grads):
            fh.write(f"{t!r},{v!r},{g!r}\n")
    print(f"wrote {out_path}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irnn", description="Nonconvex low-rank matrix recovery toolbox"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="synthetic recovery sweeps")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)
    for name, help_text in (
        ("phase", "noise-free success-frequency sweep"),
        ("noisy", "noisy mean-error sweep"),
    ):
        bp = bench_sub.add_parser(name, help=help_text)
        bp.add_argument("--config", help="TOML options file")
        bp.add_argument("--m", type=int)
        bp.add_argument("--n", type=int)
        bp.add_argument("--ranks", help="rank grid, e.g. 3..12 or 3,5,7")
        bp.add_argument("--trials", type=int)
        bp.add_argument("--observe-fraction", type=float, dest="observe_fraction")
        bp.add_argument("--seed", type=int, help="required for reproducibility")
        bp.add_argument("--success-threshold", type=float, dest="success_threshold")
        bp.add_argument("--out-dir", dest="out_dir")
        if name == "noisy":
            bp.add_argument("--noise-sigma", type=float, dest="noise_sigma")
        _add_penalty_flags(bp)
        _add_solver_flags(bp)

    comp = sub.add_parser("complete", help="complete one matrix from a triplet CSV")
    comp.add_argument("--config", help="TOML options file")
    comp.add_argument("--input", help="observed entries CSV (row,col,value)")
    comp.add_argument("--out", help="recovered matrix CSV")
    comp.add_argument("--trace", help="optional per-iteration trace CSV")
    comp.add_argument("--algorithm", choices=("irnn", "apg"))
    comp.add_argument("--fixed-lambda", type=float, dest="fixed_lambda")
    comp.add_argument("--lambda0", type=float, dest="lambda0")
    comp.add_argument("--lambda-target", type=float, dest="lambda_target")
    comp.add_argument("--stop-residual", type=float, dest="stop_residual")
    comp.add_argument("--stop-step", type=float, dest="stop_step")
    _add_penalty_flags(comp)
    _add_solver_flags(comp)

    inp = sub.add_parser("inpaint", help="recover an image from corruption")
    inp.add_argument("--config", help="TOML options file")
    inp.add_argument("--in", dest="input", help="input PNG (treated as ground truth)")
    inp.add_argument("--mask", help="PNG overlay; nonzero pixels are corrupted")
    inp.add_argument("--random", type=float, help="corrupt this fraction of pixels")
    inp.add_argument("--seed", type=int, help="required with --random")
    inp.add_argument("--out", help="recovered PNG")
    inp.add_argument("--report", help="PSNR report CSV")
    inp.add_argument("--save-corrupted", dest="save_corrupted", help="corrupted PNG")
    _add_penalty_flags(inp)
    _add_solver_flags(inp)

    pen = sub.add_parser("penalty", help="penalty utilities")
    pen_sub = pen.add_subparsers(dest="penalty_command", required=True)
    curves = pen_sub.add_parser("curves", help="sample value/supergradient curves")
    curves.add_argument("--config", help="TOML options file")
    curves.add_argument("--kind", choices=[k for k in PENALTY_KINDS if k != "truncated"])
    curves.add_argument("--lambda", type=float, dest="lam")
    curves.add_argument("--gamma", type=float)
    curves.add_argument("--p", type=float, dest="p")
    curves.add_argument("--grid", help="theta grid start:stop:step")
    curves.add_argument("--out", help="output CSV")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bench":
            return _cmd_bench(args, noisy=args.bench_command == "noisy")
        if args.command == "complete":
            return _cmd_complete(args)
        if args.command == "inpaint":
            return _cmd_inpaint(args)
        if args.command == "penalty":
            return _cmd_penalty_curves(args)
        parser.error(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
