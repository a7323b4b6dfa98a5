"""Command-line interface.

Subcommands:

    synth-sweep --config FILE      privacy-accuracy sweep on synthetic data
    ml100k --root DIR ...          one mechanism on a MovieLens-100K split
    fit --dataset FILE ...         one-off fit, model saved as flat binary
    predict --model FILE --index i,j,k

Exit codes: 0 success, 2 configuration error, 3 data error, 4 divergence.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .evaluate import (
    ExperimentConfig,
    Ml100kSource,
    ML100K_CLIP_M,
    ML100K_FIT_CONFIGS,
    emit_report,
    load_experiment_config,
    run_experiment,
    summarize,
)
from .exceptions import ConfigError, DataError, DivergenceError
from .modelio import load_entries, load_model, save_model
from .pipelines import BACKBONES, MECHANISMS, DpConfig, predict, run_pipeline
from .solvers import FitConfig

__all__ = ["main", "build_parser"]


def _print_summary(rows, file=None):
    # resolve stdout at call time so redirection after import is honoured
    if file is None:
        file = sys.stdout
    header = f"{'backbone':<8} {'mechanism':<9} {'epsilon':>9} {'missing':>8} {'n':>4} {'mean':>10} {'std':>10}"
    print(header, file=file)
    for backbone, mech, eps, mr, n, mean, std in summarize(rows):
        eps_s = "-" if eps is None else f"{eps:g}"
        print(
            f"{backbone:<8} {mech:<9} {eps_s:>9} {mr:>8g} {n:>4d} {mean:>10.4f} {std:>10.4f}",
            file=file,
        )
    n_div = sum(r.diverged for r in rows)
    if n_div:
        print(f"({n_div} diverged run(s) excluded)", file=file)


def _finish_experiment(cfg: ExperimentConfig, rows):
    if not rows:
        print("no runs completed", file=sys.stderr)
        return 0
    if cfg.outdir is not None:
        paths = emit_report(rows, cfg.outdir)
        print(f"wrote {len(rows)} rows to {paths['results']}")
    _print_summary(rows)
    return 0


def cmd_synth_sweep(args) -> int:
    cfg = load_experiment_config(args.config)
    if args.outdir is not None:
        cfg = replace(cfg, outdir=args.outdir)
    if args.max_seconds is not None:
        cfg = replace(cfg, max_seconds=args.max_seconds)
    if cfg.synthetic is None:
        raise ConfigError("synth-sweep requires a synthetic dataset config")
    rows = run_experiment(cfg)
    return _finish_experiment(cfg, rows)


def cmd_ml100k(args) -> int:
    if args.mechanism != "none" and args.epsilon is None:
        raise ConfigError(f"mechanism {args.mechanism!r} requires --epsilon")
    point = DpConfig(
        mechanism=args.mechanism,
        epsilon=args.epsilon,
        clip_m=args.clip_m,
        lipschitz=args.lipschitz,
        clamp_after_input="observed" if args.mechanism == "input" else None,
    )
    fit = ML100K_FIT_CONFIGS[args.backbone]
    if args.epochs is not None:
        fit = replace(fit, epochs=args.epochs)
    cfg = ExperimentConfig(
        backbone=args.backbone,
        fit=fit,
        points=() if args.mechanism == "none" else (point,),
        repetitions=args.reps,
        ml100k=Ml100kSource(root=args.root, split=args.split, biscale=not args.no_biscale),
        seed=args.seed,
        outdir=args.outdir,
    )
    rows = run_experiment(cfg)
    return _finish_experiment(cfg, rows)


def _parse_clamp(text):
    if text is None or text == "observed":
        return text
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"--clamp expects 'observed' or 'lo,hi', got {text!r}")
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError:
        raise ConfigError(f"--clamp bounds must be numbers, got {text!r}") from None


def cmd_fit(args) -> int:
    data = load_entries(args.dataset)
    fit_cfg = FitConfig(
        rank=args.rank,
        lr=args.lr,
        epochs=args.epochs,
        reg_factors=args.reg_factors,
        reg_core=args.reg_core,
        seed=args.seed,
    )
    dp_cfg = DpConfig(
        mechanism=args.mechanism,
        epsilon=args.epsilon,
        clip_m=args.clip_m,
        lipschitz=args.lipschitz,
        clamp_after_input=_parse_clamp(args.clamp),
    )
    result = run_pipeline(data, args.backbone, fit_cfg, dp_cfg)
    save_model(result.model, args.out)
    print(
        f"fit {args.backbone} rank {args.rank} on {data.n_obs} observations; "
        f"final objective {result.objectives[-1]:.6g}"
    )
    print(f"saved model to {args.out}")
    return 0


def _parse_index(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"--index expects 'i,j,k', got {text!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"--index parts must be integers, got {text!r}") from None


def cmd_predict(args) -> int:
    model = load_model(args.model)
    for text in args.index:
        i, j, k = _parse_index(text)
        try:
            print(f"{predict(model, i, j, k)!r}")
        except IndexError as exc:
            raise ConfigError(str(exc)) from None
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dptensor",
        description="Differentially private low-rank tensor completion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-sweep", help="run a sweep described by a config file")
    p.add_argument("--config", required=True, help="JSON or YAML experiment config")
    p.add_argument("--outdir", default=None, help="override the config's output directory")
    p.add_argument("--max-seconds", type=float, default=None, help="abort cleanly after this long")
    p.set_defaults(func=cmd_synth_sweep)

    p = sub.add_parser("ml100k", help="run one mechanism on a MovieLens-100K split")
    p.add_argument("--root", required=True, help="directory holding ua/ub rating files")
    p.add_argument("--split", choices=("ua", "ub"), default="ua")
    p.add_argument("--mechanism", choices=MECHANISMS, required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--backbone", choices=BACKBONES, default="cp")
    p.add_argument("--epochs", type=int, default=None, help="override the default epoch count")
    p.add_argument("--clip-m", dest="clip_m", type=float, default=ML100K_CLIP_M)
    p.add_argument("--lipschitz", type=float, default=1.0)
    p.add_argument("--no-biscale", action="store_true", help="skip bi-scaling")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outdir", default=None)
    p.set_defaults(func=cmd_ml100k)

    p = sub.add_parser("fit", help="fit one model and save it")
    p.add_argument("--dataset", required=True, help=".npy tensor (NaN = missing) or 'i j k value' text")
    p.add_argument("--backbone", choices=BACKBONES, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--epochs", type=int, required=True)
    p.add_argument("--lr", type=float, required=True)
    p.add_argument("--reg-factors", dest="reg_factors", type=float, default=0.0)
    p.add_argument("--reg-core", dest="reg_core", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mechanism", choices=MECHANISMS, default="none")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--clip-m", dest="clip_m", type=float, default=None)
    p.add_argument("--lipschitz", type=float, default=None)
    p.add_argument("--clamp", default=None, help="'observed' or 'lo,hi' clamp after input noise")
    p.add_argument("--out", required=True, help="model output path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="evaluate a saved model at given indices")
    p.add_argument("--model", required=True)
    p.add_argument("--index", action="append", required=True, help="i,j,k (repeatable)")
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
