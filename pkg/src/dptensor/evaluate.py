"""RMSE evaluation and the privacy-accuracy experiment harness.

An experiment is a grid of (mechanism, epsilon) points crossed with one or
more missing ratios, repeated with fresh seeds, on either synthetic data or
a MovieLens-100K partition.  Every run gets a seed derived from the root
seed and its grid coordinates, so reruns reproduce the same numbers row for
row regardless of how the sweep is ordered or interrupted.

Synthetic RMSE is measured against the noiseless truth at held-out
indices.  MovieLens RMSE is measured against held-out ratings in raw
rating units (predictions mapped back through the bi-scaling transform),
with the scaled-unit figure recorded alongside in its own column.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .datasets import (
    RatingDataset,
    SyntheticSpec,
    apply_biscale,
    biscale,
    gen_synthetic,
    invert_biscale,
    load_ml100k,
)
from .exceptions import ConfigError, DivergenceError
from .pipelines import BACKBONES, CompletionResult, DpConfig, run_pipeline
from .solvers import FitConfig
from .tensor_ops import ObservedTensor

__all__ = [
    "rmse",
    "evaluate_rmse",
    "ResultRow",
    "RESULT_COLUMNS",
    "Ml100kSource",
    "ExperimentConfig",
    "run_experiment",
    "emit_report",
    "summarize",
    "load_experiment_config",
    "EPS_GRID_LINEAR",
    "EPS_GRID_LOG",
    "BENCH_CLIP_M",
    "BENCH_LIPSCHITZ",
    "ML100K_CLIP_M",
    "SYNTH_FIT_CONFIGS",
    "ML100K_FIT_CONFIGS",
    "benchmark_points",
    "benchmark_config",
]


def rmse(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Root mean squared error between two equal-length vectors."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise ValueError("rmse of an empty set is undefined")
    diff = y_true - y_pred
    return float(np.sqrt(diff @ diff / diff.size))


def evaluate_rmse(
    result: CompletionResult,
    test: ObservedTensor,
    truth: np.ndarray | None = None,
) -> float:
    """RMSE of a completion result over held-out entries.

    With a dense ``truth`` array the reference values are gathered at the
    test indices (the synthetic convention); otherwise the test set's own
    values serve as reference (the ratings convention).
    """
    if test.n_obs == 0:
        raise ValueError("empty test set")
    idx = test.indices
    pred = result.model.entry_values(idx)
    if truth is None:
        ref = test.values
    else:
        ref = truth[idx[:, 0], idx[:, 1], idx[:, 2]]
    return rmse(ref, pred)


# ---------------------------------------------------------------------------
# result rows and experiment configuration

RESULT_COLUMNS = (
    "mechanism",
    "backbone",
    "epsilon",
    "missing_ratio",
    "repetition",
    "seed",
    "rmse",
    "rmse_scaled",
    "runtime_seconds",
    "diverged",
)


@dataclass(frozen=True)
class ResultRow:
    """One completed (or diverged) pipeline run.

    ``rmse_scaled`` is only set for ratings data (RMSE in bi-scaled units);
    diverged rows carry no RMSE at all.
    """

    mechanism: str
    backbone: str
    epsilon: float | None
    missing_ratio: float
    repetition: int
    seed: int
    rmse: float | None
    rmse_scaled: float | None
    runtime_seconds: float
    diverged: bool = False


@dataclass(frozen=True)
class Ml100kSource:
    """Pointer to a MovieLens-100K directory and canonical partition."""

    root: str
    split: str = "ua"
    biscale: bool = True

    def __post_init__(self):
        if self.split not in ("ua", "ub"):
            raise ConfigError(f"split must be 'ua' or 'ub', got {self.split!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """A full sweep: dataset, backbone, fit settings, and privacy points.

    Exactly one of ``synthetic`` / ``ml100k`` selects the dataset.  The fit
    config's seed field is ignored; every run gets a seed derived from
    ``seed`` and its grid position.  ``missing_ratios`` (synthetic only)
    overrides the dataset's own missing ratio, one sweep per value.  With
    ``baseline``
    set, a mechanism-none run is added once per (ratio, repetition) unless
    the points already include one.
    """

    backbone: str
    fit: FitConfig
    points: tuple[DpConfig, ...]
    repetitions: int = 1
    synthetic: SyntheticSpec | None = None
    ml100k: Ml100kSource | None = None
    missing_ratios: tuple[float, ...] = ()
    baseline: bool = True
    seed: int = 0
    outdir: str | None = None
    max_seconds: float | None = None

    def __post_init__(self):
        if self.backbone not in BACKBONES:
            raise ConfigError(f"backbone must be one of {BACKBONES}, got {self.backbone!r}")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if (self.synthetic is None) == (self.ml100k is None):
            raise ConfigError("exactly one of synthetic/ml100k must be set")
        if not self.points and not self.baseline:
            raise ConfigError("experiment needs at least one sweep point")
        if self.missing_ratios:
            if self.ml100k is not None:
                raise ConfigError("missing_ratios only applies to synthetic data")
            for mr in self.missing_ratios:
                if not 0.0 <= mr < 1.0:
                    raise ConfigError(f"missing ratio {mr} outside [0, 1)")
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "missing_ratios", tuple(self.missing_ratios))


def _child_seed(*key: int) -> int:
    """Stable 64-bit seed from the root seed and grid coordinates."""
    return int(np.random.SeedSequence(key).generate_state(1, np.uint64)[0])


# tags keeping data-stream and run-stream seed keys disjoint
_DATA_TAG = 1
_RUN_TAG = 2


def _run_points(cfg: ExperimentConfig) -> tuple[DpConfig, ...]:
    points = cfg.points
    if cfg.baseline and not any(p.mechanism == "none" for p in points):
        points = (DpConfig(),) + points
    return points


def _synthetic_case(cfg, mr, mr_i, rep):
    spec = replace(
        cfg.synthetic,
        backbone=cfg.backbone,
        missing_ratio=mr,
        seed=_child_seed(cfg.seed, _DATA_TAG, mr_i, rep),
    )
    data = gen_synthetic(spec)
    return data.train, data.test, data.truth, None


class _Ml100kCase:
    """ML-100K data prepared once and reused across repetitions."""

    def __init__(self, source: Ml100kSource):
        ds: RatingDataset = load_ml100k(source.root, source.split)
        self.raw_test = ds.test
        if source.biscale:
            self.train, self.params = biscale(ds.train)
            self.test = apply_biscale(ds.test, self.params)
        else:
            self.train, self.params = ds.train, None
            self.test = ds.test
        total = ds.train.shape[0] * ds.train.shape[1] * ds.train.shape[2]
        self.missing_ratio = round(1.0 - ds.train.n_obs / total, 6)


def _evaluate(result, test, truth, case):
    """Returns (rmse, rmse_scaled) for one finished run."""
    if case is None:
        return evaluate_rmse(result, test, truth), None
    scaled = evaluate_rmse(result, case.test)
    if case.params is None:
        return scaled, None
    pred = result.model.entry_values(case.test.indices)
    raw = invert_biscale(pred, case.test.indices, case.params)
    return rmse(case.raw_test.values, raw), scaled


def run_experiment(cfg: ExperimentConfig, *, progress=None) -> list[ResultRow]:
    """Execute the sweep; returns one row per run, flushing incrementally.

    When ``cfg.outdir`` is set, rows are appended to results.csv as they
    finish, so an interrupted sweep leaves usable partial output.  A
    diverged run is recorded in its row and does not abort the sweep.
    ``progress`` is an optional callback receiving each finished row.
    """
    points = _run_points(cfg)
    if cfg.ml100k is not None:
        case = _Ml100kCase(cfg.ml100k)
        ratios = (case.missing_ratio,)
    else:
        case = None
        ratios = cfg.missing_ratios or (cfg.synthetic.missing_ratio,)

    writer = None
    handle = None
    if cfg.outdir is not None:
        outdir = Path(cfg.outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        handle = open(outdir / "results.csv", "w", newline="")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)

    rows: list[ResultRow] = []
    started = time.monotonic()
    out_of_time = False
    try:
        for mr_i, mr in enumerate(ratios):
            if out_of_time:
                break
            for rep in range(cfg.repetitions):
                if out_of_time:
                    break
                if case is None:
                    train, test, truth, _ = _synthetic_case(cfg, mr, mr_i, rep)
                else:
                    train, test, truth = case.train, case.test, None
                for p_i, dp in enumerate(points):
                    if (
                        cfg.max_seconds is not None
                        and time.monotonic() - started > cfg.max_seconds
                    ):
                        out_of_time = True
                        break
                    run_seed = _child_seed(cfg.seed, _RUN_TAG, mr_i, rep, p_i)
                    fit_cfg = replace(cfg.fit, seed=run_seed)
                    t0 = time.perf_counter()
                    try:
                        result = run_pipeline(train, cfg.backbone, fit_cfg, dp)
                        err, err_scaled = _evaluate(result, test, truth, case)
                        diverged = False
                    except DivergenceError:
                        err, err_scaled = None, None
                        diverged = True
                    row = ResultRow(
                        mechanism=dp.mechanism,
                        backbone=cfg.backbone,
                        epsilon=dp.epsilon,
                        missing_ratio=mr,
                        repetition=rep,
                        seed=run_seed,
                        rmse=err,
                        rmse_scaled=err_scaled,
                        runtime_seconds=time.perf_counter() - t0,
                        diverged=diverged,
                    )
                    rows.append(row)
                    if writer is not None:
                        writer.writerow(_row_cells(row))
                        handle.flush()
                    if progress is not None:
                        progress(row)
    finally:
        if handle is not None:
            handle.close()
    return rows


# ---------------------------------------------------------------------------
# report emission


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _row_cells(row: ResultRow) -> list[str]:
    return [
        row.mechanism,
        row.backbone,
        _fmt(row.epsilon),
        _fmt(row.missing_ratio),
        str(row.repetition),
        str(row.seed),
        _fmt(row.rmse),
        _fmt(row.rmse_scaled),
        f"{row.runtime_seconds:.3f}",
        str(int(row.diverged)),
    ]


def _sort_key(row: ResultRow):
    eps = -1.0 if row.epsilon is None else row.epsilon
    return (row.backbone, row.mechanism, eps, row.missing_ratio, row.repetition)


def summarize(rows: list[ResultRow]) -> list[tuple]:
    """Per-(backbone, mechanism, epsilon, ratio) count, mean, population std.

    Diverged rows are excluded; a point where every repetition diverged is
    dropped entirely.
    """
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        if row.diverged or row.rmse is None:
            continue
        key = (row.backbone, row.mechanism, row.epsilon, row.missing_ratio)
        groups.setdefault(key, []).append(row.rmse)
    out = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], -1.0 if k[2] is None else k[2], k[3])):
        vals = np.array(groups[key])
        out.append((*key, vals.size, float(vals.mean()), float(vals.std(ddof=0))))
    return out


def emit_report(rows: list[ResultRow], outdir) -> dict[str, Path]:
    """Write results.csv, summary.csv, and a plotting script to outdir.

    Rows are sorted canonically before writing so output is deterministic
    regardless of execution order.  The plot script is standalone: it reads
    the CSVs beside it and needs only matplotlib.
    """
    if not rows:
        raise ValueError("no result rows to report")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    results_path = outdir / "results.csv"
    with open(results_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for row in sorted(rows, key=_sort_key):
            writer.writerow(_row_cells(row))

    summary_path = outdir / "summary.csv"
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ("backbone", "mechanism", "epsilon", "missing_ratio", "n", "rmse_mean", "rmse_std")
        )
        for backbone, mech, eps, mr, n, mean, std in summarize(rows):
            writer.writerow([backbone, mech, _fmt(eps), _fmt(mr), str(n), _fmt(mean), _fmt(std)])

    plot_path = outdir / "plot_results.py"
    plot_path.write_text(_PLOT_SCRIPT)
    return {"results": results_path, "summary": summary_path, "plot": plot_path}


_PLOT_SCRIPT = '''\
#!/usr/bin/env python3
"""Render mean-RMSE curves with +/- 1 std bands from results.csv.

Run from the directory holding results.csv (or pass it as argv[1]).
Produces rmse_vs_epsilon.png and, when several missing ratios are present,
rmse_vs_missing_ratio.png.
"""
import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load_rows(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        if r["diverged"] == "1" or not r["rmse"]:
            continue
        out.append(
            (
                r["mechanism"],
                r["backbone"],
                float(r["epsilon"]) if r["epsilon"] else None,
                float(r["missing_ratio"]),
                float(r["rmse"]),
            )
        )
    return out


def stats(values):
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return mean, var ** 0.5


def curve(points):
    xs = sorted(points)
    means, stds = [], []
    for x in xs:
        m, s = stats(points[x])
        means.append(m)
        stds.append(s)
    return xs, means, stds


def main():
    path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("results.csv")
    rows = load_rows(path)
    if not rows:
        sys.exit(f"no usable rows in {path}")
    backbones = sorted({r[1] for r in rows})
    ratios = sorted({r[3] for r in rows})
    focus_mr = ratios[len(ratios) // 2]

    fig, axes = plt.subplots(1, len(backbones), figsize=(6 * len(backbones), 4.5), squeeze=False)
    for ax, backbone in zip(axes[0], backbones):
        per_mech = defaultdict(lambda: defaultdict(list))
        base = []
        for mech, bb, eps, mr, err in rows:
            if bb != backbone or mr != focus_mr:
                continue
            if mech == "none":
                base.append(err)
            elif eps is not None:
                per_mech[mech][eps].append(err)
        for mech in sorted(per_mech):
            xs, means, stds = curve(per_mech[mech])
            ax.plot(xs, means, marker="o", label=mech)
            ax.fill_between(
                xs,
                [m - s for m, s in zip(means, stds)],
                [m + s for m, s in zip(means, stds)],
                alpha=0.25,
            )
        if base:
            m, _ = stats(base)
            ax.axhline(m, color="k", linestyle="--", linewidth=1, label="baseline")
        ax.set_xlabel("epsilon")
        ax.set_ylabel("RMSE")
        ax.set_title(f"{backbone}, missing ratio {focus_mr}")
        ax.set_xscale("log")
        ax.legend()
    fig.tight_layout()
    fig.savefig(path.parent / "rmse_vs_epsilon.png", dpi=150)

    if len(ratios) > 1:
        fig, axes = plt.subplots(1, len(backbones), figsize=(6 * len(backbones), 4.5), squeeze=False)
        for ax, backbone in zip(axes[0], backbones):
            per_mech = defaultdict(lambda: defaultdict(list))
            for mech, bb, eps, mr, err in rows:
                if bb != backbone:
                    continue
                per_mech[mech][mr].append(err)
            for mech in sorted(per_mech):
                xs, means, stds = curve(per_mech[mech])
                ax.plot(xs, means, marker="o", label=mech)
                ax.fill_between(
                    xs,
                    [m - s for m, s in zip(means, stds)],
                    [m + s for m, s in zip(means, stds)],
                    alpha=0.25,
                )
            ax.set_xlabel("missing ratio")
            ax.set_ylabel("RMSE")
            ax.set_title(backbone)
            ax.legend()
        fig.tight_layout()
        fig.savefig(path.parent / "rmse_vs_missing_ratio.png", dpi=150)


if __name__ == "__main__":
    main()
'''


# ---------------------------------------------------------------------------
# benchmark defaults

# privacy grids: linear for input/output, exponential magnitudes for gradient
EPS_GRID_LINEAR = tuple(round(0.1 * k, 1) for k in range(1, 11))
EPS_GRID_LOG = (1e-3, 1e-2, 1e-1, 1.0)

BENCH_CLIP_M = 0.1
BENCH_LIPSCHITZ = 1.0
# ratings clip bound: clipping this loosely keeps gradient perturbation a
# perturbation (tight bounds act as extra regularization and can beat the
# non-private fit on held-out data, which muddies mechanism comparisons)
ML100K_CLIP_M = 1.0

SYNTH_FIT_CONFIGS = {
    "cp": FitConfig(rank=3, lr=0.005, epochs=100, reg_factors=0.01),
    "tucker": FitConfig(rank=3, lr=0.005, epochs=100, reg_factors=0.001, reg_core=0.0001),
}
ML100K_FIT_CONFIGS = {
    "cp": FitConfig(rank=3, lr=0.005, epochs=100, reg_factors=0.01),
    "tucker": FitConfig(rank=3, lr=0.003, epochs=100, reg_factors=0.01, reg_core=0.001),
}


def benchmark_points(
    *,
    input_grid=EPS_GRID_LINEAR,
    gradient_grid=EPS_GRID_LOG,
    output_grid=EPS_GRID_LINEAR,
    clip_m: float = BENCH_CLIP_M,
    lipschitz: float = BENCH_LIPSCHITZ,
) -> tuple[DpConfig, ...]:
    """The standard three-mechanism sweep grid.

    Input points clamp the noisy values back to the observed range; without
    that, per-entry SGD blows up once the noise scale dwarfs the data
    (small epsilon turns a [0,1]-valued tensor into one with entries in the
    hundreds).
    """
    points = [
        DpConfig(mechanism="input", epsilon=e, clamp_after_input="observed")
        for e in input_grid
    ]
    points += [
        DpConfig(mechanism="gradient", epsilon=e, clip_m=clip_m) for e in gradient_grid
    ]
    points += [
        DpConfig(mechanism="output", epsilon=e, lipschitz=lipschitz) for e in output_grid
    ]
    return tuple(points)


def benchmark_config(
    backbone: str,
    *,
    repetitions: int = 50,
    seed: int = 0,
    outdir: str | None = None,
    missing_ratios: tuple[float, ...] = (),
    max_seconds: float | None = None,
) -> ExperimentConfig:
    """The 20x20x20 rank-3 SNR-1 benchmark sweep for one backbone."""
    if backbone not in SYNTH_FIT_CONFIGS:
        raise ConfigError(f"backbone must be one of {BACKBONES}, got {backbone!r}")
    return ExperimentConfig(
        backbone=backbone,
        fit=SYNTH_FIT_CONFIGS[backbone],
        points=benchmark_points(),
        repetitions=repetitions,
        synthetic=SyntheticSpec(backbone=backbone),
        missing_ratios=missing_ratios,
        seed=seed,
        outdir=outdir,
        max_seconds=max_seconds,
    )


# ---------------------------------------------------------------------------
# config files


def _build_fit(doc: dict) -> FitConfig:
    known = {"rank", "lr", "epochs", "reg_factors", "reg_core", "shuffle"}
    _reject_unknown(doc, known, "fit")
    try:
        return FitConfig(
            rank=int(doc["rank"]),
            lr=float(doc["lr"]),
            epochs=int(doc["epochs"]),
            reg_factors=float(doc.get("reg_factors", 0.0)),
            reg_core=float(doc.get("reg_core", 0.0)),
            shuffle=bool(doc.get("shuffle", True)),
        )
    except KeyError as exc:
        raise ConfigError(f"fit config missing key {exc.args[0]!r}") from None


def _build_points(doc: dict) -> tuple[DpConfig, ...]:
    points = []
    for mech, opts in doc.items():
        if not isinstance(opts, dict):
            raise ConfigError(f"mechanism {mech!r} options must be a mapping")
        known = {"epsilons", "clip_m", "lipschitz", "clamp"}
        _reject_unknown(opts, known, f"mechanism {mech!r}")
        epsilons = opts.get("epsilons")
        if not epsilons:
            raise ConfigError(f"mechanism {mech!r} needs a non-empty epsilons list")
        clamp = opts.get("clamp")
        if isinstance(clamp, list):
            clamp = tuple(clamp)
        for eps in epsilons:
            points.append(
                DpConfig(
                    mechanism=mech,
                    epsilon=float(eps),
                    clip_m=opts.get("clip_m"),
                    lipschitz=opts.get("lipschitz"),
                    clamp_after_input=clamp,
                )
            )
    return tuple(points)


def _build_dataset(doc: dict):
    kind = doc.get("kind")
    if kind == "synthetic":
        known = {"kind", "dims", "rank", "snr", "missing_ratio", "test_fraction", "seed"}
        _reject_unknown(doc, known, "dataset")
        return (
            SyntheticSpec(
                dims=tuple(doc.get("dims", (20, 20, 20))),
                rank=int(doc.get("rank", 3)),
                snr=float(doc.get("snr", 1.0)),
                missing_ratio=float(doc.get("missing_ratio", 0.5)),
                test_fraction=float(doc.get("test_fraction", 0.2)),
            ),
            None,
        )
    if kind == "ml100k":
        known = {"kind", "root", "split", "biscale"}
        _reject_unknown(doc, known, "dataset")
        if "root" not in doc:
            raise ConfigError("ml100k dataset needs a 'root' directory")
        return (
            None,
            Ml100kSource(
                root=str(doc["root"]),
                split=doc.get("split", "ua"),
                biscale=bool(doc.get("biscale", True)),
            ),
        )
    raise ConfigError(f"dataset kind must be 'synthetic' or 'ml100k', got {kind!r}")


def _reject_unknown(doc: dict, known: set, where: str):
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


def load_experiment_config(path) -> ExperimentConfig:
    """Parse an experiment config from a JSON (or YAML) file.

    Top-level keys: backbone, dataset, fit, mechanisms, repetitions,
    missing_ratios, baseline, seed, outdir, max_seconds.  ``mechanisms``
    maps mechanism names to {epsilons: [...], clip_m, lipschitz, clamp}.
    YAML needs the optional pyyaml dependency.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix in (".yml", ".yaml"):
        try:
            import yaml
        except ImportError:
            raise ConfigError("reading YAML configs requires the pyyaml package") from None
        doc = yaml.safe_load(text)
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config root must be a mapping")

    known = {
        "backbone",
        "dataset",
        "fit",
        "mechanisms",
        "repetitions",
        "missing_ratios",
        "baseline",
        "seed",
        "outdir",
        "max_seconds",
    }
    _reject_unknown(doc, known, "config")
    for key in ("backbone", "dataset", "fit"):
        if key not in doc:
            raise ConfigError(f"config missing required key {key!r}")
    synthetic, ml100k = _build_dataset(doc["dataset"])
    max_seconds = doc.get("max_seconds")
    return ExperimentConfig(
        backbone=doc["backbone"],
        fit=_build_fit(doc["fit"]),
        points=_build_points(doc.get("mechanisms", {})),
        repetitions=int(doc.get("repetitions", 1)),
        synthetic=synthetic,
        ml100k=ml100k,
        missing_ratios=tuple(float(m) for m in doc.get("missing_ratios", ())),
        baseline=bool(doc.get("baseline", True)),
        seed=int(doc.get("seed", 0)),
        outdir=doc.get("outdir"),
        max_seconds=None if max_seconds is None else float(max_seconds),
    )
