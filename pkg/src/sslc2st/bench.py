"""
Monte-Carlo experiment harness.

One trial draws fresh samples with a trial-derived seed, trains the chosen
test, and runs the permutation test; an estimate aggregates rejections over
independent trials into a power (or type-I error) rate with a binomial
standard error. Sweeps cross a grid of cells and stream one CSV row per cell,
flushed as soon as it finishes. Trial i of a cell is a pure function of
(master seed, i), so grid order never changes any value, and trials may run
in parallel worker processes.
"""

from __future__ import annotations

import csv
import itertools
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, replace

import numpy as np

from .hdgm import LEVELS, build_dataset, hdgm_pair, sample_hdgm, shuffle_split
from .pipeline import (
    TrainConfig,
    default_train_config,
    extract_features,
    predict_labels,
    train_autoencoder,
    train_classifier,
    unlabeled_pool,
)
from .stats import TestOutcome, embedding_statistic, permutation_test

METHODS = ("c2st", "ssl-c2st", "c2st-m", "ssl-c2st-m")

CSV_COLUMNS = [
    "method", "dataset", "hypothesis", "d", "N", "unlabeled_fraction",
    "trials", "alpha", "rate", "stderr", "seed", "runtime_s",
]


class TrialFailed(RuntimeError):
    """A trial aborted; carries the trial index for context."""


class CellOverBudget(RuntimeError):
    """A cell exceeded its wall-clock budget; holds partial progress."""

    def __init__(self, completed: int, rejections: int, elapsed: float):
        super().__init__(f"cell over budget after {completed} trials ({elapsed:.1f}s)")
        self.completed = completed
        self.rejections = rejections
        self.elapsed = elapsed


@dataclass
class ExperimentConfig:
    """One cell of the benchmark grid."""

    dataset: str = "hdgm-hard"
    hypothesis: str = "H1"
    d: int = 10
    n_total: int = 4000
    method: str = "ssl-c2st"
    feature_layer: str = "p0_scalar"
    feature_norm: str = "abs_1d"
    train: TrainConfig | None = None
    n_perm: int = 100
    alpha: float = 0.05
    trials: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.level not in LEVELS:
            raise ValueError(f"unknown dataset {self.dataset!r}")
        if self.hypothesis not in ("H0", "H1"):
            raise ValueError(f"hypothesis must be H0 or H1, got {self.hypothesis!r}")
        if self.n_total % 4 != 0:
            raise ValueError("n_total must be divisible by 4 (2 clusters x 2 samples)")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.feature_norm == "abs_1d" and self.feature_layer != "p0_scalar":
            raise ValueError("abs_1d norm requires the single-column p0_scalar layer")
        if self.train is None:
            # Semi-supervised cells default to the frozen phase-2 mode (only
            # head parameters update after pretraining).
            self.train = default_train_config(
                self.d, freeze_encoder=self.method.startswith("ssl")
            )
        if self.train.encoder_widths[0] != self.d:
            raise ValueError(
                f"train config expects d={self.train.encoder_widths[0]}, cell has d={self.d}"
            )

    @property
    def level(self) -> str:
        return self.dataset.removeprefix("hdgm-")

    @property
    def unlabeled_fraction(self) -> float:
        return self.train.unlabeled_fraction

    def to_dict(self) -> dict:
        out = {
            "dataset": self.dataset,
            "hypothesis": self.hypothesis,
            "d": self.d,
            "n_total": self.n_total,
            "method": self.method,
            "feature_layer": self.feature_layer,
            "feature_norm": self.feature_norm,
            "train": self.train.to_dict(),
            "n_perm": self.n_perm,
            "alpha": self.alpha,
            "trials": self.trials,
            "seed": self.seed,
        }
        return out


@dataclass
class PowerEstimate:
    """Rejection frequency over repeated trials."""

    rejections: int
    trials: int

    @property
    def rate(self) -> float:
        return self.rejections / self.trials

    @property
    def stderr(self) -> float:
        r = self.rate
        return float(np.sqrt(r * (1.0 - r) / self.trials))


def make_config(**kw) -> ExperimentConfig:
    """Build a config from flat keys; train-config keys are routed through.

    Accepts every ExperimentConfig field plus TrainConfig fields
    (epochs_pretrain, batch_size, unlabeled_fraction, ...).
    """
    exp_fields = set(ExperimentConfig.__dataclass_fields__) - {"train"}
    train_fields = set(TrainConfig.__dataclass_fields__)
    exp_kw = {k: v for k, v in kw.items() if k in exp_fields}
    train_kw = {k: v for k, v in kw.items() if k in train_fields}
    unknown = set(kw) - exp_kw.keys() - train_kw.keys() - {"train"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    train = kw.get("train")
    if train is None:
        if "freeze_encoder" not in train_kw:
            method = str(exp_kw.get("method", "ssl-c2st"))
            train_kw["freeze_encoder"] = method.startswith("ssl")
        train = default_train_config(int(exp_kw.get("d", 10)), **train_kw)
    elif train_kw:
        train = replace(train, **train_kw)
    return ExperimentConfig(train=train, **exp_kw)


def _accuracy_stat_fn(trained):
    """Accuracy recomputed under a permuted assignment of rows to samples."""

    def stat(x, y):
        correct = np.count_nonzero(predict_labels(trained, x) == 0)
        correct += np.count_nonzero(predict_labels(trained, y) == 1)
        return correct / (len(x) + len(y))

    return stat


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TestOutcome:
    """Execute one full trial: fresh data, training, permutation test.

    Seeds fan out from (cfg.seed, trial_index); the drawn data and the split
    do not depend on the method or the unlabeled fraction, so methods can be
    compared on identical trials.
    """
    root = np.random.SeedSequence(cfg.seed, spawn_key=(trial_index,))
    seed_p, seed_q, seed_split, seed_unl, seed_train, seed_perm = root.spawn(6)
    try:
        spec_p, spec_q = hdgm_pair(cfg.level, cfg.d, cfg.hypothesis)
        n_per_cluster = cfg.n_total // 4
        sp = sample_hdgm(spec_p, n_per_cluster, seed_p)
        sq = sample_hdgm(spec_q, n_per_cluster, seed_q)
        split = shuffle_split(build_dataset(sp, sq), seed_split)

        tcfg = replace(cfg.train, seed=int(seed_train.generate_state(1)[0]))
        pretrain_trace = None
        encoder = None
        if cfg.method.startswith("ssl"):
            pool = unlabeled_pool(split, tcfg.unlabeled_fraction, seed_unl)
            encoder, _, pretrain_trace = train_autoencoder(pool, tcfg)
        else:
            # Plain variants train every parameter from random init; a frozen
            # random encoder would not be a classifier two-sample test.
            tcfg = replace(tcfg, freeze_encoder=False)
        trained = train_classifier(encoder, split, tcfg, pretrain_trace=pretrain_trace)

        perm_seed = int(seed_perm.generate_state(1)[0])
        if cfg.method in ("c2st", "ssl-c2st"):
            x = split.test.points_for_label(0)
            y = split.test.points_for_label(1)
            stat_fn = _accuracy_stat_fn(trained)
        else:
            x = extract_features(trained, split.test.points_for_label(0), cfg.feature_layer)
            y = extract_features(trained, split.test.points_for_label(1), cfg.feature_layer)
            stat_fn = lambda a, b: embedding_statistic(a, b, cfg.feature_norm)
        return permutation_test(
            stat_fn, x, y, n_perm=cfg.n_perm, alpha=cfg.alpha, rng_seed=perm_seed
        )
    except Exception as exc:
        raise TrialFailed(f"trial {trial_index} failed: {exc}") from exc


def _trial_reject(args) -> bool:
    cfg, index = args
    return bool(run_trial(cfg, index).reject)


def estimate(cfg: ExperimentConfig, trials: int | None = None, jobs: int = 1,
             max_seconds: float | None = None) -> PowerEstimate:
    """Aggregate run_trial over independent trial seeds.

    ``max_seconds`` is a soft wall-clock budget checked between trials;
    exceeding it raises :class:`CellOverBudget` with partial counts.
    """
    n_trials = cfg.trials if trials is None else trials
    if n_trials < 1:
        raise ValueError("trials must be >= 1")
    start = time.monotonic()
    rejections = 0
    done = 0
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_trial_reject, (cfg, i)) for i in range(n_trials)]
            try:
                for fut in as_completed(futures):
                    rejections += int(fut.result())
                    done += 1
                    if max_seconds is not None and time.monotonic() - start > max_seconds:
                        raise CellOverBudget(done, rejections, time.monotonic() - start)
            except BaseException:
                for fut in futures:
                    fut.cancel()
                raise
    else:
        for i in range(n_trials):
            rejections += int(run_trial(cfg, i).reject)
            done += 1
            if max_seconds is not None and time.monotonic() - start > max_seconds:
                raise CellOverBudget(done, rejections, time.monotonic() - start)
    return PowerEstimate(rejections=rejections, trials=n_trials)


GRID_FIELDS = ["method", "dataset", "hypothesis", "d", "N", "unlabeled_fraction"]


def expand_grid(grid_spec: dict) -> list[ExperimentConfig]:
    """Cross the listed grid axes into one config per cell.

    ``grid_spec`` holds a "grid" mapping of axis name -> list of values
    (axes: method, dataset, hypothesis, d, N, unlabeled_fraction) and an
    optional "defaults" mapping applied to every cell.
    """
    grid = grid_spec.get("grid", {})
    defaults = dict(grid_spec.get("defaults", {}))
    unknown = set(grid) - set(GRID_FIELDS)
    if unknown:
        raise ValueError(f"unknown grid axes: {sorted(unknown)}")
    axes = [(name, grid[name]) for name in GRID_FIELDS if name in grid]
    cells = []
    for combo in itertools.product(*(values for _, values in axes)):
        kw = dict(defaults)
        kw.update({name: value for (name, _), value in zip(axes, combo)})
        if "N" in kw:
            kw["n_total"] = int(kw.pop("N"))
        cells.append(make_config(**kw))
    if not cells:
        raise ValueError("grid produced no cells")
    return cells


def cell_row(cfg: ExperimentConfig, est: PowerEstimate | None, trials: int,
             runtime_s: float) -> dict:
    rate = est.rate if est is not None else float("nan")
    stderr = est.stderr if est is not None else float("nan")
    return {
        "method": cfg.method,
        "dataset": cfg.dataset,
        "hypothesis": cfg.hypothesis,
        "d": cfg.d,
        "N": cfg.n_total,
        "unlabeled_fraction": cfg.unlabeled_fraction,
        "trials": trials,
        "alpha": cfg.alpha,
        "rate": rate,
        "stderr": stderr,
        "seed": cfg.seed,
        "runtime_s": round(runtime_s, 3),
    }


def sweep(grid_spec: dict, out_csv, jobs: int = 1, trials: int | None = None,
          max_seconds: float | None = None, log=None) -> tuple[list[dict], int]:
    """Run every grid cell, appending one CSV row per cell as it completes.

    Returns (rows, n_failed). Rows for over-budget cells carry NaN rates and
    the number of trials actually finished. The CSV is flushed after every
    row, so a killed sweep loses at most the in-flight cell.
    """
    cells = expand_grid(grid_spec)
    rows: list[dict] = []
    n_failed = 0
    with open(out_csv, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        fh.flush()
        for cfg in cells:
            start = time.monotonic()
            try:
                est = estimate(cfg, trials=trials, jobs=jobs, max_seconds=max_seconds)
                row = cell_row(cfg, est, est.trials, time.monotonic() - start)
            except CellOverBudget as over:
                row = cell_row(cfg, None, over.completed, over.elapsed)
                n_failed += 1
            rows.append(row)
            writer.writerow(row)
            fh.flush()
            if log is not None:
                log(row)
    return rows, n_failed
