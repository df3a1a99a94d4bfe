"""Bootstrapped metric evaluation, score-vs-accuracy regression, and density
curves for cluster-shape distributions.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .corpus import Corpus
from .rng import stream_seed

log = logging.getLogger(__name__)


class AnalysisError(Exception):
    pass


@dataclass(frozen=True)
class BootstrapReport:
    metric: str
    rounds: int
    rounds_used: int
    subset_size: int
    per_round_values: list[float]
    mean: float
    std: float
    stderr: float
    seeds: list[int]
    failures: list[str] = field(default_factory=list)
    degenerate_stderr: bool = False

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "rounds": self.rounds,
            "rounds_used": self.rounds_used,
            "subset_size": self.subset_size,
            "per_round_values": self.per_round_values,
            "mean": self.mean,
            "std": self.std,
            "stderr": self.stderr,
            "seeds": self.seeds,
            "failures": self.failures,
            "degenerate_stderr": self.degenerate_stderr,
        }


def bootstrap(
    corpus: Corpus,
    metric_fn: Callable[[Corpus], float],
    subset_size: int,
    rounds: int,
    seed: int,
    metric_name: str = "metric",
) -> BootstrapReport:
    """Repeatedly subsample the corpus and re-run the metric.

    Each round draws its subset with a derived seed and runs metric_fn on an
    in-memory corpus of the subset. A round whose metric raises is excluded
    and recorded in failures. With a single usable round the stderr is
    reported as 0 and flagged degenerate.
    """
    if rounds < 1:
        raise AnalysisError("rounds must be >= 1")
    if subset_size > corpus.count:
        raise AnalysisError(f"subset_size {subset_size} exceeds corpus size {corpus.count}")
    values: list[float] = []
    seeds: list[int] = []
    failures: list[str] = []
    for i in range(rounds):
        round_seed = stream_seed(seed, i)
        subset = Corpus.from_documents(
            corpus.sample(subset_size, round_seed), source=f"{corpus.source}#round{i}"
        )
        try:
            value = float(metric_fn(subset))
        except Exception as e:  # metric failures must not sink the other rounds
            log.warning("bootstrap round %d failed: %s", i, e)
            failures.append(f"round {i}: {e}")
            continue
        values.append(value)
        seeds.append(round_seed)
    if not values:
        raise AnalysisError(f"all {rounds} bootstrap rounds failed: {failures}")
    mean = math.fsum(values) / len(values)
    if len(values) > 1:
        var = math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1)
        std = math.sqrt(var)
        stderr = std / math.sqrt(len(values))
        degenerate = False
    else:
        std = 0.0
        stderr = 0.0
        degenerate = True
    return BootstrapReport(
        metric=metric_name,
        rounds=rounds,
        rounds_used=len(values),
        subset_size=subset_size,
        per_round_values=values,
        mean=mean,
        std=std,
        stderr=stderr,
        seeds=seeds,
        failures=failures,
        degenerate_stderr=degenerate,
    )


# ---------------------------------------------------------------------------
# Regression
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunRecord:
    dataset: str
    scores: dict[str, float]
    accuracy: float | None = None
    tokens: int | None = None

    def __post_init__(self):
        if not self.scores:
            raise ValueError(f"run record {self.dataset!r} has no scores")


@dataclass(frozen=True)
class RegressionReport:
    slope: float
    intercept: float
    r_squared: float
    pearson_r: float
    n_points: int

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "pearson_r": self.pearson_r,
            "n_points": self.n_points,
        }


def fit_regression(records: list[RunRecord], score_name: str) -> RegressionReport:
    """Ordinary least squares of accuracy on one named score, closed form."""
    points = [
        (r.scores[score_name], r.accuracy)
        for r in records
        if score_name in r.scores and r.accuracy is not None
    ]
    if len(points) < 2:
        raise AnalysisError(f"need >= 2 records with score {score_name!r} and accuracy")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    n = len(points)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    sxy = math.fsum((x - mx) * (y - my) for x, y in points)
    if sxx == 0:
        raise AnalysisError("degenerate x: zero variance in scores")
    slope = sxy / sxx
    intercept = my - slope * mx
    if syy == 0:
        # Flat accuracy: correlation is undefined, reported as 0.
        pearson = 0.0
    else:
        pearson = sxy / math.sqrt(sxx * syy)
    r_squared = pearson * pearson
    return RegressionReport(
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        pearson_r=pearson,
        n_points=n,
    )


def load_run_records(path: str) -> list[RunRecord]:
    """RunRecords from CSV (dataset, <score columns>, accuracy, tokens) or a
    JSON list of {dataset, scores, accuracy, tokens}."""
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return [
            RunRecord(
                dataset=str(obj["dataset"]),
                scores={str(k): float(v) for k, v in obj["scores"].items()},
                accuracy=None if obj.get("accuracy") is None else float(obj["accuracy"]),
                tokens=None if obj.get("tokens") is None else int(obj["tokens"]),
            )
            for obj in data
        ]
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            dataset = row.pop("dataset", None)
            if dataset is None:
                raise AnalysisError(f"{path}: missing 'dataset' column")
            accuracy = row.pop("accuracy", None)
            tokens = row.pop("tokens", None)
            scores = {k: float(v) for k, v in row.items() if v not in (None, "")}
            records.append(
                RunRecord(
                    dataset=dataset,
                    scores=scores,
                    accuracy=float(accuracy) if accuracy not in (None, "") else None,
                    tokens=int(tokens) if tokens not in (None, "") else None,
                )
            )
    if not records:
        raise AnalysisError(f"{path}: no run records")
    return records


# ---------------------------------------------------------------------------
# Kernel density estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityCurve:
    grid: list[float]
    density: list[float]
    bandwidth: float

    def to_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["grid", "density"])
            for g, d in zip(self.grid, self.density):
                writer.writerow([repr(g), repr(d)])


def silverman_bandwidth(values: np.ndarray) -> float:
    """0.9 * min(std, IQR/1.34) * n^(-1/5), falling back to std when the IQR
    collapses to zero."""
    n = len(values)
    std = float(np.std(values, ddof=1))
    q75, q25 = np.percentile(values, [75, 25])
    iqr = float(q75 - q25)
    spread = min(std, iqr / 1.34) if iqr > 0 else std
    return 0.9 * spread * n ** (-0.2)


def kde(values: list[float], bandwidth: float | None = None, grid_points: int = 256) -> DensityCurve:
    """Gaussian kernel density on a uniform grid spanning [min-3h, max+3h].

    The grid must resolve the kernels for the curve to integrate to one, so
    the automatic bandwidth is floored at roughly one grid step; an explicit
    bandwidth below that is rejected rather than silently producing a curve
    that misses its own mass.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size < 2:
        raise AnalysisError("kde needs at least 2 values")
    if grid_points < 16:
        raise AnalysisError(f"grid_points must be >= 16, got {grid_points}")
    span = float(arr.max() - arr.min())
    if span == 0.0:
        raise AnalysisError("zero variance: all values identical (use a histogram instead)")
    # h >= floor guarantees grid spacing (span + 6h)/(grid_points-1) <= ~0.8h.
    floor = span / (0.8 * (grid_points - 1) - 6)
    if bandwidth is None:
        h = max(silverman_bandwidth(arr), floor)
    else:
        h = bandwidth
        if h <= 0:
            raise AnalysisError(f"bandwidth must be positive, got {h}")
        if h < floor:
            raise AnalysisError(
                f"bandwidth {h} cannot be resolved on {grid_points} grid points "
                f"spanning {span}; raise the bandwidth or grid_points"
            )
    grid = np.linspace(arr.min() - 3 * h, arr.max() + 3 * h, grid_points)
    z = (grid[:, None] - arr[None, :]) / h
    density = np.exp(-0.5 * z * z).sum(axis=1) / (arr.size * h * math.sqrt(2 * math.pi))
    return DensityCurve(grid=grid.tolist(), density=density.tolist(), bandwidth=float(h))
