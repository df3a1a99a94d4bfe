#!/usr/bin/env python3
"""Desk-scale parameter sweeps of the clustering judge with the
deterministic fingerprint mock.

Three sweeps, each written as a CSV under --out:
  batch_sweep.csv     diversity vs samples-per-round, fixed corpus
  rounds_sweep.csv    diversity and stderr vs number of rounds
  template_sweep.csv  diversity vs true template count, several seeds
plus KDE curves (density_clusters.csv, density_sizes.csv) of the per-round
cluster-count and mean-size distributions for one reference setting.
"""

import argparse
import csv
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from divkit.analysis import kde
from divkit.cluster_agent import AgentParams, measure
from divkit.mocks import ClusterPipelineMock, make_template_corpus


def write_rows(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path}")


def batch_sweep(out: Path, seed: int) -> None:
    corpus = make_template_corpus(n_templates=40, n_docs=600, seed=seed)
    rows = []
    for batch in (5, 10, 15, 20):
        params = AgentParams(criteria_rounds=2, rounds=80, samples_per_round=batch, seed=seed)
        score = measure(corpus, ClusterPipelineMock(), params).score
        rows.append([batch, f"{score.diversity:.4f}", f"{score.stderr:.4f}", score.rounds_used])
    write_rows(out / "batch_sweep.csv", ["samples_per_round", "diversity", "stderr", "rounds_used"], rows)


def rounds_sweep(out: Path, seed: int) -> None:
    corpus = make_template_corpus(n_templates=40, n_docs=600, seed=seed)
    rows = []
    for rounds in (30, 100, 300, 1000):
        params = AgentParams(criteria_rounds=2, rounds=rounds, seed=seed)
        score = measure(corpus, ClusterPipelineMock(), params).score
        rows.append([rounds, f"{score.diversity:.4f}", f"{score.stderr:.4f}"])
    write_rows(out / "rounds_sweep.csv", ["rounds", "diversity", "stderr"], rows)


def template_sweep(out: Path, seed: int) -> None:
    rows = []
    for n_templates in (10, 30, 100, 300, 1000):
        for s in range(seed, seed + 3):
            corpus = make_template_corpus(n_templates, max(200, 2 * n_templates), seed=s)
            params = AgentParams(criteria_rounds=1, rounds=60, seed=s)
            score = measure(corpus, ClusterPipelineMock(), params).score
            rows.append([n_templates, s, f"{score.diversity:.4f}", f"{score.stderr:.4f}"])
    write_rows(out / "template_sweep.csv", ["templates", "seed", "diversity", "stderr"], rows)


def density_curves(out: Path, seed: int) -> None:
    corpus = make_template_corpus(n_templates=40, n_docs=600, seed=seed)
    params = AgentParams(criteria_rounds=2, rounds=200, seed=seed)
    score = measure(corpus, ClusterPipelineMock(), params).score
    kde([float(c) for c in score.cluster_counts]).to_csv(str(out / "density_clusters.csv"))
    kde(score.mean_sizes).to_csv(str(out / "density_sizes.csv"))
    print(f"wrote {out / 'density_clusters.csv'}")
    print(f"wrote {out / 'density_sizes.csv'}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="sweep_out", help="output directory")
    parser.add_argument("--seed", type=int, default=17)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    batch_sweep(out, args.seed)
    rounds_sweep(out, args.seed)
    template_sweep(out, args.seed)
    density_curves(out, args.seed)
