"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Everything runs offline against deterministic mocks. Run with
`pytest tests/test_acceptance.py -s` to see the per-criterion lines.
"""

import json
import math
import time

import numpy as np
import pytest

from divkit.analysis import bootstrap, fit_regression
from divkit.cluster_agent import AgentParams, aggregate, measure, run_round
from divkit.corpus import Corpus, Document, TokenizerKind
from divkit.heuristics import NGramConfig, compression_ratio, context_length, ngram_diversity, self_repetition
from divkit.mocks import ClusterPipelineMock, UniformLogProb, make_template_corpus
from divkit.modelmetrics import kmeans_assign, kmeans_fit, perplexity
from divkit.providers import extract_json
from divkit.sample_parse import parse_sample
from divkit.syngen import effective_weight

from conftest import DATA_DIR, random_corpus
from oracles import (
    oracle_compression_ratio,
    oracle_context_length,
    oracle_ngram_diversity,
    oracle_self_repetition,
)
from test_cluster_agent import StageScriptChat, clusters_json, make_docs, tiny_criteria, verification_json

WS = TokenizerKind.WHITESPACE


def report(criterion: str, ok: bool, detail: str = ""):
    line = f"{'PASS' if ok else 'FAIL'} {criterion}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def test_criterion_1_heuristic_oracle_equivalence():
    start = time.monotonic()
    sizes = [20, 45, 80, 120, 200]
    checked = 0
    for seed in range(20):
        corpus = random_corpus(seed, sizes[seed % len(sizes)], min_len=1, max_len=40)
        docs = list(corpus)
        cfg = NGramConfig(n_min=1, n_max=3, tokenizer=WS)

        got = context_length(corpus, WS).value
        assert got == pytest.approx(oracle_context_length(docs, WS), rel=1e-12)

        got = self_repetition(corpus, cfg).value
        assert got == pytest.approx(oracle_self_repetition(docs, 3, WS), rel=1e-12)

        got = ngram_diversity(corpus, cfg).value
        assert got == oracle_ngram_diversity(docs, 1, 3, WS)

        got = compression_ratio(corpus, level=6).value
        assert got == oracle_compression_ratio(docs, 6)
        checked += 1
    elapsed = time.monotonic() - start
    report(
        "criterion 1: heuristic metrics equal brute-force oracles",
        checked == 20 and elapsed < 30,
        f"{checked} corpora in {elapsed:.1f}s",
    )


def test_criterion_2_perplexity_closed_form():
    start = time.monotonic()
    corpus = Corpus.from_documents(
        [Document(id="a", text="alder birch cedar dahlia"), Document(id="b", text="elder fennel")]
    )
    ppl = perplexity(corpus, UniformLogProb(128)).value
    uniform_ok = abs(ppl - 128.0) < 1e-9

    doubled = Corpus.from_documents(
        list(corpus) + [Document(id=f"{d.id}+", text=d.text) for d in corpus]
    )
    dup_ok = abs(perplexity(doubled, UniformLogProb(128)).value - ppl) < 1e-12
    elapsed = time.monotonic() - start
    report(
        "criterion 2: perplexity closed form and duplication invariance",
        uniform_ok and dup_ok and elapsed < 5,
        f"ppl={ppl!r} in {elapsed:.1f}s",
    )


def test_criterion_3_kmeans_blobs():
    start = time.monotonic()
    centers = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    purities = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        X = np.concatenate([c + 0.01 * rng.standard_normal((40, 2)) for c in centers])
        truth = np.repeat(np.arange(3), 40)
        model = kmeans_fit(X, k=3, seed=seed)
        labels = kmeans_assign(model, X)
        purity = sum(np.bincount(truth[labels == c]).max() for c in np.unique(labels)) / len(truth)
        purities.append(purity)
        hist = model.inertia_history
        assert all(b <= a * (1 + 1e-12) for a, b in zip(hist, hist[1:])), "inertia increased"
        again = kmeans_fit(X, k=3, seed=seed)
        assert np.array_equal(model.centroids, again.centroids), "non-deterministic fit"
    elapsed = time.monotonic() - start
    report(
        "criterion 3: k-means blob purity, monotone inertia, determinism",
        all(p == 1.0 for p in purities) and elapsed < 10,
        f"20 seeds in {elapsed:.1f}s",
    )


def test_criterion_4_cluster_score_formula():
    start = time.monotonic()
    params = AgentParams(rounds=1, max_round_retries=0)

    # round A: C=2, S=5; round B: C=4, S=2.5 -> D = (0.4 + 1.6)/2 = 1.0
    chat = StageScriptChat(
        clustering=[
            clusters_json([[1, 2, 3, 4, 5], [6, 7, 8, 9, 10]]),
            clusters_json([[1, 2, 3, 4], [5, 6, 7], [8, 9], [10]]),
        ],
        verification=[verification_json([1, 1]), verification_json([1, 1, 1, 1])],
    )
    rounds = [
        run_round(make_docs(10), tiny_criteria(), chat, params, round_index=i) for i in range(2)
    ]
    score = aggregate(rounds)
    formula_ok = abs(score.diversity - 1.0) < 1e-12

    singleton_chat = StageScriptChat(
        clustering=[clusters_json([[1], [2, 3]])],
        verification=[verification_json([0, 0])],
    )
    singleton_round = run_round(make_docs(3), tiny_criteria(), singleton_chat, params)
    singleton_ok = (
        singleton_round.status == "accepted" and singleton_round.cluster_count == 1
    )

    overlap_chat = StageScriptChat(
        clustering=[clusters_json([[1, 2], [2, 3]])],
        verification=[verification_json([1, 1])],
    )
    overlap_round = run_round(make_docs(3), tiny_criteria(), overlap_chat, params)
    overlap_ok = overlap_round.status == "discarded" and overlap_round.reason == "overlap"

    elapsed = time.monotonic() - start
    report(
        "criterion 4: scripted rounds reproduce the diversity formula",
        formula_ok and singleton_ok and overlap_ok and elapsed < 5,
        f"D={score.diversity!r} in {elapsed:.1f}s",
    )


def test_criterion_5_monotone_separation():
    start = time.monotonic()
    all_increasing = True
    for seed in range(10):
        scores = []
        for n_templates in (10, 100, 1000):
            corpus = make_template_corpus(n_templates, max(100, 2 * n_templates), seed=seed + 17)
            params = AgentParams(criteria_rounds=1, rounds=30, seed=seed)
            result = measure(corpus, ClusterPipelineMock(), params)
            scores.append(result.score.diversity)
        if not (scores[0] < scores[1] < scores[2]):
            all_increasing = False
            print(f"  seed {seed}: {scores} not strictly increasing")
    elapsed = time.monotonic() - start
    report(
        "criterion 5: diversity strictly increases with template count, 10/10 seeds",
        all_increasing and elapsed < 60,
        f"{elapsed:.1f}s",
    )


def test_criterion_6_prompt_catalog_fidelity():
    from divkit import cluster_prompts as cp

    renders = {
        "metadata_metric_generation.txt": cp.metadata_metric_generation_prompt(
            ["Sample text about tidal power engineering.", "Sample text about baroque counterpoint."]
        ),
        "metadata_summary.txt": cp.metadata_summary_prompt(
            {
                "Subject Domain": ["Field of the text.", "Academic discipline covered."],
                "Narrative Structure": ["Organization of the content."],
            },
            4,
        ),
        "metric_summary.txt": cp.metric_summary_prompt(
            {"Lexical Diversity": ["Vocabulary variety.", "Range of words used."]}, 4
        ),
        "criteria_summary.txt": cp.criteria_summary_prompt(
            {"Subject Domain": "Field of the text."},
            {"Lexical Diversity": "Vocabulary variety, scored 1-5."},
        ),
        "clustering.txt": cp.clustering_prompt(
            [
                ("Subject Domain", "Cluster text samples by their field."),
                ("Lexical Diversity", "Group texts by vocabulary variety."),
            ],
            [
                "Sample text about tidal power engineering.",
                "Sample text about baroque counterpoint.",
                "Sample text about soil microbiomes.",
            ],
        ),
        "self_verification.txt": cp.self_verification_prompt(
            [
                "Sample text about tidal power engineering.",
                "Sample text about baroque counterpoint.",
                "Sample text about soil microbiomes.",
            ],
            [
                {"cluster": 1, "sample indices": [1, 3], "reasoning": "both empirical field reports"},
                {"cluster": 2, "sample indices": [2], "reasoning": "single musicology sample"},
            ],
        ),
    }
    mismatches = [
        name
        for name, rendered in renders.items()
        if rendered != (DATA_DIR / "golden_prompts" / name).read_text(encoding="utf-8")
    ]
    report(
        "criterion 6: pipeline prompts match the golden catalog verbatim",
        not mismatches,
        f"{len(renders)} prompts" + (f"; mismatched: {mismatches}" if mismatches else ""),
    )


def test_criterion_7_parser_fidelity_on_example_outputs():
    from divkit.cluster_agent import parse_clusters, parse_criteria_generation, parse_verifications

    outputs = DATA_DIR / "model_outputs"
    failures = []
    try:
        md, mt = parse_criteria_generation(
            extract_json((outputs / "pipeline_metadata_metric_generation.txt").read_text())
        )
        assert len(md) == 5 and len(mt) == 5
        assert len(extract_json((outputs / "pipeline_metadata_summary.txt").read_text())) == 4
        assert len(extract_json((outputs / "pipeline_metric_summary.txt").read_text())) == 4
        assert len(extract_json((outputs / "pipeline_criteria_summary.txt").read_text())) == 8
        clusters = parse_clusters(
            extract_json((outputs / "pipeline_clustering.txt").read_text()), 10
        )
        assert [c.indices for c in clusters] == [[5], [1, 7]]
        verdicts = parse_verifications(
            extract_json((outputs / "pipeline_self_verification.txt").read_text()), 3
        )
        assert [ok for ok, _ in verdicts] == [False, True, False]
    except Exception as e:  # noqa: BLE001 - acceptance reports any failure
        failures.append(f"pipeline outputs: {e}")

    gen_fixtures = sorted(outputs.glob("gen_*.txt"))
    for path in gen_fixtures:
        try:
            sample = parse_sample(path.read_text(encoding="utf-8"))
            assert sample.mcq.answer_label in sample.mcq.options
            assert len(sample.mcq.options) == 4
            assert sample.passages
        except Exception as e:  # noqa: BLE001
            failures.append(f"{path.name}: {e}")
    report(
        "criterion 7: example pipeline and generation outputs parse into schemas",
        not failures and len(gen_fixtures) == 16,
        f"{len(gen_fixtures)} generation outputs" + (f"; failures: {failures}" if failures else ""),
    )


def test_criterion_8_effective_weight_math():
    w1 = effective_weight(int(12.90e9), int(20e9)).weight
    w2 = effective_weight(int(4.43e9), int(4.5e9)).weight
    ok = abs(w1 - 1.5504) < 1e-4 and abs(w2 - 1.0158) < 1e-4
    report("criterion 8: effective-weight quotients", ok, f"w1={w1:.5f} w2={w2:.5f}")


def test_criterion_9_regression_recovery_and_report_command(tmp_path):
    from divkit.analysis import RunRecord
    from divkit.cli import main

    rng = np.random.default_rng(99)
    xs = rng.uniform(1, 5, 30)
    ys = 0.8 * xs + 1.0 + rng.normal(0, 0.01, 30)
    records = [
        RunRecord(dataset=f"d{i}", scores={"s": float(x)}, accuracy=float(y))
        for i, (x, y) in enumerate(zip(xs, ys))
    ]
    fit = fit_regression(records, "s")
    A = np.vstack([xs, np.ones_like(xs)]).T
    slope, intercept = np.linalg.solve(A.T @ A, A.T @ ys)
    recovery_ok = abs(fit.slope - slope) < 1e-9 and abs(fit.intercept - intercept) < 1e-9

    records_csv = tmp_path / "records.csv"
    records_csv.write_text((DATA_DIR / "run_records.csv").read_text())
    code = main(["report", "--records", str(records_csv), "--score", "llm_cluster", "--out", str(tmp_path / "rep")])
    out = json.loads((tmp_path / "rep" / "regression.json").read_text())
    command_ok = (
        code == 0
        and math.isfinite(out["slope"])
        and math.isfinite(out["r_squared"])
        and math.isfinite(out["pearson_r"])
    )
    report(
        "criterion 9: planted-line recovery and one-command report",
        recovery_ok and command_ok,
        f"slope err={abs(fit.slope - slope):.2e}",
    )


def test_criterion_10_bootstrap_behavior():
    start = time.monotonic()
    rng = np.random.default_rng(4)
    values = rng.normal(10.0, 2.0, 400)
    corpus = Corpus.from_documents(
        [
            Document(id=f"d{i}", text=f"value {v:.6f}", meta={"value": repr(float(v))})
            for i, v in enumerate(values)
        ]
    )

    def mean_metric(c):
        vals = [float(d.meta["value"]) for d in c]
        return sum(vals) / len(vals)

    constant = bootstrap(corpus, lambda c: 7.0, subset_size=50, rounds=10, seed=0)
    constant_ok = constant.std == 0.0 and constant.stderr == 0.0

    # Known-variance oracle: subsets of n drawn without replacement from N
    # values of spread sigma have mean-spread sigma/sqrt(n)*sqrt((N-n)/(N-1)),
    # so stderr*sqrt(rounds) should sit near it and stderr fall like 1/sqrt(R).
    n, big_n = 50, len(values)
    sigma_theory = values.std(ddof=0) / math.sqrt(n) * math.sqrt((big_n - n) / (big_n - 1))
    reports = {
        r: bootstrap(corpus, mean_metric, subset_size=n, rounds=r, seed=16) for r in (4, 16, 64)
    }
    scaling_ok = all(
        abs(rep.stderr * math.sqrt(r) - sigma_theory) / sigma_theory <= 0.25
        for r, rep in reports.items()
    )
    for a, b in ((4, 16), (16, 64)):
        ratio = reports[a].stderr / reports[b].stderr
        if not (2.0 * 0.75 <= ratio <= 2.0 * 1.25):
            scaling_ok = False
    elapsed = time.monotonic() - start
    report(
        "criterion 10: bootstrap std and 1/sqrt(rounds) stderr scaling",
        constant_ok and scaling_ok and elapsed < 60,
        f"ratios {reports[4].stderr / reports[16].stderr:.2f}, "
        f"{reports[16].stderr / reports[64].stderr:.2f} in {elapsed:.1f}s",
    )
