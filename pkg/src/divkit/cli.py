"""Command-line entry point: measure | cluster-agent | generate | report.

Runs are driven by a single JSON config with ${ENV_VAR} interpolation for
secrets; every run writes a manifest with the config hash so outputs are
auditable. Exit codes: 0 success, 1 runtime or partial failure, 2
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import re
import sys
from datetime import datetime, timezone
from typing import Any, Callable

from . import __version__
from .analysis import AnalysisError, bootstrap, fit_regression, kde, load_run_records
from .cluster_agent import AgentError, AgentParams, CriteriaSet, measure
from .corpus import Corpus, CorpusError, TokenizerKind, load_corpus
from .heuristics import MetricError, NGramConfig, compression_ratio, context_length, ngram_diversity, self_repetition
from .mocks import ClusterPipelineMock, HashedBagEmbedding, MockChatProvider, MockScript, UniformLogProb, UnigramLogProb
from .modelmetrics import kmeans_diversity, kmeans_fit, perplexity, perplexity_gap
from .providers import (
    OpenAIChatProvider,
    OpenAIEmbeddingProvider,
    OpenAILogProbProvider,
    ProviderConfig,
    ProviderConfigError,
    ProviderError,
)
from .syngen import GenerationPlan, GenerationStats, SynGenError, generate, load_personas, load_topics, write_shards

log = logging.getLogger(__name__)

_ENV_RE = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


class ConfigError(Exception):
    pass


def _interpolate(value: Any) -> Any:
    if isinstance(value, str):
        def sub(m: re.Match) -> str:
            name = m.group(1)
            if name not in os.environ:
                raise ConfigError(f"config references unset environment variable {name!r}")
            return os.environ[name]

        return _ENV_RE.sub(sub, value)
    if isinstance(value, dict):
        return {k: _interpolate(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_interpolate(v) for v in value]
    return value


def load_config(path: str) -> tuple[dict, str]:
    """Config dict plus the hash of its canonical (pre-interpolation) form."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from e
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(canonical.encode("utf-8")).hexdigest()
    return _interpolate(raw), digest


def _require(cfg: dict, field: str) -> Any:
    if field not in cfg:
        raise ConfigError(f"config is missing required field {field!r}")
    return cfg[field]


def _tokenizer(cfg: dict) -> TokenizerKind:
    name = cfg.get("tokenizer", "unicode-words")
    try:
        return TokenizerKind(name)
    except ValueError as e:
        raise ConfigError(f"unknown tokenizer {name!r}") from e


def _provider_config(cfg: dict) -> ProviderConfig:
    try:
        return ProviderConfig(
            endpoint=_require(cfg, "endpoint"),
            model_name=_require(cfg, "model_name"),
            auth_env=cfg.get("auth_env", ""),
            max_retries=cfg.get("max_retries", 3),
            backoff_base=cfg.get("backoff_base", 0.5),
            requests_per_minute=cfg.get("requests_per_minute", 60.0),
            timeout=cfg.get("timeout", 60.0),
            max_in_flight=cfg.get("max_in_flight", 4),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e


def build_chat(cfg: dict | None):
    if not cfg:
        raise ConfigError("no chat provider configured")
    kind = cfg.get("kind", "openai")
    if kind == "mock-script":
        return MockChatProvider(MockScript.from_file(_require(cfg, "script")))
    if kind == "pipeline-mock":
        return ClusterPipelineMock()
    if kind == "openai":
        return OpenAIChatProvider(_provider_config(cfg))
    raise ConfigError(f"unknown chat provider kind {kind!r}")


def build_embedding(cfg: dict | None):
    if not cfg:
        raise ConfigError("no embedding provider configured")
    kind = cfg.get("kind", "openai")
    if kind == "mock":
        return HashedBagEmbedding(dim=cfg.get("dim", 64))
    if kind == "openai":
        return OpenAIEmbeddingProvider(_provider_config(cfg))
    raise ConfigError(f"unknown embedding provider kind {kind!r}")


def build_logprob(cfg: dict | None, corpus: Corpus | None = None):
    if not cfg:
        raise ConfigError("no log-prob provider configured")
    kind = cfg.get("kind", "openai")
    if kind == "mock-uniform":
        return UniformLogProb(vocab_size=cfg.get("vocab_size", 128))
    if kind == "mock-unigram":
        if corpus is None:
            raise ConfigError("mock-unigram log-prob provider needs a corpus")
        return UnigramLogProb.fit(corpus)
    if kind == "openai":
        return OpenAILogProbProvider(_provider_config(cfg))
    raise ConfigError(f"unknown log-prob provider kind {kind!r}")


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


class RunManifest:
    """Written exactly once per run, after all tasks settle."""

    def __init__(self, config_hash: str):
        self.config_hash = config_hash
        self.started_at = _utcnow()
        self.tasks: dict[str, str] = {}
        self.outputs: list[str] = []

    def write(self, out_dir: str) -> str:
        path = os.path.join(out_dir, "run_manifest.json")
        payload = {
            "config_hash": self.config_hash,
            "toolkit_version": __version__,
            "started_at": self.started_at,
            "finished_at": _utcnow(),
            "tasks": self.tasks,
            "outputs": sorted(self.outputs),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        return path


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_values_csv(path: str, name: str, values: list) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([name])
        for v in values:
            writer.writerow([repr(v) if isinstance(v, float) else v])


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _metric_functions(
    cfg: dict, tok: TokenizerKind, corpus: Corpus
) -> dict[str, tuple[Callable[[Corpus], float], dict[str, str]]]:
    """Metric name -> (corpus -> value, params recorded in the report)."""
    metrics_cfg = cfg.get("metrics", {})
    selection = metrics_cfg.get(
        "selection", ["context_length", "self_repetition", "ngram_diversity", "compression_ratio"]
    )
    ngram_cfg = NGramConfig(
        n_min=metrics_cfg.get("ngram", {}).get("n_min", 1),
        n_max=metrics_cfg.get("ngram", {}).get("n_max", 4),
        tokenizer=tok,
    )
    ngram_params = {"n_min": str(ngram_cfg.n_min), "n_max": str(ngram_cfg.n_max), "tokenizer": tok.value}
    level = metrics_cfg.get("compression_level", 6)
    fns: dict[str, tuple[Callable[[Corpus], float], dict[str, str]]] = {}
    for name in selection:
        if name == "context_length":
            fns[name] = (lambda c, t=tok: context_length(c, t).value, {"tokenizer": tok.value})
        elif name == "self_repetition":
            fns[name] = (
                lambda c, g=ngram_cfg: self_repetition(c, g).value,
                {**ngram_params, "log_base": "e", "neighbor_counting": "documents"},
            )
        elif name == "ngram_diversity":
            fns[name] = (lambda c, g=ngram_cfg: ngram_diversity(c, g).value, dict(ngram_params))
        elif name == "compression_ratio":
            fns[name] = (
                lambda c, lv=level: compression_ratio(c, lv).value,
                {"level": str(level), "container": "gzip"},
            )
        elif name == "perplexity":
            lp = build_logprob(cfg.get("providers", {}).get("logprob"), corpus)
            fns[name] = (
                lambda c, p=lp: perplexity(c, p).value,
                {"model": getattr(lp, "model_name", ""), "normalization": "per-token"},
            )
        elif name == "perplexity_gap":
            lp_small = build_logprob(cfg.get("providers", {}).get("logprob"), corpus)
            lp_large = build_logprob(cfg.get("providers", {}).get("logprob_large"), corpus)
            fns[name] = (
                lambda c, a=lp_small, b=lp_large: perplexity_gap(c, a, b),
                {
                    "model_small": getattr(lp_small, "model_name", ""),
                    "model_large": getattr(lp_large, "model_name", ""),
                },
            )
        elif name == "kmeans":
            embedder = build_embedding(cfg.get("providers", {}).get("embedding"))
            km = metrics_cfg.get("kmeans", {})
            k = km.get("k", 10000)
            max_iter = km.get("max_iter", 100)
            tol = km.get("tol", 1e-6)
            seed = cfg.get("seed", 0)

            def kmeans_metric(c: Corpus, e=embedder, k=k, mi=max_iter, tl=tol, sd=seed) -> float:
                # k is capped at the subset size so desk-scale runs stay valid
                X = e.embed([d.text for d in c])
                model = kmeans_fit(X, k=min(k, X.shape[0]), seed=sd, max_iter=mi, tol=tl)
                return kmeans_diversity(model, X).score

            fns[name] = (
                kmeans_metric,
                {
                    "k": str(k),
                    "max_iter": str(max_iter),
                    "tol": repr(tol),
                    "embedding_model": getattr(embedder, "model_name", ""),
                    "score_definition": "non_empty_clusters / mean_nonempty_size",
                },
            )
        else:
            raise ConfigError(f"unknown metric {name!r} in selection")
    return fns


def cmd_measure(cfg: dict, config_hash: str) -> int:
    corpus = load_corpus(_require(_require(cfg, "corpus"), "path"), cfg["corpus"].get("format", "jsonl"))
    tok = _tokenizer(cfg)
    seed = _require(cfg, "seed")
    boot = cfg.get("bootstrap", {})
    subset_size = boot.get("subset_size", min(corpus.count, 1_000_000))
    rounds = boot.get("rounds", 10)
    out_dir = cfg.get("out_dir", "out")
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest(config_hash)
    fns = _metric_functions(cfg, tok, corpus)

    failed = 0
    for name, (fn, params) in fns.items():
        try:
            report = bootstrap(corpus, fn, subset_size, rounds, seed, metric_name=name)
        except (AnalysisError, CorpusError) as e:
            log.error("metric %s failed: %s", name, e)
            manifest.tasks[name] = f"failed: {e}"
            failed += 1
            continue
        payload = report.to_dict()
        payload["params"] = params
        payload["tokenizer"] = tok.value
        payload["seed"] = seed
        path = os.path.join(out_dir, f"metric_{name}.json")
        _write_json(path, payload)
        manifest.outputs.append(path)
        manifest.tasks[name] = "ok"
        print(f"{name}: mean={report.mean:.6g} stderr={report.stderr:.3g} rounds={report.rounds_used}")
    manifest.write(out_dir)
    return 1 if failed else 0


def cmd_cluster_agent(cfg: dict, config_hash: str) -> int:
    corpus = load_corpus(_require(_require(cfg, "corpus"), "path"), cfg["corpus"].get("format", "jsonl"))
    chat = build_chat(cfg.get("providers", {}).get("chat"))
    agent_cfg = cfg.get("agent", {})
    try:
        params = AgentParams(
            samples_per_criteria_round=agent_cfg.get("samples_per_criteria_round", 5),
            criteria_rounds=agent_cfg.get("criteria_rounds", 100),
            criteria_size=agent_cfg.get("criteria_size", 4),
            samples_per_round=agent_cfg.get("samples_per_round", 10),
            rounds=agent_cfg.get("rounds", 5000),
            seed=_require(cfg, "seed"),
            max_round_retries=agent_cfg.get("max_round_retries", 2),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e
    out_dir = cfg.get("out_dir", "out")
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest(config_hash)

    criteria = None
    cache = agent_cfg.get("criteria_cache")
    if cache and os.path.isfile(cache):
        with open(cache, "r", encoding="utf-8") as fh:
            criteria = CriteriaSet.from_dict(json.load(fh))
        log.info("reusing cached criteria from %s", cache)

    result = measure(corpus, chat, params, criteria=criteria, out_dir=out_dir)
    for name in ("criteria.json", "transcripts.jsonl", "cluster_score.json"):
        manifest.outputs.append(os.path.join(out_dir, name))
    c_path = os.path.join(out_dir, "c_values.csv")
    s_path = os.path.join(out_dir, "s_values.csv")
    _write_values_csv(c_path, "clusters", result.score.cluster_counts)
    _write_values_csv(s_path, "mean_size", result.score.mean_sizes)
    manifest.outputs += [c_path, s_path]
    manifest.tasks["cluster-agent"] = "ok"
    manifest.write(out_dir)
    print(
        f"diversity={result.score.diversity:.6f} stderr={result.score.stderr:.4f} "
        f"rounds_used={result.score.rounds_used} discarded={result.score.rounds_discarded}"
    )
    return 0


def cmd_generate(cfg: dict, config_hash: str) -> int:
    gen_cfg = _require(cfg, "generation")
    registry = load_topics(_require(gen_cfg, "topic_registry"))
    try:
        plan = GenerationPlan(
            family=_require(gen_cfg, "family"),
            topics=_require(gen_cfg, "topics"),
            generations_per_topic=_require(gen_cfg, "generations_per_topic"),
            styles=tuple(gen_cfg.get("styles", ["textbook_academic", "textbook_narrative", "blogpost", "wikihow"])),
            personas_per_prompt=gen_cfg.get("personas_per_prompt", 5),
            topics_per_prompt=gen_cfg.get("topics_per_prompt", 2 if _require(gen_cfg, "family") == "multi_topic_styles_persona" else 1),
            seed=_require(cfg, "seed"),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e
    personas = None
    if plan.uses_personas:
        personas = load_personas(_require(gen_cfg, "persona_pool"))
    chat = build_chat(cfg.get("providers", {}).get("generation") or cfg.get("providers", {}).get("chat"))
    tok = _tokenizer(cfg)
    out_dir = cfg.get("out_dir", "out")
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest(config_hash)
    stats = GenerationStats()
    target = gen_cfg.get("target_effective_tokens")

    shard_manifest = write_shards(
        generate(plan, registry, personas, chat, stats),
        out_dir,
        plan,
        stats,
        tok=tok,
        target_effective_tokens=target,
    )
    manifest.outputs.append(os.path.join(out_dir, "manifest.json"))
    manifest.outputs += [os.path.join(out_dir, s) for s in shard_manifest["shards"]]
    manifest.tasks["generate"] = "ok"
    manifest.write(out_dir)
    line = f"emitted={stats.emitted} dropped={stats.dropped} tokens={shard_manifest['tokens']}"
    if "sampling_weight" in shard_manifest:
        line += f" weight={shard_manifest['sampling_weight']:.4f}"
    print(line)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    if not os.path.isfile(args.records):
        raise ConfigError(f"records file not found: {args.records}")
    records = load_run_records(args.records)
    os.makedirs(args.out, exist_ok=True)
    with open(args.records, "rb") as fh:
        inputs_hash = hashlib.sha256(fh.read()).hexdigest()
    manifest = RunManifest(inputs_hash)
    reg = fit_regression(records, args.score)
    _write_json(os.path.join(args.out, "regression.json"), reg.to_dict())
    with open(os.path.join(args.out, "regression.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slope", "intercept", "r_squared", "pearson_r", "n_points"])
        writer.writerow([repr(reg.slope), repr(reg.intercept), repr(reg.r_squared), repr(reg.pearson_r), reg.n_points])
    manifest.outputs += [os.path.join(args.out, "regression.json"), os.path.join(args.out, "regression.csv")]
    for label, path in (("c_values", args.c_values), ("s_values", args.s_values)):
        if not path:
            continue
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            values = [float(row[0]) for row in reader if row]
        curve = kde(values, bandwidth=args.bandwidth)
        out_path = os.path.join(args.out, f"density_{label}.csv")
        curve.to_csv(out_path)
        manifest.outputs.append(out_path)
    manifest.tasks["report"] = "ok"
    manifest.write(args.out)
    print(
        f"slope={reg.slope:.6g} intercept={reg.intercept:.6g} "
        f"r2={reg.r_squared:.6g} pearson={reg.pearson_r:.6g} n={reg.n_points}"
    )
    return 0


def _apply_overrides(cfg: dict, args: argparse.Namespace) -> dict:
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "out", None):
        cfg["out_dir"] = args.out
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="divkit", description="Corpus diversity measurement toolkit")
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("measure", "cluster-agent", "generate"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run config")
        p.add_argument("--seed", type=int, help="override config seed")
        p.add_argument("--out", help="override output directory")

    p = sub.add_parser("report")
    p.add_argument("--records", required=True, help="run records CSV or JSON")
    p.add_argument("--score", default="llm_cluster", help="score column to regress on")
    p.add_argument("--out", default="out")
    p.add_argument("--c-values", help="CSV of per-round cluster counts")
    p.add_argument("--s-values", help="CSV of per-round mean cluster sizes")
    p.add_argument("--bandwidth", type=float, default=None)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    try:
        if args.command == "report":
            return cmd_report(args)
        cfg, config_hash = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
        if "seed" not in cfg:
            raise ConfigError("config is missing required field 'seed'")
        if args.command == "measure":
            return cmd_measure(cfg, config_hash)
        if args.command == "cluster-agent":
            return cmd_cluster_agent(cfg, config_hash)
        if args.command == "generate":
            return cmd_generate(cfg, config_hash)
        raise AssertionError(f"unreachable command {args.command}")
    except (ConfigError, ProviderConfigError, CorpusError, FileNotFoundError, SynGenError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except (AnalysisError, AgentError, MetricError, ProviderError) as e:
        print(f"run failed: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
