#!/usr/bin/env python3
"""End-to-end offline demo: builds a small corpus, topic registry, persona
pool, and mock-provider configs, then drives all four CLI subcommands.

Everything is deterministic; no network access is used. Outputs land under
--out (default ./demo_out).
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from divkit.cli import main as divkit_main
from divkit.mocks import make_template_corpus

SAMPLE_RESPONSE = json.dumps(
    {
        "passages": [
            {"nuanced_content_to_be_learned": ["reservoir"], "passage": "Reservoirs balance supply across seasons."},
            {"nuanced_content_to_be_learned": ["recharge"], "passage": "Managed recharge stores wet-year surplus underground."},
            {"nuanced_content_to_be_learned": ["reuse"], "passage": "Reclaimed water closes the loop for irrigation."},
        ],
        "multiple_choice_question": {
            "question": "What does managed recharge store?",
            "options": ["Wet-year surplus", "Peak demand", "Evaporation losses", "Treatment sludge"],
            "answer_label": "Wet-year surplus",
            "step_by_step_answer_explanation": "The second passage says surplus is stored underground.",
        },
    }
)


def build_inputs(root: Path) -> dict:
    root.mkdir(parents=True, exist_ok=True)
    corpus_path = root / "corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for doc in make_template_corpus(n_templates=25, n_docs=400, seed=11):
            fh.write(json.dumps({"id": doc.id, "text": doc.text}) + "\n")

    topics_path = root / "topics.json"
    topics_path.write_text(
        json.dumps(
            {
                f"Water Systems/Region {i}/Practice {i}": [f"keyword {i}a", f"keyword {i}b"]
                for i in range(12)
            },
            indent=2,
        )
    )

    personas_path = root / "personas.jsonl"
    with open(personas_path, "w", encoding="utf-8") as fh:
        for p in ("a city water planner", "a smallholder farmer", "a high-school earth science teacher"):
            fh.write(json.dumps({"persona": p}) + "\n")

    script_path = root / "generation_script.json"
    script_path.write_text(json.dumps({"rules": [], "default": SAMPLE_RESPONSE}))
    return {
        "corpus": corpus_path,
        "topics": topics_path,
        "personas": personas_path,
        "script": script_path,
    }


def run(out_root: Path) -> int:
    inputs = build_inputs(out_root / "inputs")

    measure_cfg = {
        "seed": 7,
        "out_dir": str(out_root / "metrics"),
        "corpus": {"path": str(inputs["corpus"])},
        "tokenizer": "unicode-words",
        "providers": {
            "embedding": {"kind": "mock", "dim": 48},
            "logprob": {"kind": "mock-uniform", "vocab_size": 128},
            "logprob_large": {"kind": "mock-unigram"},
        },
        "metrics": {
            "selection": [
                "context_length",
                "self_repetition",
                "ngram_diversity",
                "compression_ratio",
                "perplexity",
                "perplexity_gap",
                "kmeans",
            ],
            "ngram": {"n_min": 1, "n_max": 3},
            "kmeans": {"k": 25},
        },
        "bootstrap": {"subset_size": 100, "rounds": 6},
    }
    agent_cfg = {
        "seed": 7,
        "out_dir": str(out_root / "cluster"),
        "corpus": {"path": str(inputs["corpus"])},
        "providers": {"chat": {"kind": "pipeline-mock"}},
        "agent": {"criteria_rounds": 3, "rounds": 60, "samples_per_round": 10},
    }
    generate_cfg = {
        "seed": 7,
        "out_dir": str(out_root / "generated"),
        "tokenizer": "unicode-words",
        "providers": {"generation": {"kind": "mock-script", "script": str(inputs["script"])}},
        "generation": {
            "family": "topic_styles_persona",
            "topics": 6,
            "generations_per_topic": 4,
            "personas_per_prompt": 3,
            "topic_registry": str(inputs["topics"]),
            "persona_pool": str(inputs["personas"]),
            "target_effective_tokens": 5000,
        },
    }
    for name, cfg in (("measure", measure_cfg), ("cluster-agent", agent_cfg), ("generate", generate_cfg)):
        cfg_path = out_root / f"{name}.config.json"
        cfg_path.write_text(json.dumps(cfg, indent=2))
        print(f"== divkit {name}")
        code = divkit_main([name, "--config", str(cfg_path)])
        if code != 0:
            print(f"{name} exited {code}", file=sys.stderr)
            return code

    records = out_root / "run_records.csv"
    records.write_text(
        "dataset,llm_cluster,accuracy\n"
        "demo_t10,2.41,49.8\n"
        "demo_t25,4.63,51.0\n"
        "demo_t50,6.02,51.7\n"
        "demo_t100,7.95,52.1\n"
    )
    print("== divkit report")
    return divkit_main(
        [
            "report",
            "--records", str(records),
            "--score", "llm_cluster",
            "--out", str(out_root / "report"),
            "--c-values", str(out_root / "cluster" / "c_values.csv"),
            "--s-values", str(out_root / "cluster" / "s_values.csv"),
        ]
    )


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_out", help="output directory")
    args = parser.parse_args()
    sys.exit(run(Path(args.out)))
