import json

import pytest

from divkit.cli import main
from divkit.cluster_agent import AgentParams, measure
from divkit.corpus import load_corpus
from divkit.mocks import ClusterPipelineMock, make_template_corpus


def write_corpus(path, docs):
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(json.dumps({"id": d.id, "text": d.text}) + "\n")


def write_config(path, cfg):
    path.write_text(json.dumps(cfg, indent=2))
    return str(path)


@pytest.fixture
def corpus_path(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_corpus(path, list(make_template_corpus(8, 40, seed=1)))
    return str(path)


def base_config(tmp_path, corpus_path, **extra):
    cfg = {
        "seed": 5,
        "out_dir": str(tmp_path / "out"),
        "corpus": {"path": corpus_path, "format": "jsonl"},
        "tokenizer": "whitespace",
    }
    cfg.update(extra)
    return cfg


class TestMeasure:
    def test_happy_path_and_reports(self, tmp_path, corpus_path, capsys):
        cfg = base_config(
            tmp_path,
            corpus_path,
            metrics={"selection": ["context_length", "ngram_diversity", "compression_ratio"]},
            bootstrap={"subset_size": 20, "rounds": 4},
        )
        code = main(["measure", "--config", write_config(tmp_path / "cfg.json", cfg)])
        assert code == 0
        out_dir = tmp_path / "out"
        for name in ("context_length", "ngram_diversity", "compression_ratio"):
            report = json.loads((out_dir / f"metric_{name}.json").read_text())
            assert report["rounds_used"] == 4
            assert report["seed"] == 5
            assert isinstance(report["params"], dict)
        manifest = json.loads((out_dir / "run_manifest.json").read_text())
        assert set(manifest["tasks"].values()) == {"ok"}
        assert "context_length" in capsys.readouterr().out

    def test_rerun_byte_identical(self, tmp_path, corpus_path):
        cfg = base_config(
            tmp_path,
            corpus_path,
            metrics={"selection": ["context_length", "self_repetition"]},
            bootstrap={"subset_size": 15, "rounds": 3},
        )
        config = write_config(tmp_path / "cfg.json", cfg)
        assert main(["measure", "--config", config]) == 0
        first = {
            p.name: p.read_bytes() for p in (tmp_path / "out").glob("metric_*.json")
        }
        assert main(["measure", "--config", config]) == 0
        second = {
            p.name: p.read_bytes() for p in (tmp_path / "out").glob("metric_*.json")
        }
        assert first == second

    def test_missing_corpus_path_exit_2(self, tmp_path, capsys):
        cfg = {"seed": 1, "corpus": {}}
        code = main(["measure", "--config", write_config(tmp_path / "cfg.json", cfg)])
        assert code == 2
        assert "path" in capsys.readouterr().err

    def test_missing_seed_exit_2(self, tmp_path, corpus_path, capsys):
        cfg = base_config(tmp_path, corpus_path)
        del cfg["seed"]
        code = main(["measure", "--config", write_config(tmp_path / "cfg.json", cfg)])
        assert code == 2
        assert "seed" in capsys.readouterr().err

    def test_partial_failure_exit_1_keeps_other_reports(self, tmp_path):
        # every document is a single token, so 4-gram self-repetition fails
        # in every round while context_length still succeeds
        corpus = tmp_path / "short.jsonl"
        with open(corpus, "w") as fh:
            for i in range(10):
                fh.write(json.dumps({"text": f"w{i}"}) + "\n")
        cfg = base_config(
            tmp_path,
            str(corpus),
            metrics={"selection": ["context_length", "self_repetition"], "ngram": {"n_max": 4}},
            bootstrap={"subset_size": 5, "rounds": 2},
        )
        code = main(["measure", "--config", write_config(tmp_path / "cfg.json", cfg)])
        assert code == 1
        out_dir = tmp_path / "out"
        assert (out_dir / "metric_context_length.json").exists()
        assert not (out_dir / "metric_self_repetition.json").exists()
        manifest = json.loads((out_dir / "run_manifest.json").read_text())
        assert manifest["tasks"]["context_length"] == "ok"
        assert manifest["tasks"]["self_repetition"].startswith("failed")

    def test_env_interpolation(self, tmp_path, corpus_path, monkeypatch):
        monkeypatch.setenv("DIVKIT_TEST_CORPUS", corpus_path)
        cfg = base_config(
            tmp_path,
            "${DIVKIT_TEST_CORPUS}",
            metrics={"selection": ["context_length"]},
            bootstrap={"subset_size": 5, "rounds": 2},
        )
        assert main(["measure", "--config", write_config(tmp_path / "cfg.json", cfg)]) == 0

    def test_unset_env_var_exit_2(self, tmp_path, monkeypatch, capsys):
        monkeypatch.delenv("DIVKIT_NOPE", raising=False)
        cfg = {"seed": 1, "corpus": {"path": "${DIVKIT_NOPE}"}}
        assert main(["measure", "--config", write_config(tmp_path / "cfg.json", cfg)]) == 2
        assert "DIVKIT_NOPE" in capsys.readouterr().err


class TestClusterAgent:
    def agent_config(self, tmp_path, corpus_path, **agent):
        params = {"criteria_rounds": 2, "rounds": 5, "samples_per_round": 10}
        params.update(agent)
        return base_config(
            tmp_path,
            corpus_path,
            providers={"chat": {"kind": "pipeline-mock"}},
            agent=params,
        )

    def test_end_to_end_matches_direct_measure(self, tmp_path, corpus_path, capsys):
        cfg = self.agent_config(tmp_path, corpus_path)
        code = main(["cluster-agent", "--config", write_config(tmp_path / "cfg.json", cfg)])
        assert code == 0
        score = json.loads((tmp_path / "out" / "cluster_score.json").read_text())

        corpus = load_corpus(corpus_path)
        params = AgentParams(criteria_rounds=2, rounds=5, samples_per_round=10, seed=5)
        direct = measure(corpus, ClusterPipelineMock(), params)
        assert score["diversity"] == direct.score.diversity
        assert score["rounds_used"] == direct.score.rounds_used

        c_lines = (tmp_path / "out" / "c_values.csv").read_text().splitlines()
        assert len(c_lines) == 1 + direct.score.rounds_used
        assert (tmp_path / "out" / "transcripts.jsonl").exists()
        assert (tmp_path / "out" / "criteria.json").exists()
        assert "diversity=" in capsys.readouterr().out

    def test_missing_auth_env_fails_before_any_request(self, tmp_path, corpus_path, monkeypatch, capsys):
        monkeypatch.delenv("DIVKIT_API_KEY", raising=False)
        cfg = self.agent_config(tmp_path, corpus_path)
        cfg["providers"]["chat"] = {
            "kind": "openai",
            "endpoint": "http://localhost:9",
            "model_name": "judge",
            "auth_env": "DIVKIT_API_KEY",
        }
        code = main(["cluster-agent", "--config", write_config(tmp_path / "cfg.json", cfg)])
        assert code == 2
        assert "DIVKIT_API_KEY" in capsys.readouterr().err

    def test_zero_rounds_exit_2(self, tmp_path, corpus_path):
        cfg = self.agent_config(tmp_path, corpus_path, rounds=0)
        assert main(["cluster-agent", "--config", write_config(tmp_path / "cfg.json", cfg)]) == 2

    def test_criteria_cache_reused(self, tmp_path, corpus_path):
        cfg = self.agent_config(tmp_path, corpus_path)
        config = write_config(tmp_path / "cfg.json", cfg)
        assert main(["cluster-agent", "--config", config]) == 0
        criteria_path = tmp_path / "out" / "criteria.json"
        cached = criteria_path.read_text()

        cfg["agent"]["criteria_cache"] = str(criteria_path)
        cfg["out_dir"] = str(tmp_path / "out2")
        assert main(["cluster-agent", "--config", write_config(tmp_path / "cfg2.json", cfg)]) == 0
        assert (tmp_path / "out2" / "criteria.json").read_text() == cached


SAMPLE_RESPONSE = json.dumps(
    {
        "passages": [
            {"nuanced_content_to_be_learned": [], "passage": "P one."},
            {"nuanced_content_to_be_learned": [], "passage": "P two."},
            {"nuanced_content_to_be_learned": [], "passage": "P three."},
        ],
        "multiple_choice_question": {
            "question": "Q?",
            "options": ["w", "x", "y", "z"],
            "answer_label": "x",
            "step_by_step_answer_explanation": "E.",
        },
    }
)


class TestGenerate:
    def gen_config(self, tmp_path, **extra):
        topics = tmp_path / "topics.json"
        topics.write_text(json.dumps({f"T{i}/S{i}": [f"kw{i}"] for i in range(5)}))
        script = tmp_path / "script.json"
        script.write_text(json.dumps({"rules": [], "default": SAMPLE_RESPONSE}))
        gen = {
            "family": "topic",
            "topics": 2,
            "generations_per_topic": 2,
            "topic_registry": str(topics),
        }
        gen.update(extra)
        return {
            "seed": 3,
            "out_dir": str(tmp_path / "gen"),
            "tokenizer": "whitespace",
            "providers": {"generation": {"kind": "mock-script", "script": str(script)}},
            "generation": gen,
        }

    def test_counts_match_shards(self, tmp_path, capsys):
        cfg = self.gen_config(tmp_path)
        assert main(["generate", "--config", write_config(tmp_path / "cfg.json", cfg)]) == 0
        manifest = json.loads((tmp_path / "gen" / "manifest.json").read_text())
        assert manifest["emitted"] == 4
        total = sum(
            len((tmp_path / "gen" / shard).read_text().splitlines())
            for shard in manifest["shards"]
        )
        assert total == 4
        assert "emitted=4" in capsys.readouterr().out

    def test_target_effective_weight_in_manifest(self, tmp_path):
        cfg = self.gen_config(tmp_path, target_effective_tokens=1000)
        assert main(["generate", "--config", write_config(tmp_path / "cfg.json", cfg)]) == 0
        manifest = json.loads((tmp_path / "gen" / "manifest.json").read_text())
        assert manifest["sampling_weight"] == pytest.approx(1000 / manifest["tokens"])

    def test_missing_registry_exit_2(self, tmp_path, capsys):
        cfg = self.gen_config(tmp_path)
        cfg["generation"]["topic_registry"] = str(tmp_path / "absent.json")
        assert main(["generate", "--config", write_config(tmp_path / "cfg.json", cfg)]) == 2


class TestReport:
    def test_collinear_records(self, tmp_path, capsys):
        records = tmp_path / "records.csv"
        records.write_text("dataset,llm_cluster,accuracy\na,1,2\nb,2,4\nc,3,6\n")
        code = main(["report", "--records", str(records), "--score", "llm_cluster", "--out", str(tmp_path / "rep")])
        assert code == 0
        data = json.loads((tmp_path / "rep" / "regression.json").read_text())
        assert data["slope"] == pytest.approx(2.0, abs=1e-12)
        assert data["r_squared"] == pytest.approx(1.0, abs=1e-12)
        csv_lines = (tmp_path / "rep" / "regression.csv").read_text().splitlines()
        assert csv_lines[0].startswith("slope,")
        manifest = json.loads((tmp_path / "rep" / "run_manifest.json").read_text())
        assert manifest["tasks"] == {"report": "ok"}

    def test_single_record_exit_1(self, tmp_path):
        records = tmp_path / "records.csv"
        records.write_text("dataset,llm_cluster,accuracy\na,1,2\n")
        assert main(["report", "--records", str(records), "--score", "llm_cluster", "--out", str(tmp_path / "rep")]) == 1

    def test_missing_records_exit_2(self, tmp_path):
        assert main(["report", "--records", str(tmp_path / "no.csv"), "--out", str(tmp_path / "rep")]) == 2

    def test_density_curves_from_cluster_values(self, tmp_path):
        records = tmp_path / "records.csv"
        records.write_text("dataset,llm_cluster,accuracy\na,1,2\nb,2,4\nc,3,5\n")
        c_values = tmp_path / "c.csv"
        c_values.write_text("clusters\n" + "\n".join(str(v) for v in [4, 5, 6, 5, 4, 7]) + "\n")
        s_values = tmp_path / "s.csv"
        s_values.write_text("mean_size\n" + "\n".join(str(v) for v in [2.0, 1.5, 1.25, 2.5, 2.0, 1.0]) + "\n")
        code = main(
            [
                "report",
                "--records", str(records),
                "--score", "llm_cluster",
                "--out", str(tmp_path / "rep"),
                "--c-values", str(c_values),
                "--s-values", str(s_values),
            ]
        )
        assert code == 0
        for name in ("density_c_values.csv", "density_s_values.csv"):
            lines = (tmp_path / "rep" / name).read_text().splitlines()
            assert lines[0] == "grid,density"
            assert len(lines) == 257
