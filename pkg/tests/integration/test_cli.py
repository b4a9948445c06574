import json

import pytest

from infrastructure.config import settings
from infrastructure.interfaces.cli.structeval_cli import EXIT_ERROR, EXIT_IO, EXIT_OK, main


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "cache_dir", str(tmp_path / "cache"))


def read_jsonl(path):
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]


def test_validate_grammar(fixtures_dir, capsys) -> None:
    assert main(["validate-grammar", str(fixtures_dir / "sharegpt.cfg")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "5 rules, 2 regex terminals" in out
    assert "start: sharegpt" in out


def test_validate_grammar_undefined_symbol(tmp_path, capsys) -> None:
    path = tmp_path / "bad.cfg"
    path.write_text("s: t\n", encoding="utf-8")
    assert main(["validate-grammar", str(path)]) == EXIT_ERROR
    assert "undefined symbol 't'" in capsys.readouterr().err


def test_validate_grammar_syntax_error_names_file(tmp_path, capsys) -> None:
    path = tmp_path / "broken.cfg"
    path.write_text('s: "a"\nt "b"\n', encoding="utf-8")
    assert main(["validate-grammar", str(path)]) == EXIT_ERROR
    err = capsys.readouterr().err
    assert "broken.cfg" in err
    assert "line 2" in err


def test_validate_grammar_missing_file(tmp_path) -> None:
    assert main(["validate-grammar", str(tmp_path / "absent.cfg")]) == EXIT_IO


def test_evaluate_writes_report(fixtures_dir, tmp_path, capsys) -> None:
    out = tmp_path / "report.json"
    code = main(
        [
            "evaluate",
            "--config", str(fixtures_dir / "eval_config.json"),
            "--real", str(fixtures_dir / "real.jsonl"),
            "--synth", str(fixtures_dir / "synth.jsonl"),
            "--out", str(out),
        ]
    )
    assert code == EXIT_OK
    record = json.loads(out.read_text())
    assert record["dataset"] == "sharegpt"
    assert record["method"] == "fixture"
    values = {metric["name"]: metric["value"] for metric in record["metrics"]}
    assert values["cfg_pass_rate"] == pytest.approx(0.7)
    assert "cfg_pass_rate" in capsys.readouterr().out
    assert any((tmp_path / "cache").iterdir())


def test_evaluate_with_overrides_and_no_config(fixtures_dir, tmp_path) -> None:
    out = tmp_path / "report.json"
    code = main(
        [
            "evaluate",
            "--grammar", str(fixtures_dir / "sharegpt.cfg"),
            "--real", str(fixtures_dir / "real.jsonl"),
            "--synth", str(fixtures_dir / "real.jsonl"),
            "--out", str(out),
            "--method", "dp",
            "--epsilon", "2",
        ]
    )
    assert code == EXIT_OK
    record = json.loads(out.read_text())
    assert record["method"] == "dp"
    assert record["epsilon"] == 2.0


def test_evaluate_without_grammar(fixtures_dir, tmp_path, capsys) -> None:
    code = main(
        [
            "evaluate",
            "--real", str(fixtures_dir / "real.jsonl"),
            "--synth", str(fixtures_dir / "synth.jsonl"),
            "--out", str(tmp_path / "r.json"),
        ]
    )
    assert code == EXIT_ERROR
    assert "grammar" in capsys.readouterr().err


def test_evaluate_malformed_config(fixtures_dir, tmp_path, capsys) -> None:
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"knn": {"k": 0}, "colour": "red"}), encoding="utf-8")
    code = main(
        [
            "evaluate",
            "--config", str(config),
            "--grammar", str(fixtures_dir / "sharegpt.cfg"),
            "--real", str(fixtures_dir / "real.jsonl"),
            "--synth", str(fixtures_dir / "synth.jsonl"),
            "--out", str(tmp_path / "r.json"),
        ]
    )
    assert code == EXIT_ERROR
    err = capsys.readouterr().err
    assert "knn.k" in err
    assert "colour" in err
    assert not (tmp_path / "r.json").exists()


def test_evaluate_rejects_unknown_key_node_types(fixtures_dir, tmp_path, capsys) -> None:
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps(
            {
                "key_nodes": ["query", "answer"],
                "key_node_pairs": [{"a": "query", "b": "reponse"}],
            }
        ),
        encoding="utf-8",
    )
    code = main(
        [
            "evaluate",
            "--config", str(config),
            "--grammar", str(fixtures_dir / "sharegpt.cfg"),
            "--real", str(fixtures_dir / "real.jsonl"),
            "--synth", str(fixtures_dir / "synth.jsonl"),
            "--out", str(tmp_path / "r.json"),
        ]
    )
    assert code == EXIT_ERROR
    err = capsys.readouterr().err
    assert "key_nodes.1" in err
    assert "'reponse'" in err
    assert not (tmp_path / "r.json").exists()


def test_usage_errors_exit_with_the_error_code(capsys) -> None:
    with pytest.raises(SystemExit) as info:
        main(["evaluate", "--real", "r.jsonl"])
    assert info.value.code == EXIT_ERROR
    assert "required" in capsys.readouterr().err
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == EXIT_ERROR


def test_evaluate_missing_corpus(fixtures_dir, tmp_path) -> None:
    code = main(
        [
            "evaluate",
            "--config", str(fixtures_dir / "eval_config.json"),
            "--real", str(tmp_path / "absent.jsonl"),
            "--synth", str(fixtures_dir / "synth.jsonl"),
            "--out", str(tmp_path / "r.json"),
        ]
    )
    assert code == EXIT_IO


def test_gen_is_seeded(fixtures_dir, tmp_path, capsys) -> None:
    paths = [tmp_path / "a.jsonl", tmp_path / "b.jsonl"]
    for path in paths:
        code = main(
            [
                "gen",
                "--grammar", str(fixtures_dir / "sharegpt.cfg"),
                "--real", str(fixtures_dir / "real.jsonl"),
                "--epsilon", "2",
                "--n", "12",
                "--seed", "5",
                "--out", str(path),
            ]
        )
        assert code == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()
    samples = read_jsonl(paths[0])
    assert len(samples) == 12
    assert all(sample["text"].startswith("HUMAN: ") for sample in samples)
    assert "wrote 12 samples" in capsys.readouterr().out


def test_gen_prints_drawn_seed(fixtures_dir, tmp_path, capsys) -> None:
    code = main(
        [
            "gen",
            "--grammar", str(fixtures_dir / "sharegpt.cfg"),
            "--real", str(fixtures_dir / "real.jsonl"),
            "--epsilon", "1",
            "--n", "2",
            "--out", str(tmp_path / "g.jsonl"),
        ]
    )
    assert code == EXIT_OK
    assert capsys.readouterr().out.startswith("seed: ")


def test_gen_rejects_non_positive_epsilon(fixtures_dir, tmp_path) -> None:
    code = main(
        [
            "gen",
            "--grammar", str(fixtures_dir / "sharegpt.cfg"),
            "--real", str(fixtures_dir / "real.jsonl"),
            "--epsilon", "0",
            "--seed", "1",
            "--out", str(tmp_path / "g.jsonl"),
        ]
    )
    assert code == EXIT_ERROR


def test_compare_writes_tables(fixtures_dir, tmp_path) -> None:
    reports = []
    for method, synth in (("fixture", "synth.jsonl"), ("identity", "real.jsonl")):
        out = tmp_path / f"{method}.json"
        code = main(
            [
                "evaluate",
                "--config", str(fixtures_dir / "eval_config.json"),
                "--real", str(fixtures_dir / "real.jsonl"),
                "--synth", str(fixtures_dir / synth),
                "--method", method,
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        reports.append(str(out))

    out_dir = tmp_path / "comparison"
    assert main(["compare", *reports, "--out", str(out_dir)]) == EXIT_OK
    assert sorted(p.name for p in out_dir.iterdir()) == ["bundle.json", "raw.csv", "rescaled.csv"]
    bundle = json.loads((out_dir / "bundle.json").read_text())
    assert bundle["rescaled"]["cfg_pass_rate"] == {"fixture": 20.0, "identity": 100.0}


def test_compare_needs_two_reports(fixtures_dir, tmp_path) -> None:
    out = tmp_path / "one.json"
    main(
        [
            "evaluate",
            "--config", str(fixtures_dir / "eval_config.json"),
            "--real", str(fixtures_dir / "real.jsonl"),
            "--synth", str(fixtures_dir / "synth.jsonl"),
            "--out", str(out),
        ]
    )
    assert main(["compare", str(out), "--out", str(tmp_path / "cmp")]) == EXIT_ERROR


def test_export_tstr(fixtures_dir, tmp_path) -> None:
    code = main(
        [
            "export-tstr",
            "--corpus", str(fixtures_dir / "real.jsonl"),
            "--labels", str(fixtures_dir / "topics_real.jsonl"),
            "--seed", "3",
            "--out", str(tmp_path / "split"),
        ]
    )
    assert code == EXIT_OK
    train = read_jsonl(tmp_path / "split" / "train.jsonl")
    test = read_jsonl(tmp_path / "split" / "test.jsonl")
    assert (len(train), len(test)) == (8, 2)
    assert {"id", "text", "label"} == set(train[0])


def test_export_tstr_missing_label(fixtures_dir, tmp_path) -> None:
    labels = tmp_path / "labels.jsonl"
    labels.write_text('{"id": "r0", "value": "coding"}\n', encoding="utf-8")
    code = main(
        [
            "export-tstr",
            "--corpus", str(fixtures_dir / "real.jsonl"),
            "--labels", str(labels),
            "--seed", "3",
            "--out", str(tmp_path / "split"),
        ]
    )
    assert code == EXIT_ERROR


def test_generated_corpus_passes_the_grammar(fixtures_dir, tmp_path) -> None:
    generated = tmp_path / "gen.jsonl"
    code = main(
        [
            "gen",
            "--grammar", str(fixtures_dir / "sharegpt.cfg"),
            "--real", str(fixtures_dir / "real.jsonl"),
            "--epsilon", "4",
            "--n", "20",
            "--seed", "7",
            "--out", str(generated),
        ]
    )
    assert code == EXIT_OK
    report = tmp_path / "report.json"
    code = main(
        [
            "evaluate",
            "--config", str(fixtures_dir / "eval_config.json"),
            "--real", str(fixtures_dir / "real.jsonl"),
            "--synth", str(generated),
            "--method", "dp",
            "--epsilon", "4",
            "--out", str(report),
        ]
    )
    assert code == EXIT_OK
    values = {m["name"]: m["value"] for m in json.loads(report.read_text())["metrics"]}
    assert values["cfg_pass_rate"] == 1.0
