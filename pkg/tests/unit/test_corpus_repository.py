import json

import pytest

from domain.entities.corpus import (
    AttributeKind,
    AttributeSpec,
    CorpusRole,
    SidecarSource,
    SidecarSourceSpec,
)
from domain.errors import (
    DuplicateId,
    MalformedRecord,
    MissingFile,
    MissingLabel,
    TypeMismatch,
)
from infrastructure.adapters.storage.corpus_repository import FileCorpusRepository

from tests.conftest import make_corpus


def write_lines(path, records) -> None:
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")


def sidecar_spec(kind: AttributeKind, key: str = "value") -> AttributeSpec:
    return AttributeSpec(
        name="label",
        kind=kind,
        source=SidecarSourceSpec(sidecar=SidecarSource(real="r.jsonl", synth="s.jsonl", key=key)),
    )


@pytest.fixture
def repository() -> FileCorpusRepository:
    return FileCorpusRepository()


def test_load_fixture_corpus(repository, fixtures_dir) -> None:
    corpus = repository.load_corpus(fixtures_dir / "real.jsonl", role=CorpusRole.REAL)
    assert len(corpus) == 10
    assert corpus.ids[0] == "r0"
    assert corpus.role is CorpusRole.REAL
    assert corpus.source_path.endswith("real.jsonl")


def test_jsonl_ids_default_to_line_number(repository, tmp_path) -> None:
    path = tmp_path / "c.jsonl"
    path.write_text(
        '{"text": "a"}\n\n{"text": "b", "id": 7}\r\n{"text": "c\u2028d"}\n', encoding="utf-8"
    )
    corpus = repository.load_corpus(path)
    assert corpus.ids == ["1", "7", "4"]
    assert corpus.texts == ["a", "b", "c\u2028d"]


def test_lines_format_splits_on_newlines_only(repository, tmp_path) -> None:
    path = tmp_path / "c.txt"
    path.write_bytes("first\u2028still first\r\nsecond\n".encode("utf-8"))
    corpus = repository.load_corpus(path, format="lines")
    assert corpus.ids == ["0", "1"]
    assert corpus.texts == ["first\u2028still first", "second"]


def test_duplicate_id(repository, tmp_path) -> None:
    path = tmp_path / "c.jsonl"
    write_lines(path, [{"id": "x", "text": "a"}, {"id": "x", "text": "b"}])
    with pytest.raises(DuplicateId) as info:
        repository.load_corpus(path)
    assert info.value.sample_id == "x"


def test_malformed_record_reports_line(repository, tmp_path) -> None:
    path = tmp_path / "c.jsonl"
    path.write_text('{"text": "a"}\n{"text": \n', encoding="utf-8")
    with pytest.raises(MalformedRecord) as info:
        repository.load_corpus(path)
    assert info.value.line == 2


def test_record_without_text(repository, tmp_path) -> None:
    path = tmp_path / "c.jsonl"
    write_lines(path, [{"id": "a", "body": "x"}])
    with pytest.raises(MalformedRecord):
        repository.load_corpus(path)


def test_missing_corpus_file(repository, tmp_path) -> None:
    with pytest.raises(MissingFile):
        repository.load_corpus(tmp_path / "absent.jsonl")


def test_unknown_format(repository, fixtures_dir) -> None:
    with pytest.raises(ValueError):
        repository.load_corpus(fixtures_dir / "real.jsonl", format="csv")


def test_write_then_load_keeps_ids_and_order(repository, tmp_path) -> None:
    corpus = make_corpus(["α", "b\nc"], prefix="s")
    path = tmp_path / "out" / "gen.jsonl"
    repository.write_corpus(corpus, path)
    loaded = repository.load_corpus(path)
    assert loaded.ids == ["s0", "s1"]
    assert loaded.texts == ["α", "b\nc"]


def test_numeric_sidecar_labels(repository, tmp_path) -> None:
    path = tmp_path / "labels.jsonl"
    write_lines(path, [{"id": "a", "score": 1}, {"id": "b", "score": "2.5"}])
    labels = repository.load_sidecar_labels(path, sidecar_spec(AttributeKind.NUMERIC, "score"))
    assert labels == {"a": 1.0, "b": 2.5}


@pytest.mark.parametrize("value", ["high", True, "nan"])
def test_numeric_sidecar_rejects_non_numbers(repository, tmp_path, value) -> None:
    path = tmp_path / "labels.jsonl"
    write_lines(path, [{"id": "a", "value": value}])
    with pytest.raises(TypeMismatch) as info:
        repository.load_sidecar_labels(path, sidecar_spec(AttributeKind.NUMERIC))
    assert info.value.sample_id == "a"


def test_categorical_sidecar_labels(repository, fixtures_dir) -> None:
    labels = repository.load_sidecar_labels(
        fixtures_dir / "topics_real.jsonl", sidecar_spec(AttributeKind.CATEGORICAL)
    )
    assert len(labels) == 10
    assert set(labels.values()) <= {"coding", "travel", "cooking", "health"}


def test_categorical_sidecar_rejects_lists(repository, tmp_path) -> None:
    path = tmp_path / "labels.jsonl"
    write_lines(path, [{"id": "a", "value": ["x"]}])
    with pytest.raises(TypeMismatch):
        repository.load_sidecar_labels(path, sidecar_spec(AttributeKind.CATEGORICAL))


def test_pair_scores(repository, tmp_path) -> None:
    path = tmp_path / "scores.jsonl"
    write_lines(
        path,
        [
            {"id": "r0", "pair": 0, "score": 0.9},
            {"id": "r0", "pair": 1, "score": 0.1, "pattern": "query->response:next-sibling"},
        ],
    )
    scores = repository.load_pair_scores(path)
    assert scores[("r0", 0, "")] == 0.9
    assert scores[("r0", 1, "query->response:next-sibling")] == 0.1

    write_lines(path, [{"id": "r0", "score": 0.5}])
    with pytest.raises(MalformedRecord):
        repository.load_pair_scores(path)


def test_tstr_split_sizes_and_determinism(repository, tmp_path) -> None:
    corpus = make_corpus([f"text {i}" for i in range(10)])
    labels = {sample.id: "a" if i % 2 else "b" for i, sample in enumerate(corpus.samples)}

    train_path, test_path = repository.export_tstr_split(corpus, labels, 0.2, 42, tmp_path / "one")
    train = [json.loads(line) for line in train_path.read_text().splitlines()]
    test = [json.loads(line) for line in test_path.read_text().splitlines()]
    assert len(train) == 8
    assert len(test) == 2
    assert {r["id"] for r in train} | {r["id"] for r in test} == set(corpus.ids)
    assert all(r["label"] == labels[r["id"]] for r in train + test)

    again = repository.export_tstr_split(corpus, labels, 0.2, 42, tmp_path / "two")
    assert again[0].read_bytes() == train_path.read_bytes()
    assert again[1].read_bytes() == test_path.read_bytes()


def test_tstr_split_needs_every_label(repository, tmp_path) -> None:
    corpus = make_corpus(["a", "b"])
    with pytest.raises(MissingLabel):
        repository.export_tstr_split(corpus, {"0": "x"}, 0.5, 1, tmp_path)
    with pytest.raises(ValueError):
        repository.export_tstr_split(corpus, {"0": "x", "1": "y"}, 1.5, 1, tmp_path)
