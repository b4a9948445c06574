"""File-system Corpus Repository Adapter for hexagonal architecture."""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterator, List, Tuple

import numpy as np

from domain.entities.corpus import (
    AttributeKind,
    AttributeSpec,
    AttributeValue,
    Corpus,
    CorpusRole,
    Sample,
)
from domain.errors import (
    CorpusIOError,
    DuplicateId,
    MalformedRecord,
    MissingFile,
    MissingLabel,
    TypeMismatch,
)
from domain.ports.corpus_repository_port import CorpusRepositoryPort, PathLike

logger = logging.getLogger(__name__)

CORPUS_FORMATS = ("jsonl", "lines")


def _read_text(path: PathLike) -> str:
    file_path = Path(path)
    if not file_path.is_file():
        raise MissingFile(str(file_path))
    try:
        return file_path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise CorpusIOError(f"cannot read {file_path}: {e}") from e


def _jsonl_records(path: PathLike) -> Iterator[Tuple[int, Dict[str, Any]]]:
    """Yield (1-based line number, object) for each non-blank line."""
    for number, line in enumerate(_read_text(path).split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedRecord(number, e.msg) from e
        if not isinstance(record, dict):
            raise MalformedRecord(number, "record is not a JSON object")
        yield number, record


def _write_jsonl(path: Path, records: List[Dict[str, Any]]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            for record in records:
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    except OSError as e:
        raise CorpusIOError(f"cannot write {path}: {e}") from e


class FileCorpusRepository(CorpusRepositoryPort):
    """Corpora, label sidecars and split exports as UTF-8 JSONL files."""

    def load_corpus(
        self, path: PathLike, format: str = "jsonl", role: CorpusRole = CorpusRole.REAL
    ) -> Corpus:
        if format not in CORPUS_FORMATS:
            raise ValueError(f"unknown corpus format '{format}'")
        samples: List[Sample] = []
        seen = set()

        if format == "lines":
            # Physical lines only: no splitting on other Unicode line breaks.
            text = _read_text(path)
            lines = text.split("\n")
            if lines and lines[-1] == "":
                lines.pop()
            for index, line in enumerate(lines):
                samples.append(Sample(id=str(index), text=line.rstrip("\r")))
        else:
            for number, record in _jsonl_records(path):
                text = record.get("text")
                if not isinstance(text, str):
                    raise MalformedRecord(number, "missing string field 'text'")
                # Without an id a record is named by its physical line number.
                sample_id = record.get("id", number)
                if not isinstance(sample_id, (str, int)) or isinstance(sample_id, bool):
                    raise MalformedRecord(number, "field 'id' must be a string or integer")
                sample_id = str(sample_id)
                if sample_id in seen:
                    raise DuplicateId(sample_id)
                seen.add(sample_id)
                samples.append(Sample(id=sample_id, text=text))

        logger.info(f"Loaded {len(samples)} samples from {path}")
        return Corpus(samples=tuple(samples), source_path=str(path), role=role)

    def write_corpus(self, corpus: Corpus, path: PathLike) -> None:
        _write_jsonl(
            Path(path), [{"id": sample.id, "text": sample.text} for sample in corpus.samples]
        )
        logger.info(f"Wrote {len(corpus)} samples to {path}")

    def load_sidecar_labels(
        self, path: PathLike, spec: AttributeSpec
    ) -> Dict[str, AttributeValue]:
        key = getattr(getattr(spec.source, "sidecar", None), "key", "value")
        labels: Dict[str, AttributeValue] = {}
        for number, record in _jsonl_records(path):
            if "id" not in record or key not in record:
                raise MalformedRecord(number, f"expected fields 'id' and '{key}'")
            sample_id = str(record["id"])
            value = record[key]
            if spec.kind is AttributeKind.NUMERIC:
                if isinstance(value, bool):
                    raise TypeMismatch(sample_id, "boolean is not numeric")
                try:
                    number_value = float(value)
                except (TypeError, ValueError) as e:
                    raise TypeMismatch(sample_id, f"{value!r} is not numeric") from e
                if not math.isfinite(number_value):
                    raise TypeMismatch(sample_id, f"{value!r} is not finite")
                labels[sample_id] = number_value
            else:
                if not isinstance(value, (str, int)) or isinstance(value, bool):
                    raise TypeMismatch(sample_id, f"{value!r} is not a category")
                labels[sample_id] = str(value)
        return labels

    def load_pair_scores(self, path: PathLike) -> Dict[Tuple[str, int, str], float]:
        scores: Dict[Tuple[str, int, str], float] = {}
        for number, record in _jsonl_records(path):
            try:
                key = (str(record["id"]), int(record["pair"]), str(record.get("pattern", "")))
                scores[key] = float(record["score"])
            except (KeyError, TypeError, ValueError) as e:
                raise MalformedRecord(number, "expected fields 'id', 'pair' and 'score'") from e
        return scores

    def export_tstr_split(
        self,
        corpus: Corpus,
        labels: Dict[str, AttributeValue],
        test_fraction: float,
        seed: int,
        out_dir: PathLike,
    ) -> Tuple[Path, Path]:
        if not 0.0 <= test_fraction <= 1.0:
            raise ValueError("test_fraction must lie in [0, 1]")
        for sample in corpus.samples:
            if sample.id not in labels:
                raise MissingLabel(sample.id)

        order = np.random.default_rng(seed).permutation(len(corpus)).tolist()
        n_test = round(test_fraction * len(corpus))
        test_idx = set(order[:n_test])

        train, test = [], []
        for index, sample in enumerate(corpus.samples):
            record = {"id": sample.id, "text": sample.text, "label": labels[sample.id]}
            (test if index in test_idx else train).append(record)

        out = Path(out_dir)
        train_path, test_path = out / "train.jsonl", out / "test.jsonl"
        _write_jsonl(train_path, train)
        _write_jsonl(test_path, test)
        logger.info(f"Exported TSTR split: {len(train)} train / {len(test)} test to {out}")
        return train_path, test_path
