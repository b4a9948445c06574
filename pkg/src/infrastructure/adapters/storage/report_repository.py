"""Report persistence: per-run JSON reports and comparison tables."""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

from application.services.report_builder import Comparison
from domain.entities.report import EvalReport
from domain.errors import CorpusIOError, MalformedRecord, MissingFile

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def save_report(report: EvalReport, path: PathLike) -> Path:
    out = Path(path)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(report.to_record(), indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise CorpusIOError(f"cannot write {out}: {e}") from e
    logger.info(f"Saved report for {report.method} to {out}")
    return out


def load_report(path: PathLike) -> EvalReport:
    source = Path(path)
    if not source.is_file():
        raise MissingFile(str(source))
    try:
        record = json.loads(source.read_text(encoding="utf-8"))
        return EvalReport.from_record(record)
    except json.JSONDecodeError as e:
        raise MalformedRecord(e.lineno, e.msg) from e
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedRecord(1, f"not an evaluation report: {e}") from e


def _write_csv(path: Path, columns: List[str], rows: List[Dict[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def write_comparison(comparison: Comparison, out_dir: PathLike) -> Dict[str, Path]:
    """Write ``raw.csv``, ``rescaled.csv`` and ``bundle.json`` into ``out_dir``."""
    out = Path(out_dir)
    columns = ["method", *comparison.metrics]
    paths = {
        "raw": out / "raw.csv",
        "rescaled": out / "rescaled.csv",
        "bundle": out / "bundle.json",
    }
    try:
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(paths["raw"], columns, comparison.raw)
        _write_csv(paths["rescaled"], columns, comparison.rescaled)
        paths["bundle"].write_text(json.dumps(comparison.bundle, indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise CorpusIOError(f"cannot write comparison to {out}: {e}") from e
    logger.info(f"Wrote comparison tables to {out}")
    return paths
