"""Append-only on-disk embedding cache, one file per provider, model and dimension.

Layout: a JSON header line carrying a SHA-256 checksum over its own fields,
then one ``{"digest", "vector"}`` JSON record per line. A truncated last line
(interrupted write) is dropped on load and overwritten by the next append.
"""

import hashlib
import json
import logging
import re
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from domain.errors import CacheCorrupt
from domain.ports.embedding_cache_port import EmbeddingCachePort

logger = logging.getLogger(__name__)

CACHE_FORMAT = "structeval-embedding-cache"
CACHE_VERSION = 1


def _header_checksum(fields: Dict[str, object]) -> str:
    canonical = json.dumps(fields, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class JsonlEmbeddingCache(EmbeddingCachePort):
    def __init__(self, cache_dir: Union[str, Path], provider: str, model: str, dimension: int):
        safe_model = re.sub(r"[^A-Za-z0-9_.-]+", "_", model) or "default"
        self.path = Path(cache_dir) / f"{provider}-{safe_model}-{dimension}.jsonl"
        self.fields = {
            "format": CACHE_FORMAT,
            "version": CACHE_VERSION,
            "provider": provider,
            "model": model,
            "dimension": dimension,
        }
        self.dimension = dimension
        self._vectors: Optional[Dict[str, List[float]]] = None
        self._valid_size = 0

    def _header_line(self) -> bytes:
        header = {**self.fields, "checksum": _header_checksum(self.fields)}
        return (json.dumps(header, sort_keys=True) + "\n").encode("utf-8")

    def _check_header(self, line: bytes) -> None:
        try:
            header = json.loads(line)
        except ValueError as e:
            raise CacheCorrupt(str(self.path), "unreadable header") from e
        checksum = header.pop("checksum", None) if isinstance(header, dict) else None
        if checksum != _header_checksum(header):
            raise CacheCorrupt(str(self.path), "header checksum mismatch")
        if header != self.fields:
            raise CacheCorrupt(str(self.path), "header describes a different provider or model")

    def _load(self) -> Dict[str, List[float]]:
        if self._vectors is not None:
            return self._vectors
        self._vectors = {}
        if not self.path.exists():
            return self._vectors

        data = self.path.read_bytes()
        lines = data.split(b"\n")
        # The final element is empty when the file ends in a newline.
        complete, tail = lines[:-1], lines[-1]
        if not complete:
            if tail:
                raise CacheCorrupt(str(self.path), "header line is incomplete")
            return self._vectors
        self._check_header(complete[0])
        offset = len(complete[0]) + 1

        for number, line in enumerate(complete[1:], start=2):
            try:
                record = json.loads(line)
                digest, vector = record["digest"], record["vector"]
            except (ValueError, KeyError, TypeError) as e:
                raise CacheCorrupt(str(self.path), f"bad record on line {number}") from e
            if len(vector) != self.dimension:
                raise CacheCorrupt(str(self.path), f"wrong dimension on line {number}")
            self._vectors[digest] = [float(x) for x in vector]
            offset += len(line) + 1

        if tail:
            logger.warning(f"Ignoring truncated final record in {self.path}")
        self._valid_size = offset
        logger.debug(f"Loaded {len(self._vectors)} cached vectors from {self.path}")
        return self._vectors

    def lookup(self, digests: Iterable[str]) -> Dict[str, List[float]]:
        vectors = self._load()
        return {digest: vectors[digest] for digest in digests if digest in vectors}

    def store(self, entries: Dict[str, List[float]]) -> None:
        vectors = self._load()
        fresh = {d: v for d, v in entries.items() if d not in vectors}
        if not fresh:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        new_file = not self.path.exists() or self._valid_size == 0
        with open(self.path, "r+b" if not new_file else "wb") as handle:
            if new_file:
                handle.write(self._header_line())
            else:
                handle.seek(self._valid_size)
                handle.truncate()
            for digest, vector in fresh.items():
                line = json.dumps({"digest": digest, "vector": vector}) + "\n"
                handle.write(line.encode("utf-8"))
            handle.flush()
            self._valid_size = handle.tell()
        vectors.update(fresh)
