"""GloVe-style text embeddings: loading, lookup and cosine similarity."""
from __future__ import annotations

import gzip
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

DEFAULT_DIM = 200
_GZIP_MAGIC = b"\x1f\x8b"


class EmbeddingError(ValueError):
    """Base class for embedding file problems."""


class EmbeddingFileError(EmbeddingError, OSError):
    pass


class DimensionMismatchError(EmbeddingError):
    pass


class NonNumericError(EmbeddingError):
    pass


class EmptyEmbeddingFileError(EmbeddingError):
    pass


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """Immutable token -> vector table backed by one contiguous matrix."""

    dimension: int
    vectors: np.ndarray
    index: dict[str, int]
    source_path: str = ""
    duplicate_count: int = 0
    tokens: tuple[str, ...] = field(default=())

    def __post_init__(self):
        self.vectors.setflags(write=False)
        if not self.tokens:
            toks = [""] * len(self.index)
            for t, i in self.index.items():
                toks[i] = t
            object.__setattr__(self, "tokens", tuple(toks))

    @property
    def token_count(self) -> int:
        return len(self.index)

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, token: str) -> bool:
        return token.lower() in self.index

    def lookup(self, token: str) -> np.ndarray | None:
        return lookup(self, token)

    @classmethod
    def from_mapping(cls, entries: dict[str, Iterable[float]], source_path: str = "<memory>") -> "EmbeddingTable":
        """Build a table from a dict; first occurrence wins after case folding."""
        index: dict[str, int] = {}
        rows = []
        dup = 0
        dim = None
        for tok, vec in entries.items():
            key = tok.lower()
            v = np.asarray(list(vec), dtype=np.float64)
            if dim is None:
                dim = v.shape[0]
            if v.shape != (dim,):
                raise DimensionMismatchError(f"token {tok!r}: expected {dim} components, got {v.shape[0]}")
            if not np.all(np.isfinite(v)):
                raise NonNumericError(f"token {tok!r}: non-finite component")
            if key in index:
                dup += 1
                continue
            index[key] = len(rows)
            rows.append(v)
        if dim is None:
            raise EmptyEmbeddingFileError("no entries")
        return cls(dim, np.vstack(rows), index, source_path, dup)


def _open_text(path: Path):
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == _GZIP_MAGIC:
        return gzip.open(path, "rt", encoding="utf-8", newline="\n")
    return open(path, "r", encoding="utf-8", newline="\n")


def load_embeddings(
    path: str | Path,
    expected_dim: int | None = None,
    restrict_to: set[str] | None = None,
) -> EmbeddingTable:
    """Parse a GloVe text file (plain or gzip).

    ``restrict_to`` keeps only the given (lowercase) tokens, which keeps
    memory bounded for multi-million-token vocabularies. Every line is still
    validated.
    """
    path = Path(path)
    try:
        fh = _open_text(path)
    except OSError as exc:
        raise EmbeddingFileError(f"cannot read embedding file {path}: {exc.strerror or exc}") from exc

    index: dict[str, int] = {}
    flat: list[float] = []
    dim = expected_dim
    dup = 0
    seen_any = False
    with fh:
        try:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n").rstrip("\r")
                if not line.strip():
                    continue
                parts = line.split(" ")
                token, comps = parts[0], parts[1:]
                if comps and comps[-1] == "":
                    comps.pop()  # tolerate one trailing space
                if dim is None:
                    dim = len(comps)
                    if dim == 0:
                        raise DimensionMismatchError(f"line {lineno}: no vector components")
                if len(comps) != dim:
                    if not seen_any and expected_dim is not None:
                        raise DimensionMismatchError(
                            f"line {lineno}: expected_dim {expected_dim} but file has {len(comps)} components"
                        )
                    raise DimensionMismatchError(
                        f"line {lineno}: expected {dim} components, got {len(comps)}"
                    )
                try:
                    vals = [float(c) for c in comps]
                except ValueError:
                    raise NonNumericError(f"line {lineno}: non-numeric component") from None
                if not all(math.isfinite(v) for v in vals):
                    raise NonNumericError(f"line {lineno}: non-finite component")
                seen_any = True
                key = token.lower()
                if key in index:
                    dup += 1
                    continue
                if restrict_to is not None and key not in restrict_to:
                    # mark as seen so a later duplicate still counts
                    index[key] = -1
                    continue
                index[key] = len(flat) // dim
                flat.extend(vals)
        except UnicodeDecodeError as exc:
            raise EmbeddingFileError(f"cannot decode embedding file {path}: {exc}") from exc
        except (OSError, EOFError) as exc:
            raise EmbeddingFileError(f"cannot read embedding file {path}: {exc}") from exc

    if not seen_any:
        raise EmptyEmbeddingFileError(f"embedding file {path} is empty")
    index = {t: i for t, i in index.items() if i >= 0}
    vectors = np.array(flat, dtype=np.float64).reshape(-1, dim)
    return EmbeddingTable(dim, vectors, index, str(path), dup)


def write_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    """Write in GloVe text format; ``repr`` floats reload bit-for-bit."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, tok in enumerate(table.tokens):
            fh.write(tok + " " + " ".join(repr(float(x)) for x in table.vectors[i]) + "\n")


def lookup(table: EmbeddingTable, token: str) -> np.ndarray | None:
    i = table.index.get(token.lower())
    if i is None:
        return None
    return table.vectors[i]


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    uu = float(np.dot(u, u))
    vv = float(np.dot(v, v))
    if uu == 0.0 or vv == 0.0:
        raise ValueError("cosine undefined for zero-norm vector")
    c = float(np.dot(u, v)) / math.sqrt(uu * vv)
    return min(1.0, max(-1.0, c))
