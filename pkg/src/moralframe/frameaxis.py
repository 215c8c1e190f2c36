"""Moral axes from seed centroids, per-document bias scores, score groups."""
from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .embeddings import EmbeddingTable
from .lexicon import FRAMES, CoverageReport, SeedLexicon, resolve_coverage


class AxisError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MoralAxis:
    frame: str
    direction: np.ndarray
    vice_centroid: np.ndarray
    virtue_centroid: np.ndarray
    resolved_counts: tuple[int, int]


@dataclass(frozen=True, eq=False)
class MoralAxisSet:
    axes: dict[str, MoralAxis]
    coverage: CoverageReport | None = None
    lexicon_source: str = ""
    embedding_source: str = ""

    def __getitem__(self, frame: str) -> MoralAxis:
        return self.axes[frame]

    @property
    def frames(self) -> tuple[str, ...]:
        return tuple(f for f in FRAMES if f in self.axes)

    def directions(self) -> np.ndarray:
        return np.vstack([self.axes[f].direction for f in self.frames])


@dataclass(frozen=True)
class BiasScore:
    frame: str
    value: float | None
    matched_token_count: int
    total_token_count: int

    @property
    def defined(self) -> bool:
        return self.value is not None


def axis_from_vectors(frame: str, vice_vectors, virtue_vectors) -> MoralAxis:
    vice = np.asarray(vice_vectors, dtype=np.float64)
    virtue = np.asarray(virtue_vectors, dtype=np.float64)
    vice_c = vice.mean(axis=0)
    virtue_c = virtue.mean(axis=0)
    direction = virtue_c - vice_c
    if not np.any(direction != 0.0):
        raise AxisError(f"frame {frame!r}: vice and virtue centroids coincide (zero-norm axis)")
    return MoralAxis(frame, direction, vice_c, virtue_c, (len(vice), len(virtue)))


def build_axes(lex: SeedLexicon, table: EmbeddingTable) -> MoralAxisSet:
    """Axis direction is virtue centroid minus vice centroid (positive = virtue)."""
    cov = resolve_coverage(lex, table)
    axes = {}
    for f in FRAMES:
        vice = [table.vectors[table.index[t]] for t in cov.resolved(f, "vice")]
        virtue = [table.vectors[table.index[t]] for t in cov.resolved(f, "virtue")]
        axes[f] = axis_from_vectors(f, vice, virtue)
    return MoralAxisSet(axes, cov, lex.source, table.source_path)


@dataclass
class ScoreBatch:
    """Scores for many documents: ``values`` is (n_docs, n_frames), NaN = undefined."""

    frames: tuple[str, ...]
    values: np.ndarray
    matched: np.ndarray
    total: np.ndarray

    def __len__(self) -> int:
        return self.values.shape[0]

    def bias_scores(self, i: int) -> dict[str, BiasScore]:
        out = {}
        for j, f in enumerate(self.frames):
            v = self.values[i, j]
            out[f] = BiasScore(f, None if math.isnan(v) else float(v), int(self.matched[i]), int(self.total[i]))
        return out


@dataclass
class AxisScorer:
    """Caches token cosines against every axis so large corpora score fast."""

    axes: MoralAxisSet
    table: EmbeddingTable
    _cos: dict[str, np.ndarray | None] = field(default_factory=dict, repr=False)

    def _ensure(self, tokens) -> None:
        new = sorted({t for t in tokens if t not in self._cos})
        if not new:
            return
        rows = [self.table.index.get(t) for t in new]
        hit = [i for i, r in enumerate(rows) if r is not None]
        for i, t in enumerate(new):
            self._cos[t] = None
        if not hit:
            return
        vecs = self.table.vectors[[rows[i] for i in hit]]
        cos = _kernels.row_cosines(vecs, self.axes.directions())
        for h, c in zip(hit, cos):
            # zero-norm vectors carry no direction; treat as out of vocabulary
            if not np.isnan(c[0]):
                self._cos[new[h]] = c

    def score_many(self, docs: Sequence[Sequence[str]]) -> ScoreBatch:
        """Score token sequences; summation runs over distinct tokens in sorted order."""
        frames = self.axes.frames
        all_tokens = set()
        for d in docs:
            all_tokens.update(d)
        self._ensure(all_tokens)

        vocab: dict[str, int] = {}
        cos_rows = []
        indptr = [0]
        ids: list[int] = []
        counts: list[float] = []
        matched = np.zeros(len(docs), dtype=np.int64)
        total = np.zeros(len(docs), dtype=np.int64)
        for i, d in enumerate(docs):
            total[i] = len(d)
            tf = Counter(d)
            m = 0
            for tok in sorted(tf):
                c = self._cos[tok]
                if c is None:
                    continue
                j = vocab.get(tok)
                if j is None:
                    j = vocab[tok] = len(cos_rows)
                    cos_rows.append(c)
                ids.append(j)
                counts.append(tf[tok])
                m += tf[tok]
            matched[i] = m
            indptr.append(len(ids))
        values = np.vstack(cos_rows) if cos_rows else np.zeros((0, len(frames)))
        if not cos_rows:
            means = np.full((len(docs), len(frames)), np.nan)
        else:
            means, _ = _kernels.doc_weighted_mean(
                np.asarray(indptr, dtype=np.int64),
                np.asarray(ids, dtype=np.int64),
                np.asarray(counts, dtype=np.float64),
                values,
            )
        return ScoreBatch(frames, means, matched, total)

    def score(self, tokens: Sequence[str]) -> dict[str, BiasScore]:
        return self.score_many([tokens]).bias_scores(0)


def score_document(axes: MoralAxisSet, table: EmbeddingTable, tokens: Sequence[str]) -> dict[str, BiasScore]:
    """tf-weighted mean cosine of in-vocabulary tokens against each axis."""
    return AxisScorer(axes, table).score(tokens)


def score_documents(axes: MoralAxisSet, table: EmbeddingTable, docs: Sequence[Sequence[str]]) -> ScoreBatch:
    return AxisScorer(axes, table).score_many(docs)


class ZeroVarianceWarning(UserWarning):
    pass


def split_groups(scores: Sequence[float | None]) -> list[str | None]:
    """Assign low / medium / high around mean +- one sample sd.

    Undefined entries (None or NaN) get ``None``. Boundaries belong to medium.
    """
    vals = [None if s is None or (isinstance(s, float) and math.isnan(s)) else float(s) for s in scores]
    defined = [v for v in vals if v is not None]
    if len(defined) < 2:
        raise ValueError(f"need at least 2 defined scores, got {len(defined)}")
    arr = np.asarray(defined)
    mu = math.fsum(defined) / len(defined)
    sd = math.sqrt(math.fsum((arr - mu) ** 2) / (len(defined) - 1))
    if sd == 0.0:
        warnings.warn("all scores identical; every document is medium", ZeroVarianceWarning, stacklevel=2)
    lo, hi = mu - sd, mu + sd
    out: list[str | None] = []
    for v in vals:
        if v is None:
            out.append(None)
        elif v < lo:
            out.append("low")
        elif v > hi:
            out.append("high")
        else:
            out.append("medium")
    return out
