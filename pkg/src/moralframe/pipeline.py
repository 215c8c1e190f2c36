"""Campaign ingestion, feature rows, regression designs and figure tables."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import stats
from .embeddings import EmbeddingTable
from .frameaxis import AxisScorer, MoralAxisSet, split_groups
from .lexicon import FRAMES
from .textprep import (
    NEG_THRESHOLD,
    POS_THRESHOLD,
    classify_sentiment,
    count_whitespace_tokens,
    tokenize_for_scoring,
)

log = logging.getLogger(__name__)

CATEGORIES = ("Animals", "Emergency", "Medical", "Memorial")
REFERENCE_CATEGORY = "Animals"
_CATEGORY_ALIASES = {
    "animals": "Animals",
    "emergency": "Emergency",
    "financial emergency": "Emergency",
    "medical": "Medical",
    "memorial": "Memorial",
}
CANONICAL_FIELDS = (
    "campaign_id",
    "category",
    "appeal_text",
    "goal_amount",
    "photo_count",
    "donations",
    "comments",
)
MAX_REJECT_FRACTION = 0.5
GROUPS = ("low", "medium", "high")


class UnknownCategoryError(ValueError):
    pass


class IngestError(Exception):
    def __init__(self, message: str, report: "IngestReport | None" = None):
        super().__init__(message)
        self.report = report


class EmptyDataError(ValueError):
    pass


@dataclass(frozen=True)
class CampaignRecord:
    campaign_id: str
    category: str
    appeal_text: str
    goal_amount: float
    photo_count: int
    donations: tuple[float, ...]
    comments: tuple[str, ...]
    sentiment_compound: float | None = None

    @property
    def n_donations(self) -> int:
        return len(self.donations)

    @property
    def total_raised(self) -> float:
        return math.fsum(self.donations)

    @property
    def avg_donation(self) -> float | None:
        if not self.donations:
            return None
        return self.total_raised / len(self.donations)


def normalize_category(raw: str) -> str:
    key = " ".join(str(raw).split()).lower()
    try:
        return _CATEGORY_ALIASES[key]
    except KeyError:
        raise UnknownCategoryError(f"unknown category: {raw!r}") from None


# --------------------------------------------------------------------------
# ingestion


@dataclass
class Reject:
    line: int
    campaign_id: str | None
    reason: str


@dataclass
class IngestReport:
    records: list[CampaignRecord]
    rejects: list[Reject]
    n_lines: int
    source: str = ""

    def summary(self) -> dict:
        return {"lines": self.n_lines, "accepted": len(self.records), "rejected": len(self.rejects)}


def load_mapping(path: str | Path) -> dict[str, str]:
    """Read ``source.dot.path = canonical_field`` lines (``#`` comments)."""
    mapping = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'source.path = canonical_field'")
        src, dst = (s.strip() for s in line.split("=", 1))
        if dst not in CANONICAL_FIELDS and dst != "sentiment_compound":
            raise ValueError(f"{path}:{lineno}: unknown canonical field {dst!r}")
        if dst in mapping.values():
            raise ValueError(f"{path}:{lineno}: canonical field {dst!r} mapped twice")
        mapping[src] = dst
    return mapping


_MISSING = object()


def _get_path(obj, dotted: str):
    cur = obj
    for part in dotted.split("."):
        if isinstance(cur, dict) and part in cur:
            cur = cur[part]
        else:
            return _MISSING
    return cur


def _canonicalize(obj: dict, mapping: dict[str, str] | None, sentiment_column: str | None) -> dict:
    out = {}
    sources = {f: f for f in CANONICAL_FIELDS}
    if mapping:
        for src, dst in mapping.items():
            sources[dst] = src
    if sentiment_column:
        sources["sentiment_compound"] = sentiment_column
    for dst, src in sources.items():
        val = _get_path(obj, src)
        if val is not _MISSING:
            out[dst] = val
    return out


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def record_from_dict(d: dict) -> CampaignRecord:
    """Validate a canonical-field dict; raises ValueError with the reject reason."""
    for f in CANONICAL_FIELDS:
        if f not in d or d[f] is None:
            raise ValueError(f"missing field: {f}")
    cid = d["campaign_id"]
    if not isinstance(cid, (str, int)) or isinstance(cid, bool) or str(cid) == "":
        raise ValueError("invalid campaign_id")
    category = normalize_category(d["category"]) if isinstance(d["category"], str) else None
    if category is None:
        raise ValueError("invalid category")
    if not isinstance(d["appeal_text"], str):
        raise ValueError("appeal_text must be a string")
    goal = d["goal_amount"]
    if not _is_number(goal) or goal <= 0:
        raise ValueError("goal_amount must be a positive number")
    photos = d["photo_count"]
    if isinstance(photos, float) and photos.is_integer():
        photos = int(photos)
    if not isinstance(photos, int) or isinstance(photos, bool) or photos < 0:
        raise ValueError("photo_count must be a non-negative integer")
    dons = d["donations"]
    if not isinstance(dons, list):
        raise ValueError("donations must be a list")
    amounts = []
    for k, item in enumerate(dons):
        amt = item.get("amount") if isinstance(item, dict) else item
        if not _is_number(amt) or amt <= 0:
            raise ValueError(f"donation {k + 1}: amount must be a positive number")
        amounts.append(float(amt))
    comments = d["comments"]
    if not isinstance(comments, list):
        raise ValueError("comments must be a list")
    texts = []
    for k, item in enumerate(comments):
        txt = item.get("text") if isinstance(item, dict) else item
        if not isinstance(txt, str):
            raise ValueError(f"comment {k + 1}: text must be a string")
        texts.append(txt)
    sent = d.get("sentiment_compound")
    if sent is not None:
        if not _is_number(sent) or not -1.0 <= sent <= 1.0:
            raise ValueError("sentiment compound must be a number in [-1, 1]")
        sent = float(sent)
    return CampaignRecord(str(cid), category, d["appeal_text"], float(goal), photos, tuple(amounts), tuple(texts), sent)


def ingest(
    path: str | Path,
    mapping: dict[str, str] | None = None,
    sentiment_column: str | None = None,
    max_reject_fraction: float = MAX_REJECT_FRACTION,
) -> IngestReport:
    """Read a JSON-lines campaign file; bad lines go to the rejects list."""
    path = Path(path)
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read dataset {path}: {exc.strerror or exc}") from exc
    records: list[CampaignRecord] = []
    rejects: list[Reject] = []
    seen: set[str] = set()
    n_lines = 0
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            n_lines += 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                rejects.append(Reject(lineno, None, f"invalid JSON: {exc.msg}"))
                continue
            if not isinstance(obj, dict):
                rejects.append(Reject(lineno, None, "line is not a JSON object"))
                continue
            d = _canonicalize(obj, mapping, sentiment_column)
            cid = d.get("campaign_id")
            cid = None if cid is None else str(cid)
            try:
                rec = record_from_dict(d)
            except ValueError as exc:
                rejects.append(Reject(lineno, cid, str(exc)))
                continue
            if rec.campaign_id in seen:
                rejects.append(Reject(lineno, cid, "duplicate campaign_id"))
                continue
            seen.add(rec.campaign_id)
            records.append(rec)
    report = IngestReport(records, rejects, n_lines, str(path))
    if n_lines and len(rejects) / n_lines > max_reject_fraction:
        raise IngestError(f"{len(rejects)} of {n_lines} lines rejected", report)
    return report


def write_jsonl(records: Iterable[CampaignRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            obj = {
                "campaign_id": r.campaign_id,
                "category": r.category,
                "appeal_text": r.appeal_text,
                "goal_amount": r.goal_amount,
                "photo_count": r.photo_count,
                "donations": list(r.donations),
                "comments": list(r.comments),
            }
            if r.sentiment_compound is not None:
                obj["sentiment_compound"] = r.sentiment_compound
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# features


@dataclass(frozen=True)
class FeatureRow:
    campaign_id: str
    category: str
    care: float
    fairness: float
    loyalty: float
    sentiment: str
    log_length: float
    log_photos: float
    log_goal: float
    log_n_donations: float
    log_avg_amount: float | None
    log_n_comments: float
    # untransformed values, kept for descriptives
    appeal_length: int = 0
    photo_count: int = 0
    goal_amount: float = 0.0
    n_donations: int = 0
    avg_amount: float | None = None
    n_comments: int = 0
    sentiment_compound: float = 0.0

    def score(self, frame: str) -> float:
        return getattr(self, frame)


@dataclass
class FeatureDrop:
    campaign_id: str
    reason: str


def build_features(
    records: Sequence[CampaignRecord],
    axes: MoralAxisSet,
    table: EmbeddingTable,
    valence: dict[str, float] | None,
    pos: float = POS_THRESHOLD,
    neg: float = NEG_THRESHOLD,
    use_overrides: bool = True,
    scorer: AxisScorer | None = None,
) -> tuple[list[FeatureRow], list[FeatureDrop]]:
    scorer = scorer or AxisScorer(axes, table)
    batch = scorer.score_many([tokenize_for_scoring(r.appeal_text) for r in records])
    idx = {f: batch.frames.index(f) for f in FRAMES}
    rows: list[FeatureRow] = []
    drops: list[FeatureDrop] = []
    for i, r in enumerate(records):
        sc = batch.values[i]
        if np.any(np.isnan(sc)):
            drops.append(FeatureDrop(r.campaign_id, "undefined moral scores"))
            continue
        override = r.sentiment_compound if use_overrides else None
        sent = classify_sentiment(r.appeal_text, valence, override, pos, neg)
        length = count_whitespace_tokens(r.appeal_text)
        avg = r.avg_donation
        rows.append(
            FeatureRow(
                campaign_id=r.campaign_id,
                category=r.category,
                care=float(sc[idx["care"]]),
                fairness=float(sc[idx["fairness"]]),
                loyalty=float(sc[idx["loyalty"]]),
                sentiment=sent.label,
                log_length=stats.log1p_transform(length),
                log_photos=stats.log1p_transform(r.photo_count),
                log_goal=stats.log1p_transform(r.goal_amount),
                log_n_donations=stats.log1p_transform(r.n_donations),
                log_avg_amount=None if avg is None else stats.log1p_transform(avg),
                log_n_comments=stats.log1p_transform(len(r.comments)),
                appeal_length=length,
                photo_count=r.photo_count,
                goal_amount=r.goal_amount,
                n_donations=r.n_donations,
                avg_amount=avg,
                n_comments=len(r.comments),
                sentiment_compound=sent.compound,
            )
        )
    return rows, drops


# --------------------------------------------------------------------------
# regression designs

MODEL_OUTCOMES = {1: "log_n_donations", 2: "log_avg_amount", 3: "log_n_comments"}
MODEL_LABELS = {1: "Number of donations", 2: "Average donation amount", 3: "Number of comments"}
_FRAME_LABEL = {"care": "Care", "fairness": "Fairness", "loyalty": "Loyalty"}
_DUMMY_CATS = CATEGORIES[1:]
CONTROL_COLUMNS = ("Positive sentiment", "Neutral sentiment", "Campaign appeal length", "Number of photos", "Fundraising goal")


def design_columns(interactions: bool = True) -> tuple[str, ...]:
    cols = ["Intercept", *_DUMMY_CATS, *(_FRAME_LABEL[f] for f in FRAMES)]
    if interactions:
        cols += [f"{c} x {_FRAME_LABEL[f]}" for f in FRAMES for c in _DUMMY_CATS]
    cols += CONTROL_COLUMNS
    return tuple(cols)


def design_row(row: FeatureRow, interactions: bool = True) -> list[float]:
    dummies = [1.0 if row.category == c else 0.0 for c in _DUMMY_CATS]
    scores = [row.score(f) for f in FRAMES]
    vals = [1.0, *dummies, *scores]
    if interactions:
        vals += [d * s for s in scores for d in dummies]
    vals += [
        1.0 if row.sentiment == "positive" else 0.0,
        1.0 if row.sentiment == "neutral" else 0.0,
        row.log_length,
        row.log_photos,
        row.log_goal,
    ]
    return vals


@dataclass
class ModelData:
    model_id: int
    X: stats.DesignMatrix
    y: np.ndarray
    n_dropped: int


def model_spec(model_id: int, rows: Sequence[FeatureRow], interactions: bool = True) -> ModelData:
    if model_id not in MODEL_OUTCOMES:
        raise ValueError(f"model_id must be 1, 2 or 3, got {model_id}")
    if not rows:
        raise EmptyDataError("no feature rows")
    outcome = MODEL_OUTCOMES[model_id]
    used = [r for r in rows if getattr(r, outcome) is not None]
    if not used:
        raise EmptyDataError(f"model {model_id}: no rows with a defined outcome")
    X = np.array([design_row(r, interactions) for r in used], dtype=np.float64)
    y = np.array([getattr(r, outcome) for r in used], dtype=np.float64)
    dm = stats.DesignMatrix(X, design_columns(interactions), tuple(r.campaign_id for r in used))
    return ModelData(model_id, dm, y, len(rows) - len(used))


def fit_model(model_id: int, rows: Sequence[FeatureRow], interactions: bool = True) -> stats.FitResult:
    md = model_spec(model_id, rows, interactions)
    return stats.fit_ols(md.X, md.y, n_dropped_rows=md.n_dropped)


# --------------------------------------------------------------------------
# descriptive tables

DESCRIPTIVE_VARIABLES = (
    ("n_donations", "Number of donations"),
    ("avg_amount", "Average donation amount per donor"),
    ("n_comments", "Number of comments"),
    ("care", "Care score"),
    ("fairness", "Fairness score"),
    ("loyalty", "Loyalty score"),
    ("appeal_length", "Campaign appeal length"),
    ("photo_count", "Number of photos"),
    ("goal_amount", "Fundraising goal"),
)


@dataclass
class DescriptiveCell:
    category: str
    variable: str
    n: int
    mean: float | None
    sd: float | None


def descriptives(rows: Sequence[FeatureRow]) -> list[DescriptiveCell]:
    """Mean and sd of untransformed variables, per category."""
    if not rows:
        raise EmptyDataError("no feature rows")
    cells = []
    for var, _label in DESCRIPTIVE_VARIABLES:
        for cat in CATEGORIES:
            vals = [getattr(r, var) for r in rows if r.category == cat]
            vals = [v for v in vals if v is not None]
            if not vals:
                cells.append(DescriptiveCell(cat, var, 0, None, None))
                continue
            mean, sd, n = stats.describe(vals)
            cells.append(DescriptiveCell(cat, var, n, mean, sd))
    return cells


def sentiment_distribution(rows: Sequence[FeatureRow]) -> dict[str, float]:
    n = len(rows)
    return {lab: (sum(r.sentiment == lab for r in rows) / n if n else 0.0) for lab in ("positive", "neutral", "negative")}


@dataclass
class SpearmanCheck:
    rho: float
    p_value: float
    n: int


def total_raised_check(records: Sequence[CampaignRecord]) -> SpearmanCheck:
    if len(records) < 3:
        raise EmptyDataError("total raised check needs at least 3 campaigns")
    totals = [r.total_raised for r in records]
    counts = [r.n_donations for r in records]
    rho = stats.spearman(totals, counts)
    return SpearmanCheck(rho, stats.spearman_p(rho, len(records)), len(records))


# --------------------------------------------------------------------------
# figure tables


@dataclass
class GroupStat:
    frame: str
    group: str
    n: int
    mean: float | None
    lower: float | None
    upper: float | None


def _summarize(frame: str, group: str, vals: list[float]) -> GroupStat:
    if not vals:
        return GroupStat(frame, group, 0, None, None, None)
    if len(vals) == 1:
        return GroupStat(frame, group, 1, vals[0], None, None)
    m, lo, hi = stats.mean_ci95(vals)
    return GroupStat(frame, group, len(vals), m, lo, hi)


def _appeal_groups(records, scorer: AxisScorer, frame: str, category_filter: str | None):
    cat = normalize_category(category_filter) if category_filter else None
    subset = [r for r in records if cat is None or r.category == cat]
    if not subset:
        return [], []
    batch = scorer.score_many([tokenize_for_scoring(r.appeal_text) for r in subset])
    col = batch.frames.index(frame)
    scores = [float(v) for v in batch.values[:, col]]
    defined = [not math.isnan(s) for s in scores]
    if sum(defined) < 2:
        return subset, [None] * len(subset)
    return subset, split_groups(scores)


def comment_alignment(
    records: Sequence[CampaignRecord],
    axes: MoralAxisSet,
    table: EmbeddingTable,
    frame: str,
    category_filter: str | None = "Emergency",
    scorer: AxisScorer | None = None,
) -> list[GroupStat]:
    """Mean per-campaign comment score, per appeal score group."""
    scorer = scorer or AxisScorer(axes, table)
    subset, groups = _appeal_groups(records, scorer, frame, category_filter)
    per_group: dict[str, list[float]] = {g: [] for g in GROUPS}
    for rec, g in zip(subset, groups):
        if g is None or not rec.comments:
            continue
        batch = scorer.score_many([tokenize_for_scoring(c) for c in rec.comments])
        col = batch.values[:, batch.frames.index(frame)]
        col = col[~np.isnan(col)]
        if col.size == 0:
            continue
        per_group[g].append(math.fsum(col) / col.size)
    out = [_summarize(frame, g, per_group[g]) for g in GROUPS]
    for s in out:
        if s.n == 0:
            log.warning("comment alignment: %s group for %s is empty", s.group, frame)
    return out


def comment_length_by_group(
    records: Sequence[CampaignRecord],
    axes: MoralAxisSet,
    table: EmbeddingTable,
    frame: str,
    category_filter: str | None = "Emergency",
    scorer: AxisScorer | None = None,
) -> list[GroupStat]:
    """Mean per-campaign whitespace comment length, per appeal score group."""
    scorer = scorer or AxisScorer(axes, table)
    subset, groups = _appeal_groups(records, scorer, frame, category_filter)
    per_group: dict[str, list[float]] = {g: [] for g in GROUPS}
    for rec, g in zip(subset, groups):
        if g is None or not rec.comments:
            continue
        lengths = [count_whitespace_tokens(c) for c in rec.comments]
        per_group[g].append(math.fsum(lengths) / len(lengths))
    return [_summarize(frame, g, per_group[g]) for g in GROUPS]


@dataclass
class PositionStat:
    position: int
    n: int
    mean: float
    lower: float | None
    upper: float | None


def donation_position_curve(
    records: Sequence[CampaignRecord],
    min_donations: int = 100,
    max_position: int | None = None,
) -> list[PositionStat]:
    """Mean k-th donation amount across campaigns with enough donations."""
    if min_donations < 1:
        raise ValueError("min_donations must be at least 1")
    max_position = min_donations if max_position is None else max_position
    if max_position < 1:
        raise ValueError("max_position must be at least 1")
    qualifying = [r for r in records if r.n_donations >= min_donations]
    if not qualifying:
        raise EmptyDataError("no qualifying campaigns")
    out = []
    for k in range(1, max_position + 1):
        vals = [r.donations[k - 1] for r in qualifying if r.n_donations >= k]
        if not vals:
            break
        if len(vals) == 1:
            out.append(PositionStat(k, 1, vals[0], None, None))
            continue
        m, lo, hi = stats.mean_ci95(vals)
        out.append(PositionStat(k, len(vals), m, lo, hi))
    return out
