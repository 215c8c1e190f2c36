"""Synthetic campaigns with planted moral-framing effects.

The generated embedding space gives each moral frame its own coordinate:
virtue seeds point along +e_f, vice seeds along -e_f, filler words are
isotropic noise. Appeals mix seeds and filler, so the pipeline's bias scores
vary per document. Donation counts come from the Model 1 design evaluated
on the scored features, which makes the regression recoverable end to end.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .embeddings import EmbeddingTable
from .lexicon import FRAMES, SeedLexicon, load_lexicon
from .pipeline import CampaignRecord, build_features, design_columns, design_row
from .frameaxis import AxisScorer, build_axes

# reference Model 1 coefficients, in design-column order
MODEL1_BETA = {
    "Intercept": 0.825,
    "Emergency": 0.951,
    "Medical": 0.733,
    "Memorial": 1.211,
    "Care": 2.098,
    "Fairness": 0.446,
    "Loyalty": -1.156,
    "Emergency x Care": -3.412,
    "Medical x Care": -0.377,
    "Memorial x Care": -1.011,
    "Emergency x Fairness": -8.309,
    "Medical x Fairness": -1.587,
    "Memorial x Fairness": -3.706,
    "Emergency x Loyalty": 9.252,
    "Medical x Loyalty": 4.319,
    "Memorial x Loyalty": 3.005,
    "Positive sentiment": -0.005,
    "Neutral sentiment": -0.092,
    "Campaign appeal length": 0.051,
    "Number of photos": 0.033,
    "Fundraising goal": 0.281,
}

CATEGORY_SHARES = {"Animals": 0.195, "Emergency": 0.262, "Medical": 0.237, "Memorial": 0.306}
SENTIMENT_SHARES = {"positive": 0.75, "neutral": 0.10, "negative": 0.15}
POSITIVE_WORDS = {"hopeful": 2.0, "grateful": 2.5, "wonderful": 3.0, "blessed": 2.2}
NEGATIVE_WORDS = {"terrible": -2.5, "desperate": -2.0, "devastating": -3.0, "awful": -2.8}
N_FILLER = 300


@dataclass
class SyntheticWorld:
    table: EmbeddingTable
    lexicon: SeedLexicon
    valence: dict[str, float]
    records: list[CampaignRecord]
    beta: dict[str, float]
    noise_sd: float
    seed: int


def make_embeddings(lex: SeedLexicon, rng: np.random.Generator, extra_dims: int = 9, noise: float = 0.3):
    dim = len(FRAMES) + extra_dims
    entries: dict[str, np.ndarray] = {}
    for fi, f in enumerate(FRAMES):
        for sign, pool in ((-1.0, lex.vice(f)), (1.0, lex.virtue(f))):
            for tok in sorted(pool):
                if tok in entries:
                    continue
                v = rng.normal(0.0, noise, dim)
                v[fi] += sign
                entries[tok] = v
    fillers = [f"w{i:03d}" for i in range(N_FILLER)]
    for tok in fillers + sorted(POSITIVE_WORDS) + sorted(NEGATIVE_WORDS):
        entries[tok] = rng.normal(0.0, noise, dim)
    return EmbeddingTable.from_mapping(entries, "<synthetic>"), fillers


def _appeal(rng, lex, fillers, sentiment: str) -> str:
    length = int(rng.integers(30, 120))
    words: list[str] = []
    for f in FRAMES:
        vice, virtue = sorted(lex.vice(f)), sorted(lex.virtue(f))
        nv = rng.poisson(rng.uniform(0.0, 5.0))
        nc = rng.poisson(rng.uniform(0.0, 5.0))
        words += list(rng.choice(virtue, nv)) + list(rng.choice(vice, nc))
    if sentiment == "positive":
        words += list(rng.choice(sorted(POSITIVE_WORDS), int(rng.integers(1, 3))))
    elif sentiment == "negative":
        words += list(rng.choice(sorted(NEGATIVE_WORDS), int(rng.integers(1, 3))))
    n_fill = max(length - len(words), 5)
    words += list(rng.choice(fillers, n_fill))
    rng.shuffle(words)
    return " ".join(str(w) for w in words)


def _comments(rng, appeal: str, fillers) -> tuple[str, ...]:
    toks = appeal.split()
    out = []
    for _ in range(int(rng.poisson(2.0))):
        k = int(rng.integers(2, 25))
        picks = list(rng.choice(toks, k // 2 + 1)) + list(rng.choice(fillers, k - k // 2))
        out.append(" ".join(str(w) for w in picks))
    return tuple(out)


def _amounts(rng, n: int) -> tuple[float, ...]:
    k = np.arange(1, n + 1)
    amounts = np.round(40.0 * (1.0 + 2.0 / k) * rng.lognormal(0.0, 0.4, n), 2)
    return tuple(float(max(a, 1.0)) for a in amounts)


def make_world(
    seed: int = 0,
    n_campaigns: int = 2000,
    noise_sd: float = 0.5,
    beta: dict[str, float] | None = None,
) -> SyntheticWorld:
    """Generate campaigns whose donation counts follow Model 1 plus Gaussian noise."""
    rng = np.random.default_rng(seed)
    beta = dict(MODEL1_BETA if beta is None else beta)
    lex = load_lexicon()
    table, fillers = make_embeddings(lex, rng)
    valence = {**POSITIVE_WORDS, **NEGATIVE_WORDS}

    cats = list(CATEGORY_SHARES)
    sents = list(SENTIMENT_SHARES)
    drafts = []
    for i in range(n_campaigns):
        cat = cats[rng.choice(len(cats), p=list(CATEGORY_SHARES.values()))]
        sent = sents[rng.choice(len(sents), p=list(SENTIMENT_SHARES.values()))]
        appeal = _appeal(rng, lex, fillers, sent)
        drafts.append(
            CampaignRecord(
                campaign_id=f"syn{seed}-{i:05d}",
                category=cat,
                appeal_text=appeal,
                goal_amount=float(np.round(np.exp(rng.uniform(8.0, 12.0)), 2)),
                photo_count=int(rng.poisson(0.6)),
                donations=(1.0,),
                comments=_comments(rng, appeal, fillers),
            )
        )

    axes = build_axes(lex, table)
    scorer = AxisScorer(axes, table)
    rows, drops = build_features(drafts, axes, table, valence, scorer=scorer)
    dropped = {d.campaign_id for d in drops}
    b = np.array([beta[c] for c in design_columns(True)])
    by_id = {r.campaign_id: r for r in rows}
    records = []
    for rec in drafts:
        if rec.campaign_id in dropped:
            continue
        mu = float(np.dot(design_row(by_id[rec.campaign_id], True), b))
        y = mu + rng.normal(0.0, noise_sd)
        count = max(int(round(np.expm1(y))), 1)
        records.append(replace(rec, donations=_amounts(rng, count)))
    return SyntheticWorld(table, lex, valence, records, beta, noise_sd, seed)
