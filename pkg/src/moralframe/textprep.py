"""Tokenizers and bag-of-valences sentiment classification."""
from __future__ import annotations

import math
import re
import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

POS_THRESHOLD = 0.05
NEG_THRESHOLD = -0.05
ALPHA = 15.0

_WORD = re.compile(r"[^\W_]+")
_STRIP = string.punctuation + "‘’“”—–…"


def tokenize_for_scoring(text: str) -> list[str]:
    """Lowercase, then split on every run of non-alphanumeric characters."""
    return _WORD.findall(text.lower())


def count_whitespace_tokens(text: str) -> int:
    return len(text.split())


@dataclass(frozen=True)
class SentimentLabel:
    label: str
    compound: float


class ValenceLexicon(dict):
    """token -> valence in [-4, 4]."""

    source: str = ""


def load_valence_lexicon(path: str | Path | None = None) -> ValenceLexicon:
    if path is None:
        text = resources.files("moralframe").joinpath("data/valence.tsv").read_text(encoding="utf-8")
        source = "bundled:valence.tsv"
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot read valence lexicon {path}: {exc.strerror or exc}") from exc
        source = str(path)
    lex = ValenceLexicon()
    lex.source = source
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ValueError(f"{source}:{lineno}: expected 'token<TAB>valence'")
        try:
            val = float(parts[1])
        except ValueError:
            raise ValueError(f"{source}:{lineno}: non-numeric valence {parts[1]!r}") from None
        if not -4.0 <= val <= 4.0:
            raise ValueError(f"{source}:{lineno}: valence {val} outside [-4, 4]")
        lex.setdefault(parts[0].lower(), val)
    return lex


def valence_sum(text: str, lexicon: dict[str, float]) -> float:
    """Sum of valences over whitespace tokens.

    A token matches literally first (so emoticons work), then with
    surrounding punctuation stripped.
    """
    s = 0.0
    for raw in text.split():
        tok = raw.lower()
        v = lexicon.get(tok)
        if v is None:
            core = tok.strip(_STRIP)
            if core:
                v = lexicon.get(core)
        if v is not None:
            s += v
    return s


def normalize_compound(s: float, alpha: float = ALPHA) -> float:
    c = s / math.sqrt(s * s + alpha)
    return min(1.0, max(-1.0, c))


def label_for(compound: float, pos: float = POS_THRESHOLD, neg: float = NEG_THRESHOLD) -> str:
    if compound >= pos:
        return "positive"
    if compound <= neg:
        return "negative"
    return "neutral"


def classify_sentiment(
    text: str,
    lexicon: dict[str, float] | None = None,
    override: float | None = None,
    pos: float = POS_THRESHOLD,
    neg: float = NEG_THRESHOLD,
) -> SentimentLabel:
    if not pos > neg:
        raise ValueError(f"positive threshold {pos} must exceed negative threshold {neg}")
    if override is not None:
        compound = float(override)
    else:
        compound = normalize_compound(valence_sum(text, lexicon or {}))
    return SentimentLabel(label_for(compound, pos, neg), compound)
