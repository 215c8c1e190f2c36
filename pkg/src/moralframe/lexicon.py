"""Vice/virtue seed pools for the care, fairness and loyalty axes."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .embeddings import EmbeddingTable

log = logging.getLogger(__name__)

FRAMES = ("care", "fairness", "loyalty")
POLES = ("vice", "virtue")
COVERAGE_WARN = 0.5

_HEADER = re.compile(r"^\[\s*([^\].]+)\.([^\]]+?)\s*\]$")


class LexiconError(ValueError):
    pass


class MissingFrameError(LexiconError):
    pass


class EmptyPoleError(LexiconError):
    pass


class PoleOverlapError(LexiconError):
    def __init__(self, frame: str, tokens):
        self.frame = frame
        self.tokens = sorted(tokens)
        super().__init__(f"frame {frame!r}: tokens in both poles: {', '.join(self.tokens)}")


class MalformedLexiconError(LexiconError):
    pass


@dataclass(frozen=True)
class SeedLexicon:
    frames: dict[str, tuple[frozenset[str], frozenset[str]]]
    source: str = ""

    def vice(self, frame: str) -> frozenset[str]:
        return self.frames[frame][0]

    def virtue(self, frame: str) -> frozenset[str]:
        return self.frames[frame][1]

    def pool(self, frame: str, pole: str) -> frozenset[str]:
        return self.frames[frame][POLES.index(pole)]

    def swapped(self) -> "SeedLexicon":
        """Same lexicon with vice and virtue exchanged in every frame."""
        return SeedLexicon({f: (v, c) for f, (c, v) in self.frames.items()}, self.source + " (swapped)")


def validate(frames: dict[str, tuple[frozenset[str], frozenset[str]]]) -> None:
    for f in FRAMES:
        if f not in frames:
            raise MissingFrameError(f"missing frame {f!r}")
    extra = set(frames) - set(FRAMES)
    if extra:
        raise MalformedLexiconError(f"unknown frame(s): {', '.join(sorted(extra))}")
    for f in FRAMES:
        vice, virtue = frames[f]
        for pole, pool in zip(POLES, (vice, virtue)):
            if not pool:
                raise EmptyPoleError(f"frame {f!r}: pole {pole!r} is empty")
            for t in pool:
                if not t or any(ch.isspace() for ch in t) or t != t.lower():
                    raise MalformedLexiconError(f"frame {f!r}: bad token {t!r}")
        both = vice & virtue
        if both:
            raise PoleOverlapError(f, both)


def parse_lexicon(text: str, source: str = "<string>") -> SeedLexicon:
    pools: dict[tuple[str, str], list[str]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            m = _HEADER.match(line)
            if not m:
                raise MalformedLexiconError(f"{source}:{lineno}: bad section header {raw.strip()!r}")
            frame, pole = m.group(1).strip().lower(), m.group(2).strip().lower()
            if pole not in POLES:
                raise MalformedLexiconError(f"{source}:{lineno}: unknown pole {pole!r}")
            if frame not in FRAMES:
                raise MalformedLexiconError(f"{source}:{lineno}: unknown frame {frame!r}")
            current = (frame, pole)
            pools.setdefault(current, [])
            continue
        if current is None:
            raise MalformedLexiconError(f"{source}:{lineno}: token outside a [frame.pole] section")
        if any(ch.isspace() for ch in line):
            raise MalformedLexiconError(
                f"{source}:{lineno}: multiword entry {line!r} in {current[0]}.{current[1]}"
            )
        tok = line.lower()
        if tok in pools[current]:
            raise MalformedLexiconError(
                f"{source}:{lineno}: duplicate entry {tok!r} in {current[0]}.{current[1]}"
            )
        pools[current].append(tok)

    frames = {}
    for f in FRAMES:
        if (f, "vice") not in pools and (f, "virtue") not in pools:
            raise MissingFrameError(f"{source}: missing frame {f!r}")
        frames[f] = (frozenset(pools.get((f, "vice"), ())), frozenset(pools.get((f, "virtue"), ())))
    validate(frames)
    return SeedLexicon(frames, source)


def default_lexicon_text() -> str:
    return resources.files("moralframe").joinpath("data/moral_seeds.txt").read_text(encoding="utf-8")


def load_lexicon(path: str | Path | None = None) -> SeedLexicon:
    """Load a seed lexicon file; ``None`` gives the bundled default."""
    if path is None:
        return parse_lexicon(default_lexicon_text(), "bundled:moral_seeds.txt")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise LexiconError(f"cannot read lexicon {path}: {exc.strerror or exc}") from exc
    return parse_lexicon(text, str(path))


def serialize_lexicon(lex: SeedLexicon) -> str:
    out = []
    for f in FRAMES:
        for pole, pool in zip(POLES, lex.frames[f]):
            out.append(f"[{f}.{pole}]")
            out.extend(sorted(pool))
            out.append("")
    return "\n".join(out)


@dataclass
class PoleCoverage:
    frame: str
    pole: str
    declared: int
    resolved: tuple[str, ...]

    @property
    def coverage(self) -> float:
        return len(self.resolved) / self.declared if self.declared else 0.0


@dataclass
class CoverageReport:
    poles: list[PoleCoverage]
    warnings: list[str] = field(default_factory=list)

    def resolved(self, frame: str, pole: str) -> tuple[str, ...]:
        for p in self.poles:
            if p.frame == frame and p.pole == pole:
                return p.resolved
        raise KeyError((frame, pole))

    def as_dict(self) -> dict:
        return {
            f"{p.frame}.{p.pole}": {"declared": p.declared, "resolved": len(p.resolved)}
            for p in self.poles
        }


def resolve_coverage(lex: SeedLexicon, table: EmbeddingTable) -> CoverageReport:
    """Restrict each pole to seeds with an embedding; empty pools are fatal."""
    poles = []
    warnings = []
    for f in FRAMES:
        for pole, pool in zip(POLES, lex.frames[f]):
            resolved = tuple(sorted(t for t in pool if t in table.index))
            pc = PoleCoverage(f, pole, len(pool), resolved)
            if not resolved:
                raise EmptyPoleError(f"frame {f!r}: pole {pole!r} has no seeds in the embedding vocabulary")
            if pc.coverage < COVERAGE_WARN:
                msg = f"{f}.{pole}: only {len(resolved)}/{len(pool)} seeds in vocabulary"
                warnings.append(msg)
                log.warning(msg)
            poles.append(pc)
    return CoverageReport(poles, warnings)
