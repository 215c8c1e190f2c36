"""Command-line front end: ``moralframe score|describe|fit|figdata|synth``.

Exit codes: 0 ok, 1 usage, 2 missing/unreadable input, 3 empty or
degenerate data, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import __version__, _kernels, pipeline, stats
from .embeddings import EmbeddingError, EmbeddingFileError, EmptyEmbeddingFileError, load_embeddings, write_embeddings
from .frameaxis import AxisError, AxisScorer, build_axes
from .lexicon import FRAMES, LexiconError, load_lexicon, serialize_lexicon
from .textprep import NEG_THRESHOLD, POS_THRESHOLD, load_valence_lexicon, tokenize_for_scoring

log = logging.getLogger("moralframe")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3, 4

DEFAULTS: dict[str, Any] = {
    "embeddings": None,
    "dim": None,
    "lexicon": None,
    "sentiment_lexicon": None,
    "sentiment_column": None,
    "data": None,
    "mapping": None,
    "out": ".",
    "models": "1,2,3",
    "frame": None,
    "category": "Emergency",
    "min_donations": 100,
    "max_position": None,
    "pos_threshold": POS_THRESHOLD,
    "neg_threshold": NEG_THRESHOLD,
    "interactions": True,
    "seed": 0,
    "n": 2000,
}
_INT_KEYS = {"dim", "min_donations", "max_position", "seed", "n"}
_FLOAT_KEYS = {"pos_threshold", "neg_threshold"}
_BOOL_KEYS = {"interactions"}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# configuration


def _coerce(key: str, value):
    if value is None:
        return None
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    if key in _BOOL_KEYS:
        if isinstance(value, bool):
            return value
        return str(value).strip().lower() in {"1", "true", "yes", "on"}
    return value


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Flat ``key = value`` file, or a run manifest (its ``config`` block)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc.strerror or exc}", EXIT_INPUT) from exc
    if path.suffix == ".json":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CliError(f"config {path}: invalid JSON: {exc.msg}", EXIT_USAGE) from exc
        cfg = payload.get("config", payload)
    else:
        cfg = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}:{lineno}: expected key = value", EXIT_USAGE)
            k, v = (s.strip() for s in line.split("=", 1))
            cfg[k.replace("-", "_")] = v
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise CliError(f"config {path}: unknown key(s): {', '.join(sorted(unknown))}", EXIT_USAGE)
    try:
        return {k: _coerce(k, v) for k, v in cfg.items()}
    except ValueError as exc:
        raise CliError(f"config {path}: {exc}", EXIT_USAGE) from exc


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    """Flags override the config file, which overrides defaults."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config_file(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _validate_config(cfg: dict[str, Any], command: str) -> None:
    if not cfg["pos_threshold"] > cfg["neg_threshold"]:
        raise CliError("positive sentiment threshold must exceed the negative one", EXIT_USAGE)
    try:
        ids = sorted({int(x) for x in str(cfg["models"]).split(",") if x.strip()})
    except ValueError:
        raise CliError(f"--models must be a comma list of 1,2,3; got {cfg['models']!r}", EXIT_USAGE) from None
    if not ids or not set(ids) <= {1, 2, 3}:
        raise CliError(f"--models must be a subset of 1,2,3; got {cfg['models']!r}", EXIT_USAGE)
    cfg["models"] = ",".join(str(i) for i in ids)
    if cfg["frame"] is not None and cfg["frame"] not in FRAMES:
        raise CliError(f"--frame must be one of {', '.join(FRAMES)}", EXIT_USAGE)
    if cfg["category"] not in (None, "", "all"):
        try:
            cfg["category"] = pipeline.normalize_category(cfg["category"])
        except pipeline.UnknownCategoryError as exc:
            raise CliError(str(exc), EXIT_USAGE) from None
    if cfg["min_donations"] < 1:
        raise CliError("--min-donations must be at least 1", EXIT_USAGE)
    if command == "synth":
        if cfg["n"] < 30:
            raise CliError("--n must be at least 30", EXIT_USAGE)
        return
    for key in ("embeddings", "data"):
        if not cfg[key]:
            raise CliError(f"--{key} is required", EXIT_USAGE)
    for key in ("embeddings", "data", "lexicon", "sentiment_lexicon", "mapping"):
        p = cfg[key]
        if p and not Path(p).is_file():
            raise CliError(f"input file not found: {p}", EXIT_INPUT)
        if p and not os.access(p, os.R_OK):
            raise CliError(f"input file not readable: {p}", EXIT_INPUT)


# --------------------------------------------------------------------------
# output helpers


def fmt(x) -> str:
    if x is None:
        return "NA"
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "NA"
        return repr(x)
    try:
        return fmt(float(x))
    except (TypeError, ValueError):
        return str(x)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_tsv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    lines = ["\t".join(header)]
    for r in rows:
        lines.append("\t".join(fmt(v) for v in r))
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Run:
    """Collects outputs, counts and warnings for the run manifest."""

    def __init__(self, command: str, cfg: dict[str, Any]):
        self.command = command
        self.cfg = cfg
        self.out = Path(cfg["out"])
        self.outputs: list[Path] = []
        self.counts: dict[str, Any] = {}
        self.warnings: list[str] = []
        self.extra: dict[str, Any] = {}

    def tsv(self, name: str, header, rows) -> Path:
        p = write_tsv(self.out / name, header, rows)
        self.outputs.append(p)
        return p

    def warn(self, msg: str) -> None:
        log.warning(msg)
        self.warnings.append(msg)

    def manifest(self) -> Path:
        inputs = {}
        for key in ("embeddings", "data", "lexicon", "sentiment_lexicon", "mapping"):
            p = self.cfg.get(key)
            if p and Path(p).is_file():
                inputs[key] = {"path": str(p), "sha256": sha256_file(p)}
        payload = {
            "schema_version": 1,
            "tool": "moralframe",
            "tool_version": __version__,
            "command": self.command,
            "config": self.cfg,
            "inputs": inputs,
            "counts": self.counts,
            "warnings": self.warnings,
            "kernel_backend": "numba" if _kernels.USING_NUMBA else "numpy",
            "outputs": {p.name: sha256_file(p) for p in self.outputs},
            **self.extra,
        }
        path = self.out / f"manifest_{self.command}.json"
        _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return path


# --------------------------------------------------------------------------
# shared loading


class Loaded:
    def __init__(self, report, table, lex, axes, valence):
        self.report = report
        self.records = report.records
        self.table = table
        self.lex = lex
        self.axes = axes
        self.valence = valence
        self.scorer = AxisScorer(axes, table)


def _load_inputs(cfg: dict[str, Any], run: Run) -> Loaded:
    mapping = None
    if cfg["mapping"]:
        try:
            mapping = pipeline.load_mapping(cfg["mapping"])
        except ValueError as exc:
            raise CliError(str(exc), EXIT_INPUT) from exc
    try:
        report = pipeline.ingest(cfg["data"], mapping, cfg["sentiment_column"])
    except pipeline.IngestError as exc:
        if exc.report is not None:
            _write_rejects(run, exc.report)
            raise CliError(f"{exc}; see rejects.tsv", EXIT_DATA) from exc
        raise CliError(str(exc), EXIT_INPUT) from exc
    _write_rejects(run, report)
    run.counts["ingest"] = report.summary()
    if report.rejects:
        run.warn(f"{len(report.rejects)} dataset line(s) rejected")
    if not report.records:
        raise CliError("no records ingested", EXIT_DATA)

    try:
        lex = load_lexicon(cfg["lexicon"])
    except LexiconError as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc
    try:
        valence = load_valence_lexicon(cfg["sentiment_lexicon"])
    except (OSError, ValueError) as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc

    needed = set()
    for f in FRAMES:
        needed |= lex.vice(f) | lex.virtue(f)
    for r in report.records:
        needed.update(tokenize_for_scoring(r.appeal_text))
        for c in r.comments:
            needed.update(tokenize_for_scoring(c))
    try:
        table = load_embeddings(cfg["embeddings"], cfg["dim"], restrict_to=needed)
    except EmptyEmbeddingFileError as exc:
        raise CliError(str(exc), EXIT_DATA) from exc
    except (EmbeddingFileError, EmbeddingError) as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc
    if table.duplicate_count:
        run.warn(f"{table.duplicate_count} duplicate embedding token(s); first occurrence kept")
    try:
        axes = build_axes(lex, table)
    except LexiconError as exc:
        raise CliError(str(exc), EXIT_DATA) from exc
    except AxisError as exc:
        raise CliError(str(exc), EXIT_NUMERIC) from exc
    for w in axes.coverage.warnings:
        run.warn(w)
    run.counts["seed_coverage"] = axes.coverage.as_dict()
    run.counts["embedding_tokens_loaded"] = table.token_count
    return Loaded(report, table, lex, axes, valence)


def _write_rejects(run: Run, report) -> None:
    run.tsv("rejects.tsv", ["line", "campaign_id", "reason"], [(r.line, r.campaign_id, r.reason) for r in report.rejects])


def _features(cfg, run: Run, ld: Loaded):
    rows, drops = pipeline.build_features(
        ld.records, ld.axes, ld.table, ld.valence,
        cfg["pos_threshold"], cfg["neg_threshold"],
        use_overrides=bool(cfg["sentiment_column"]), scorer=ld.scorer,
    )
    run.tsv("feature_drops.tsv", ["campaign_id", "reason"], [(d.campaign_id, d.reason) for d in drops])
    run.counts["feature_rows"] = len(rows)
    run.counts["feature_drops"] = len(drops)
    if drops:
        run.warn(f"{len(drops)} campaign(s) dropped: undefined moral scores")
    if not rows:
        raise CliError("no campaigns with defined moral scores", EXIT_DATA)
    return rows


# --------------------------------------------------------------------------
# commands

SCORE_HEADER = ["campaign_id", "care", "fairness", "loyalty", "matched_tokens", "total_tokens"]


def cmd_score(cfg, run: Run) -> None:
    ld = _load_inputs(cfg, run)
    batch = ld.scorer.score_many([tokenize_for_scoring(r.appeal_text) for r in ld.records])
    cols = [batch.frames.index(f) for f in FRAMES]
    run.tsv(
        "scores.tsv",
        SCORE_HEADER,
        [
            (r.campaign_id, *(float(batch.values[i, j]) for j in cols), int(batch.matched[i]), int(batch.total[i]))
            for i, r in enumerate(ld.records)
        ],
    )
    undefined = int(sum(batch.matched == 0))
    run.counts["appeals_scored"] = len(ld.records)
    run.counts["appeals_undefined"] = undefined

    keys, docs = [], []
    for r in ld.records:
        for k, c in enumerate(r.comments, 1):
            keys.append((r.campaign_id, k))
            docs.append(tokenize_for_scoring(c))
    cb = ld.scorer.score_many(docs)
    run.tsv(
        "comment_scores.tsv",
        ["campaign_id", "comment_index", *SCORE_HEADER[1:]],
        [
            (cid, k, *(float(cb.values[i, j]) for j in cols), int(cb.matched[i]), int(cb.total[i]))
            for i, (cid, k) in enumerate(keys)
        ],
    )
    run.counts["comments_scored"] = len(keys)


def cmd_describe(cfg, run: Run) -> None:
    ld = _load_inputs(cfg, run)
    rows = _features(cfg, run, ld)
    cells = pipeline.descriptives(rows)
    run.tsv("descriptives.tsv", ["category", "variable", "n", "mean", "sd"], [(c.category, c.variable, c.n, c.mean, c.sd) for c in cells])
    dist = pipeline.sentiment_distribution(rows)
    run.tsv("sentiment_distribution.tsv", ["sentiment", "share"], list(dist.items()))
    try:
        chk = pipeline.total_raised_check(ld.records)
        run.tsv("total_raised_check.tsv", ["statistic", "rho", "p_value", "n"], [("spearman_total_vs_count", chk.rho, chk.p_value, chk.n)])
    except (pipeline.EmptyDataError, stats.StatsError) as exc:
        run.warn(f"total raised check skipped: {exc}")


def cmd_fit(cfg, run: Run) -> None:
    ld = _load_inputs(cfg, run)
    rows = _features(cfg, run, ld)
    summary = []
    for mid in (int(x) for x in cfg["models"].split(",")):
        try:
            fr = pipeline.fit_model(mid, rows, interactions=bool(cfg["interactions"]))
        except pipeline.EmptyDataError as exc:
            raise CliError(str(exc), EXIT_DATA) from exc
        except stats.StatsError as exc:
            raise CliError(f"model {mid}: {exc}", EXIT_NUMERIC) from exc
        run.tsv(
            f"fit_model{mid}.tsv",
            ["term", "coef", "std_error", "t_stat", "p_value", "stars"],
            [
                (name, float(fr.coefficients[j]), float(fr.std_errors[j]), float(fr.t_stats[j]), float(fr.p_values[j]), stats.stars(fr.p_values[j]))
                for j, name in enumerate(fr.column_names)
            ],
        )
        summary.append((mid, pipeline.MODEL_OUTCOMES[mid], fr.n_obs, fr.n_dropped_rows, fr.r2, fr.adjusted_r2, fr.residual_df))
        run.counts[f"model{mid}_dropped_rows"] = fr.n_dropped_rows
    run.tsv("fit_summary.tsv", ["model", "outcome", "n_obs", "n_dropped", "r2", "adj_r2", "residual_df"], summary)


GROUP_HEADER = ["frame", "group", "n", "mean", "ci_lower", "ci_upper"]


def cmd_figdata(cfg, run: Run) -> None:
    ld = _load_inputs(cfg, run)
    frames = [cfg["frame"]] if cfg["frame"] else list(FRAMES)
    category = cfg["category"] if cfg["category"] not in (None, "", "all") else None
    align, length = [], []
    for f in frames:
        a = pipeline.comment_alignment(ld.records, ld.axes, ld.table, f, category, scorer=ld.scorer)
        b = pipeline.comment_length_by_group(ld.records, ld.axes, ld.table, f, category, scorer=ld.scorer)
        for s in a:
            if s.n == 0:
                run.warn(f"figure 2 data: empty {s.group} group for {f}")
        align += [(s.frame, s.group, s.n, s.mean, s.lower, s.upper) for s in a]
        length += [(s.frame, s.group, s.n, s.mean, s.lower, s.upper) for s in b]
    run.tsv("fig2_comment_scores.tsv", GROUP_HEADER, align)
    run.tsv("fig3_comment_length.tsv", GROUP_HEADER, length)
    try:
        curve = pipeline.donation_position_curve(ld.records, cfg["min_donations"], cfg["max_position"])
    except pipeline.EmptyDataError as exc:
        raise CliError(f"figure 4 data: {exc} (min donations {cfg['min_donations']})", EXIT_DATA) from exc
    run.tsv("fig4_donation_position.tsv", ["position", "n", "mean", "ci_lower", "ci_upper"], [(p.position, p.n, p.mean, p.lower, p.upper) for p in curve])
    run.counts["fig4_positions"] = len(curve)


def cmd_synth(cfg, run: Run) -> None:
    from .lexicon import load_lexicon as _load
    from .synthetic import make_world

    world = make_world(seed=cfg["seed"], n_campaigns=cfg["n"])
    out = run.out
    out.mkdir(parents=True, exist_ok=True)
    pipeline.write_jsonl(world.records, out / "campaigns.jsonl")
    write_embeddings(world.table, out / "embeddings.txt")
    _atomic_write(out / "lexicon.txt", serialize_lexicon(_load()))
    _atomic_write(out / "valence.tsv", "".join(f"{k}\t{v!r}\n" for k, v in sorted(world.valence.items())))
    run.outputs += [out / "campaigns.jsonl", out / "embeddings.txt", out / "lexicon.txt", out / "valence.tsv"]
    run.tsv("true_coefficients.tsv", ["term", "coef"], list(world.beta.items()))
    run.counts["campaigns"] = len(world.records)


COMMANDS = {"score": cmd_score, "describe": cmd_describe, "fit": cmd_fit, "figdata": cmd_figdata, "synth": cmd_synth}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="moralframe", description="Moral framing scores and regressions for fundraising appeals.")
    parser.add_argument("--version", action="version", version=f"moralframe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key = value config file, or a previous run manifest (.json)")
    common.add_argument("--out", help="output directory (default: current directory)")
    common.add_argument("-v", "--verbose", action="store_true")

    data = _Parser(add_help=False)
    data.add_argument("--embeddings", help="GloVe-format text file, optionally gzipped")
    data.add_argument("--dim", type=int, help="expected embedding dimension (default: inferred from file)")
    data.add_argument("--lexicon", help="moral seed lexicon (default: bundled)")
    data.add_argument("--sentiment-lexicon", dest="sentiment_lexicon", help="valence TSV (default: bundled)")
    data.add_argument("--sentiment-column", dest="sentiment_column", help="dataset field holding a precomputed compound score")
    data.add_argument("--data", help="campaign JSON-lines file")
    data.add_argument("--mapping", help="field mapping file: source.path = canonical_field")
    data.add_argument("--pos-threshold", dest="pos_threshold", type=float)
    data.add_argument("--neg-threshold", dest="neg_threshold", type=float)

    sub.add_parser("score", parents=[common, data], help="write per-appeal and per-comment bias scores")
    sub.add_parser("describe", parents=[common, data], help="per-category descriptive statistics")
    p_fit = sub.add_parser("fit", parents=[common, data], help="fit the regression models")
    p_fit.add_argument("--models", help="comma list from 1,2,3 (default: all)")
    p_fit.add_argument("--no-interactions", dest="interactions", action="store_const", const=False)
    p_fig = sub.add_parser("figdata", parents=[common, data], help="data behind the group and position figures")
    p_fig.add_argument("--frame", choices=FRAMES)
    p_fig.add_argument("--category", help="category for the group figures (default: Emergency; 'all' for none)")
    p_fig.add_argument("--min-donations", dest="min_donations", type=int)
    p_fig.add_argument("--max-position", dest="max_position", type=int)
    p_syn = sub.add_parser("synth", parents=[common], help="write a synthetic dataset with planted effects")
    p_syn.add_argument("--seed", type=int)
    p_syn.add_argument("--n", type=int, help="number of campaigns (default: 2000)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = resolve_config(args)
        _validate_config(cfg, args.command)
        run = Run(args.command, cfg)
        COMMANDS[args.command](cfg, run)
        run.manifest()
    except CliError as exc:
        print(f"moralframe {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except (stats.StatsError, AxisError, FloatingPointError) as exc:
        print(f"moralframe {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK
