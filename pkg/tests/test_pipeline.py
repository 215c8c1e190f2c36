import json
import math
import random

import pytest

from moralframe import pipeline, stats
from moralframe.frameaxis import build_axes
from moralframe.pipeline import (
    CampaignRecord,
    EmptyDataError,
    IngestError,
    UnknownCategoryError,
    build_features,
    comment_alignment,
    comment_length_by_group,
    descriptives,
    design_columns,
    donation_position_curve,
    ingest,
    model_spec,
    normalize_category,
    total_raised_check,
)


def rec(cid, category="Animals", appeal="care dog", goal=500.0, photos=0, donations=(5.0, 10.0), comments=(), sent=None):
    return CampaignRecord(cid, category, appeal, goal, photos, tuple(donations), tuple(comments), sent)


def write_jsonl(tmp_path, objs, name="data.jsonl"):
    p = tmp_path / name
    p.write_text("".join((o if isinstance(o, str) else json.dumps(o)) + "\n" for o in objs), encoding="utf-8")
    return p


CANON = {
    "campaign_id": "c1", "category": "Animals", "appeal_text": "help the dog", "goal_amount": 500,
    "photo_count": 0, "donations": [5, 10], "comments": [],
}


# ---- ingest


def test_ingest_canonical(tmp_path):
    rep = ingest(write_jsonl(tmp_path, [CANON]))
    assert len(rep.records) == 1 and rep.rejects == []
    assert rep.records[0].avg_donation == 7.5


def test_ingest_with_mapping_short_names(tmp_path):
    line = {"id": "c1", "category": "Animals", "appeal": "...", "goal": 500, "photos": 0, "donations": [5, 10], "comments": []}
    mp = tmp_path / "map.cfg"
    mp.write_text("id = campaign_id\nappeal = appeal_text\ngoal = goal_amount\nphotos = photo_count\n")
    rep = ingest(write_jsonl(tmp_path, [line]), pipeline.load_mapping(mp))
    assert rep.records[0].avg_donation == 7.5 and rep.records[0].campaign_id == "c1"


def test_ingest_dot_path_mapping(tmp_path):
    line = {"meta": {"id": 7, "cat": "Financial Emergency"}, "story": "x", "goal": 1, "photos": 2,
            "donations": [{"amount": 3}], "comments": [{"text": "hi"}], "vader": {"compound": -0.3}}
    mapping = {"meta.id": "campaign_id", "meta.cat": "category", "story": "appeal_text", "goal": "goal_amount", "photos": "photo_count"}
    rep = ingest(write_jsonl(tmp_path, [line]), mapping, sentiment_column="vader.compound")
    r = rep.records[0]
    assert (r.campaign_id, r.category, r.donations, r.comments, r.sentiment_compound) == ("7", "Emergency", (3.0,), ("hi",), -0.3)


def test_ingest_missing_goal_rejected(tmp_path):
    bad = {k: v for k, v in CANON.items() if k != "goal_amount"} | {"campaign_id": "c2"}
    rep = ingest(write_jsonl(tmp_path, [CANON, bad]))
    assert len(rep.records) == 1
    assert rep.rejects[0].reason == "missing field: goal_amount"
    assert rep.rejects[0].campaign_id == "c2" and rep.rejects[0].line == 2


@pytest.mark.parametrize(
    "patch, reason",
    [
        ({"category": "Education"}, "unknown category"),
        ({"donations": [5, 0]}, "donation 2"),
        ({"donations": [5, -1]}, "donation 2"),
        ({"goal_amount": 0}, "goal_amount"),
        ({"photo_count": -1}, "photo_count"),
        ({"photo_count": 1.5}, "photo_count"),
        ({"comments": "x"}, "comments"),
        ({"appeal_text": 5}, "appeal_text"),
    ],
)
def test_ingest_validation(tmp_path, patch, reason):
    objs = [CANON | {"campaign_id": f"ok{i}"} for i in range(3)] + [CANON | {"campaign_id": "bad"} | patch]
    rep = ingest(write_jsonl(tmp_path, objs))
    assert len(rep.records) == 3
    assert reason in rep.rejects[0].reason


def test_ingest_duplicates_and_bad_json(tmp_path):
    objs = [CANON, CANON | {"campaign_id": "c2"}, CANON | {"campaign_id": "c3"}, CANON, "{not json", "[1, 2]"]
    rep = ingest(write_jsonl(tmp_path, objs), max_reject_fraction=0.6)
    assert [r.reason.split(":")[0] for r in rep.rejects] == ["duplicate campaign_id", "invalid JSON", "line is not a JSON object"]
    assert rep.summary() == {"lines": 6, "accepted": 3, "rejected": 3}


def test_ingest_aborts_over_half_rejected(tmp_path):
    objs = [CANON, "{bad", "{bad"]
    with pytest.raises(IngestError) as ei:
        ingest(write_jsonl(tmp_path, objs))
    assert ei.value.report is not None and len(ei.value.report.rejects) == 2


def test_ingest_unreadable(tmp_path):
    with pytest.raises(IngestError):
        ingest(tmp_path / "missing.jsonl")


def test_ingest_empty_file(tmp_path):
    rep = ingest(write_jsonl(tmp_path, []))
    assert rep.records == [] and rep.n_lines == 0


def test_write_jsonl_roundtrip(tmp_path):
    recs = [rec("a", comments=("x y",)), rec("b", "Medical", sent=0.2)]
    pipeline.write_jsonl(recs, tmp_path / "d.jsonl")
    assert ingest(tmp_path / "d.jsonl", sentiment_column="sentiment_compound").records == recs


# ---- categories


@pytest.mark.parametrize("raw, cat", [("Financial Emergency", "Emergency"), ("animals", "Animals"), ("  MEDICAL ", "Medical"), ("Memorial", "Memorial"), ("financial  emergency", "Emergency")])
def test_normalize_category(raw, cat):
    assert normalize_category(raw) == cat


def test_normalize_category_unknown():
    with pytest.raises(UnknownCategoryError):
        normalize_category("Education")


# ---- features


@pytest.fixture
def axes(toy_lexicon, toy_table):
    return build_axes(toy_lexicon, toy_table)


def test_features_zero_counts(axes, toy_table):
    rows, drops = build_features([rec("a", photos=0, comments=())], axes, toy_table, {})
    assert rows[0].log_n_comments == 0.0 and rows[0].log_photos == 0.0


def test_features_avg_amount(axes, toy_table):
    rows, _ = build_features([rec("a", donations=(10.0, 20.0))], axes, toy_table, {})
    assert rows[0].avg_amount == 15.0
    assert rows[0].log_avg_amount == math.log(16.0)


def test_features_no_donations(axes, toy_table):
    rows, _ = build_features([rec("a", donations=())], axes, toy_table, {})
    assert rows[0].log_avg_amount is None and rows[0].log_n_donations == 0.0


def test_features_all_oov_dropped(axes, toy_table):
    rows, drops = build_features([rec("a"), rec("b", appeal="zzz qqq")], axes, toy_table, {})
    assert [r.campaign_id for r in rows] == ["a"]
    assert drops[0].campaign_id == "b" and drops[0].reason == "undefined moral scores"


def test_features_length_and_sentiment(axes, toy_table):
    rows, _ = build_features([rec("a", appeal="care  for\tthe dog!", sent=-0.9)], axes, toy_table, {"care": 2.0})
    assert rows[0].appeal_length == 4 and rows[0].log_length == math.log(5)
    assert rows[0].sentiment == "negative"  # override used
    rows, _ = build_features([rec("a", appeal="care dog", sent=-0.9)], axes, toy_table, {"care": 2.0}, use_overrides=False)
    assert rows[0].sentiment == "positive"


# ---- design matrix


EXPECTED_COLUMNS = (
    "Intercept", "Emergency", "Medical", "Memorial", "Care", "Fairness", "Loyalty",
    "Emergency x Care", "Medical x Care", "Memorial x Care",
    "Emergency x Fairness", "Medical x Fairness", "Memorial x Fairness",
    "Emergency x Loyalty", "Medical x Loyalty", "Memorial x Loyalty",
    "Positive sentiment", "Neutral sentiment", "Campaign appeal length", "Number of photos", "Fundraising goal",
)


def mixed_rows(axes, table):
    recs = [
        rec("a", "Animals", "harm dog the", sent=-0.5),
        rec("b", "Emergency", "care fair", sent=0.5),
        rec("c", "Medical", "family enemy dog", sent=0.0),
        rec("d", "Memorial", "unfair safe", sent=0.3, donations=()),
    ]
    rows, _ = build_features(recs, axes, table, {})
    return rows


def test_design_columns_order():
    assert design_columns() == EXPECTED_COLUMNS
    assert len(design_columns(False)) == 12


def test_reference_row_zero(axes, toy_table):
    md = model_spec(1, mixed_rows(axes, toy_table))
    assert md.X.column_names == EXPECTED_COLUMNS
    a = md.X.values[0]
    for j, name in enumerate(EXPECTED_COLUMNS):
        if name in {"Emergency", "Medical", "Memorial", "Positive sentiment", "Neutral sentiment"} or " x " in name:
            assert a[j] == 0.0, name


def test_emergency_row_encoding(axes, toy_table):
    rows = mixed_rows(axes, toy_table)
    md = model_spec(1, rows)
    e = dict(zip(EXPECTED_COLUMNS, md.X.values[1]))
    assert e["Emergency"] == 1.0 and e["Medical"] == 0.0 and e["Memorial"] == 0.0
    assert e["Emergency x Care"] == rows[1].care
    assert e["Medical x Care"] == 0.0 and e["Memorial x Care"] == 0.0
    assert e["Positive sentiment"] == 1.0


def test_model_outcomes_and_drop(axes, toy_table):
    rows = mixed_rows(axes, toy_table)
    m1 = model_spec(1, rows)
    m2 = model_spec(2, rows)
    m3 = model_spec(3, rows)
    assert m1.y.tolist() == [r.log_n_donations for r in rows]
    assert m2.X.shape[0] == 3 and m2.n_dropped == 1
    assert m3.y.tolist() == [r.log_n_comments for r in rows]
    assert model_spec(1, rows, interactions=False).X.shape[1] == 12


def test_model_spec_errors(axes, toy_table):
    with pytest.raises(ValueError):
        model_spec(4, mixed_rows(axes, toy_table))
    with pytest.raises(EmptyDataError):
        model_spec(1, [])


# ---- descriptives


def test_descriptives_two_animals(axes, toy_table):
    recs = [rec("a", appeal=" ".join(["dog"] * 100)), rec("b", appeal=" ".join(["dog"] * 300)), rec("c", "Medical")]
    rows, _ = build_features(recs, axes, toy_table, {})
    cells = {(c.category, c.variable): c for c in descriptives(rows)}
    a = cells[("Animals", "appeal_length")]
    assert a.mean == 200.0 and a.sd == pytest.approx(141.42135623730951, abs=1e-9)
    assert cells[("Medical", "appeal_length")].sd is None
    assert cells[("Emergency", "appeal_length")].n == 0
    assert cells[("Animals", "goal_amount")].mean == 500.0  # untransformed


def test_total_raised_check_proportional():
    recs = [rec(str(i), donations=[4.0] * (i + 1)) for i in range(6)]
    assert total_raised_check(recs).rho == 1.0


def test_total_raised_check_independent():
    rnd = random.Random(7)
    counts = [rnd.randint(1, 200) for _ in range(1000)]
    totals = [rnd.uniform(1, 10000) for _ in range(1000)]
    recs = [rec(str(i), donations=[totals[i] / c] * c) for i, c in enumerate(counts)]
    assert abs(total_raised_check(recs).rho) < 0.1


# ---- figures


def test_comment_alignment_identical_comments(axes, toy_table):
    appeals = ["harm harm dog", "care safe", "fair the", "enemy dog", "family", "harm care the"]
    recs = [rec(str(i), "Emergency", a, comments=(a,)) for i, a in enumerate(appeals)]
    out = comment_alignment(recs, axes, toy_table, "care")
    from moralframe.frameaxis import score_document, split_groups
    from moralframe.textprep import tokenize_for_scoring

    scores = [score_document(axes, toy_table, tokenize_for_scoring(a))["care"].value for a in appeals]
    groups = split_groups(scores)
    for s in out:
        members = [v for v, g in zip(scores, groups) if g == s.group]
        if members:
            assert s.mean == stats.describe(members)[0]


def test_comment_alignment_no_comments(axes, toy_table):
    recs = [rec(str(i), "Emergency", a) for i, a in enumerate(["harm", "care", "dog"])]
    out = comment_alignment(recs, axes, toy_table, "care")
    assert [s.group for s in out] == ["low", "medium", "high"]
    assert all(s.mean is None and s.n == 0 for s in out)


def test_comment_alignment_vice_vs_virtue(axes, toy_table):
    recs = []
    for i in range(4):
        recs.append(rec(f"lo{i}", "Emergency", "harm abuse harm", comments=("harm abuse", "abuse")))
        recs.append(rec(f"hi{i}", "Emergency", "care safe care", comments=("care safe", "safe")))
    for i in range(10):
        recs.append(rec(f"mid{i}", "Emergency", "fair family", comments=("fair",)))
    recs.append(rec("other", "Medical", "harm", comments=("care",)))
    out = {s.group: s for s in comment_alignment(recs, axes, toy_table, "care")}
    assert out["low"].n == 4 and out["high"].n == 4
    assert out["low"].mean < out["medium"].mean < out["high"].mean


def test_comment_length_constant(axes, toy_table):
    recs = [rec(str(i), "Emergency", a, comments=("thank you so much",)) for i, a in enumerate(["harm abuse", "care", "dog the", "fair", "safe harm"])]
    out = comment_length_by_group(recs, axes, toy_table, "care")
    assert all(s.mean == 4.0 for s in out if s.n)


def test_comment_length_empty_comments(axes, toy_table):
    recs = [rec(str(i), "Emergency", a, comments=("", "  ")) for i, a in enumerate(["harm abuse", "care", "dog the", "fair"])]
    out = comment_length_by_group(recs, axes, toy_table, "care")
    assert all(s.mean == 0.0 for s in out if s.n)


def test_comment_length_low_vs_high(axes, toy_table):
    ten = " ".join(["word"] * 10)
    recs = [rec(f"lo{i}", "Emergency", "harm abuse", comments=(ten,)) for i in range(3)]
    recs += [rec(f"hi{i}", "Emergency", "care safe", comments=("a b",)) for i in range(3)]
    recs += [rec(f"m{i}", "Emergency", "dog the", comments=("a b c",)) for i in range(10)]
    out = {s.group: s for s in comment_length_by_group(recs, axes, toy_table, "care")}
    assert out["low"].mean == 10.0 and out["high"].mean == 2.0
    assert out["low"].lower == out["low"].upper == 10.0


def test_position_curve_two_campaigns():
    recs = [rec("a", donations=(10, 20)), rec("b", donations=(30, 40))]
    curve = donation_position_curve(recs, min_donations=2)
    assert [(p.position, p.mean, p.n) for p in curve] == [(1, 20.0, 2), (2, 30.0, 2)]


def test_position_curve_no_qualifying():
    with pytest.raises(EmptyDataError, match="no qualifying campaigns"):
        donation_position_curve([rec("a", donations=(1.0,))], min_donations=5)


def test_position_curve_decay():
    amounts = tuple(100.0 / k for k in range(1, 11))
    recs = [rec(str(i), donations=amounts) for i in range(3)]
    curve = donation_position_curve(recs, min_donations=10)
    assert [p.mean for p in curve] == list(amounts)
    assert all(p.lower == p.mean == p.upper for p in curve)
    assert all(a.mean > b.mean for a, b in zip(curve, curve[1:]))


def test_position_curve_max_position_beyond_min():
    recs = [rec("a", donations=(1, 2, 3)), rec("b", donations=(5, 6))]
    curve = donation_position_curve(recs, min_donations=2, max_position=3)
    assert [(p.position, p.n) for p in curve] == [(1, 2), (2, 2), (3, 1)]
    assert curve[2].lower is None
