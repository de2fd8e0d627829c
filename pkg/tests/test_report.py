import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from sdkaudit.compliance import Finding, FindingKind, Severity
from sdkaudit.report import (
    ComplianceReport,
    DiffRow,
    ReportError,
    SdkEntry,
    TraceStats,
    compute_aggregates,
    diff_reports,
    dumps_report,
    evaluate_claims,
    loads_report,
    merge_reports,
    render_diff,
    render_metrics,
    render_table,
)


def entry(sdk_id, version="1.0", has_policy=False, findings=(), per_type=None, channels=None):
    per_type = per_type or {}
    feasible = sum(per_type.values())
    return SdkEntry(
        sdk_id=sdk_id,
        version=version,
        has_policy=has_policy,
        collected=sorted(per_type),
        exposed=sorted(per_type),
        claimed=sorted(per_type) if has_policy else None,
        findings=list(findings),
        stats=TraceStats(
            total=feasible,
            feasible=feasible,
            by_channel=channels or ({"network": feasible} if feasible else {}),
            per_type_feasible=dict(per_type),
        ),
    )


def finding(sdk_id, kind, dt="imei", severity=Severity.WARN):
    return Finding(
        sdk_id=sdk_id,
        kind=kind,
        severity=severity,
        data_type=dt,
        message="m",
        evidence=("e",),
    )


def report(*entries, corpus="c"):
    return ComplianceReport(corpus=corpus, entries=list(entries))


def test_report_round_trip():
    rep = report(
        entry("a.b", per_type={"imei": 2}, has_policy=True,
              findings=[finding("a.b", FindingKind.TYPE1_LEAK)]),
        entry("c.d"),
    )
    text = dumps_report(rep)
    again = loads_report(text)
    assert dumps_report(again) == text
    assert text.endswith("\n")
    doc = json.loads(text)
    assert doc["schema"] == 1
    assert [e["sdk_id"] for e in doc["sdks"]] == ["a.b", "c.d"]


def test_dumps_is_deterministic():
    rep = report(entry("z.z", per_type={"sms": 1}), entry("a.a", per_type={"imei": 3}))
    assert dumps_report(rep) == dumps_report(report(*reversed(rep.entries)))


def test_schema_mismatch_rejected():
    with pytest.raises(ReportError):
        loads_report(json.dumps({"schema": 99, "corpus": "", "entries": []}))
    with pytest.raises(ReportError):
        loads_report("{not json")


def test_aggregates_policy_percentages():
    entries = [
        entry("a", has_policy=True, findings=[finding("a", FindingKind.TYPE2_EXCESSIVE_COLLECTION)]),
        entry("b", has_policy=True, findings=[finding("b", FindingKind.TYPE3_OVER_CLAIMING)]),
        entry("c", has_policy=True),
        entry("d"),  # no policy: excluded from both denominators
    ]
    agg = compute_aggregates(entries)
    assert agg["n_sdks"] == 4
    assert agg["n_with_policy"] == 3
    assert agg["pct_with_policy"] == 75.0
    assert agg["pct_excessive"] == pytest.approx(33.3)
    assert agg["pct_over_claiming"] == pytest.approx(33.3)


def test_aggregates_no_policy_marker_excluded():
    # an SDK without a policy gets marker findings but must not count toward
    # the excessive-collection rate
    marked = entry(
        "d",
        findings=[finding("d", FindingKind.TYPE2_EXCESSIVE_COLLECTION)],
    )
    agg = compute_aggregates([marked])
    assert agg["n_with_policy"] == 0
    assert agg["pct_excessive"] == 0.0
    assert agg["finding_counts"]["type2_excessive_collection"] == 1


def test_aggregates_channel_share():
    entries = [
        entry("a", per_type={"imei": 3}, channels={"network": 3}),
        entry("b", per_type={"sms": 1}, channels={"file": 1}),
    ]
    agg = compute_aggregates(entries)
    assert agg["traces"]["feasible"] == 4
    assert agg["by_channel"] == {"file": 1, "network": 3}
    assert agg["pct_network_of_feasible"] == 75.0


def test_merge_rejects_duplicates():
    with pytest.raises(ReportError, match="duplicate"):
        merge_reports([report(entry("a.b")), report(entry("a.b"))])


def test_merge_keeps_distinct_versions():
    merged = merge_reports([report(entry("a.b", "1.0")), report(entry("a.b", "2.0"))])
    assert [(e.sdk_id, e.version) for e in merged.entries] == [("a.b", "1.0"), ("a.b", "2.0")]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_merge_associative_commutative(seed):
    rng = random.Random(seed)
    pool = [
        entry(f"sdk{i}", per_type={dt: rng.randint(1, 5)})
        for i, dt in enumerate(rng.choices(["imei", "sms", "location", "wifi"], k=6))
    ]
    a, b, c = report(*pool[:2]), report(*pool[2:4]), report(*pool[4:])
    left = merge_reports([merge_reports([a, b]), c])
    right = merge_reports([a, merge_reports([b, c])])
    swapped = merge_reports([c, a, b])
    assert dumps_report(left) == dumps_report(right) == dumps_report(swapped)


def test_render_table_has_totals():
    rep = report(entry("a.b", per_type={"imei": 2}))
    out = render_table(rep)
    assert "a.b" in out
    assert "sdk" in out.splitlines()[0]


# -- diff ---------------------------------------------------------------------------


def test_diff_rows_and_labels():
    old = report(entry("a", per_type={"imei": 26, "location": 130, "serial": 5}))
    new = report(entry("a", per_type={"imei": 9, "location": 36, "serial": 8, "app_list": 53}))
    diff = diff_reports(old, new)
    by_type = {r.data_type: r for r in diff.rows}
    assert by_type["imei"].delta == -17 and by_type["imei"].pct_label == "65%"
    assert by_type["location"].delta == -94 and by_type["location"].pct_label == "72%"
    assert by_type["serial"].delta == 3 and by_type["serial"].pct_label == "60%"
    assert by_type["app_list"].delta == 53 and by_type["app_list"].pct_label == "new"
    assert diff.total.old == 161 and diff.total.new == 106


def test_diff_zero_to_zero_label():
    assert DiffRow("x", 0, 0).pct_label == "0%"


def test_diff_restricts_to_common_sdks():
    old = report(entry("a", per_type={"imei": 5}), entry("gone", per_type={"sms": 9}))
    new = report(entry("a", per_type={"imei": 7}), entry("fresh", per_type={"wifi": 1}))
    diff = diff_reports(old, new)
    assert [r.data_type for r in diff.rows] == ["imei"]
    assert diff.total.old == 5 and diff.total.new == 7
    assert len(diff.warnings) == 1
    assert "fresh" in diff.warnings[0] and "gone" in diff.warnings[0]


def test_render_diff_shows_sign():
    old = report(entry("a", per_type={"imei": 10}))
    new = report(entry("a", per_type={"imei": 4}))
    out = render_diff(diff_reports(old, new))
    assert "-6 (60%)" in out


# -- metrics ------------------------------------------------------------------------


def test_metrics_micro_counts():
    predicted = {"a": {"imei", "sms"}, "b": {"location"}}
    truth = {"a": {"imei"}, "b": {"location", "wifi"}}
    m = evaluate_claims(predicted, truth)
    assert (m.tp, m.fp, m.fn) == (2, 1, 1)
    assert m.precision == pytest.approx(2 / 3)
    assert m.recall == pytest.approx(2 / 3)
    assert m.per_type["sms"] == {"tp": 0, "fp": 1, "fn": 0}


def test_metrics_empty_sets_give_perfect_precision_recall():
    m = evaluate_claims({"a": set()}, {"a": set()})
    assert m.precision == 1.0 and m.recall == 1.0 and m.f1 == 1.0


def test_metrics_mismatched_sdks_rejected():
    with pytest.raises(ReportError, match="differ"):
        evaluate_claims({"a": set()}, {"b": set()})


def test_render_metrics_one_decimal():
    m = evaluate_claims(
        {"a": {"imei", "sms", "wifi"}},
        {"a": {"imei", "sms", "location"}},
    )
    out = render_metrics(m)
    assert "precision=66.7%" in out
    assert "recall=66.7%" in out


@given(
    st.dictionaries(
        st.sampled_from(["s1", "s2", "s3"]),
        st.frozensets(st.sampled_from(["imei", "sms", "wifi", "location"]), max_size=4),
        min_size=1,
        max_size=3,
    ),
    st.data(),
)
def test_metrics_match_brute_force(predicted, data):
    truth = {
        k: data.draw(
            st.frozensets(st.sampled_from(["imei", "sms", "wifi", "location"]), max_size=4)
        )
        for k in predicted
    }
    m = evaluate_claims({k: set(v) for k, v in predicted.items()}, {k: set(v) for k, v in truth.items()})
    tp = sum(len(predicted[k] & truth[k]) for k in predicted)
    fp = sum(len(predicted[k] - truth[k]) for k in predicted)
    fn = sum(len(truth[k] - predicted[k]) for k in predicted)
    assert (m.tp, m.fp, m.fn) == (tp, fp, fn)
