import random

import pytest
from hypothesis import given, settings, strategies as st

from sdkaudit.ir import loads_program, parse_method_token
from sdkaudit.taint import (
    AnalysisConfig,
    CatalogError,
    Channel,
    Feasibility,
    analyze,
    analyze_unit,
    apply_suppressions,
    check_feasibility,
    find_source_hits,
    load_catalog_document,
    load_suppressions,
)

from oracles import (
    REF_CATALOG,
    REF_CATALOG_YAML,
    ReferenceTaint,
    random_program,
    reference_feasibility,
)

HEAD = "pf 1\nsdk test.gen 1.0.0\nentry test.gen.M0.run0()\n"


def run(body: str, catalog, config=None):
    unit = loads_program(HEAD + body)
    return unit, analyze_unit(unit, catalog, config or AnalysisConfig())


def trace_keys(res):
    return {
        (t.data_type, str(t.path[0][0]), t.source_index, str(t.path[-1][0]), t.sink_index)
        for t in res.traces
    }


def test_direct_flow(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        "  call x = test.Api.readImei()\n"
        "  call test.Net.send(String) x\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    assert trace_keys(res) == {("imei", "test.gen.M0.run0()", 0, "test.gen.M0.run0()", 1)}
    t = res.traces[0]
    assert t.channel is Channel.NETWORK
    assert t.feasibility is Feasibility.FEASIBLE
    assert t.path_count == 1
    assert str(t.source) == "test.Api.readImei()"
    assert str(t.sink) == "test.Net.send(String)"


def test_hashing_keeps_taint(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        "  call x = test.Api.readImei()\n"
        "  call h = test.Util.hash(String) x\n"
        "  call test.Net.send(String) h\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    assert len(res.traces) == 1
    assert res.traces[0].data_type == "imei"


def test_source_call_does_not_pass_arguments_through(ref_catalog):
    # x flows into a source call; the source result carries only its own type
    body = (
        "method test.gen.M0.run0()\n"
        "  call x = test.Api.readImei()\n"
        "  call y = test.Api.readLoc() x\n"
        "  call test.Net.send(String) y\n"
        "  return\n"
    )
    unit = loads_program(HEAD + body)
    res = analyze_unit(unit, ref_catalog)
    assert {t.data_type for t in res.traces} == {"location"}


def test_interprocedural_flow_and_return(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        "  call x = test.Api.readLoc()\n"
        "  call y = test.gen.M1.wrap(String) x\n"
        "  call test.Net.send(String) y\n"
        "  return\n"
        "method test.gen.M1.wrap(String) v\n"
        "  call h = test.Util.hash(String) v\n"
        "  return h\n"
    )
    _, res = run(body, ref_catalog)
    assert len(res.traces) == 1
    hops = [str(r) for r, _ in res.traces[0].path]
    assert "test.gen.M1.wrap(String)" in hops


def test_return_flows_context_insensitively(ref_catalog):
    # wrap() is called twice; taint entering via the first call site leaks
    # out of both, so the clean call site also reaches the sink
    body = (
        "method test.gen.M0.run0()\n"
        '  const c "s0"\n'
        "  call x = test.Api.readImei()\n"
        "  call a = test.gen.M1.wrap(String) x\n"
        "  call b = test.gen.M1.wrap(String) c\n"
        "  call test.Net.send(String) b\n"
        "  return\n"
        "method test.gen.M1.wrap(String) v\n"
        "  return v\n"
    )
    _, res = run(body, ref_catalog)
    assert len(res.traces) == 1
    assert res.traces[0].sink_index == 4


def test_field_flow_stays_inside_method(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        "  call x = test.Api.readImei()\n"
        "  field_write test.gen.M0.F0 x\n"
        "  field_read y test.gen.M0.F0\n"
        "  call test.Net.send(String) y\n"
        "  call test.gen.M1.other()\n"
        "  return\n"
        "method test.gen.M1.other()\n"
        "  field_read z test.gen.M0.F0\n"
        "  call test.Net.send(String) z\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    # only the intra-method read observes the write
    assert {str(t.path[-1][0]) for t in res.traces} == {"test.gen.M0.run0()"}


def test_field_read_before_write_sees_nothing(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        "  field_read y test.gen.M0.F0\n"
        "  call x = test.Api.readImei()\n"
        "  field_write test.gen.M0.F0 x\n"
        "  call test.Net.send(String) y\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    assert res.traces == []


def test_settings_key_source_and_key_taint(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        '  const k "aid"\n'
        "  settings_read v secure k\n"
        "  call test.Net.send(String) v\n"
        '  const other "s1"\n'
        "  settings_read w secure other\n"
        "  call test.Net.send(String) w\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    # the aid read is an android_id source; the other read carries no taint
    # (its key operand is an untainted const)
    assert {(t.data_type, t.source_index) for t in res.traces} == {("android_id", 1)}
    assert res.traces[0].access_kind.value == "settings_key"


def test_settings_read_propagates_tainted_key(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        "  call x = test.Api.readImei()\n"
        "  settings_read v secure x\n"
        "  call test.Net.send(String) v\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    assert {(t.data_type, t.sink_index) for t in res.traces} == {("imei", 2)}


def test_settings_write_sink_records_key(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        '  const k "shared_slot"\n'
        "  call x = test.Api.readImei()\n"
        "  settings_write system k x\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    t = res.traces[0]
    assert t.channel is Channel.SYSTEM_SETTINGS
    assert t.settings_key == "shared_slot"
    assert str(t.sink) == "android.provider.Settings.System.putString(ContentResolver,String,String)"


def test_branch_predicate_propagates_nothing(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        "  call x = test.Api.readImei()\n"
        "  branch x true 3\n"
        '  const pad "s0"\n'
        '  const y "s1"\n'
        "  call test.Net.send(String) y\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    assert res.traces == []


def test_dead_code_produces_nothing(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        "  return\n"
        "  call x = test.Api.readImei()\n"
        "  call test.Net.send(String) x\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    assert res.traces == []
    assert find_source_hits(loads_program(HEAD + body), ref_catalog) == []


def test_dropped_source_counts_as_hit_but_not_trace(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        "  call test.Api.readImei()\n"
        "  return\n"
    )
    unit, res = run(body, ref_catalog)
    assert res.traces == []
    hits = find_source_hits(unit, ref_catalog)
    assert [(h.data_type, h.index) for h in hits] == [("imei", 0)]


def test_path_count_fans_out(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        "  call x = test.Api.readImei()\n"
        "  call a = test.Util.hash(String) x\n"
        "  call b = test.Util.hash(String) x\n"
        "  call m = test.Util.mix(String,String) a b\n"
        "  call test.Net.send(String) m\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    # two disjoint middles, one joined tail
    assert res.traces[0].path_count == 2
    assert len(res.traces[0].path) == 4


def test_repeated_argument_counts_once(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        "  call x = test.Api.readImei()\n"
        "  call m = test.Util.mix(String,String) x x\n"
        "  call test.Net.send(String) m\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    assert res.traces[0].path_count == 1


def test_call_depth_bound_cuts_deep_chains(ref_catalog):
    # a chain of n nested calls costs n par edges; past the bound the sink
    # stays unreached
    def chain(n):
        lines = [
            "method test.gen.M0.run0()\n",
            "  call x = test.Api.readImei()\n",
            "  call y = test.gen.C1.f1(String) x\n",
            "  call test.Net.send(String) y\n",
            "  return\n",
        ]
        for i in range(1, n + 1):
            nxt = f"test.gen.C{i + 1}.f{i + 1}" if i < n else None
            lines.append(f"method test.gen.C{i}.f{i}(String) v\n")
            if nxt:
                lines.append(f"  call r = {nxt}(String) v\n")
                lines.append("  return r\n")
            else:
                lines.append("  return v\n")
        return "".join(lines)

    shallow = loads_program(HEAD + chain(19))
    assert len(analyze(shallow, ref_catalog)) == 1
    deep = loads_program(HEAD + chain(21))
    assert analyze(deep, ref_catalog) == []


def test_path_bound_note(ref_catalog):
    # 14 diamond stages give 2^14 routes, over the 10k cap
    lines = ["method test.gen.M0.run0()\n", "  call v0 = test.Api.readImei()\n"]
    for i in range(14):
        lines.append(f"  call a{i} = test.Util.hash(String) v{i}\n")
        lines.append(f"  call b{i} = test.Util.hash(String) v{i}\n")
        lines.append(f"  call v{i + 1} = test.Util.mix(String,String) a{i} b{i}\n")
    lines.append("  call test.Net.send(String) v14\n")
    lines.append("  return\n")
    unit = loads_program(HEAD + "".join(lines))
    res = analyze_unit(unit, ref_catalog)
    assert len(res.traces) == 1
    assert res.traces[0].path_count <= 10_000
    assert [n.kind for n in res.notes] == ["path_bound"]


# -- feasibility -------------------------------------------------------------------


def test_contradictory_guards_infeasible(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        '  const p "s0"\n'
        "  branch p true 3\n"
        "  return\n"
        "  call x = test.Api.readSsid()\n"
        "  branch p true 7\n"
        "  call test.Net.send(String) x\n"
        "  return\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    assert [t.feasibility for t in res.traces] == [Feasibility.INFEASIBLE_GUARD]


def test_consistent_guards_feasible(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        '  const p "s0"\n'
        "  branch p true 3\n"
        "  return\n"
        "  call x = test.Api.readSsid()\n"
        "  branch p false 7\n"
        "  call test.Net.send(String) x\n"
        "  return\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    assert [t.feasibility for t in res.traces] == [Feasibility.FEASIBLE]


def test_branch_with_equal_targets_constrains_nothing(ref_catalog):
    body = (
        "method test.gen.M0.run0()\n"
        '  const p "s0"\n'
        "  branch p true 2\n"
        "  call x = test.Api.readSsid()\n"
        "  branch p true 5\n"
        "  return\n"
        "  call test.Net.send(String) x\n"
        "  return\n"
    )
    # first branch targets its own fallthrough; only the second constrains
    _, res = run(body, ref_catalog)
    assert [t.feasibility for t in res.traces] == [Feasibility.FEASIBLE]


def test_fresh_activation_resets_constraints(ref_catalog):
    # helper demands p true on one visit and p false on the next; separate
    # activations must not contradict each other
    body = (
        "method test.gen.M0.run0()\n"
        "  call x = test.Api.readImei()\n"
        "  call a = test.gen.M1.gate(String) x\n"
        "  call b = test.gen.M1.gate(String) a\n"
        "  call test.Net.send(String) b\n"
        "  return\n"
        "method test.gen.M1.gate(String) v\n"
        "  return v\n"
    )
    _, res = run(body, ref_catalog)
    assert len(res.traces) == 1
    assert res.traces[0].feasibility is Feasibility.FEASIBLE


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_feasibility_matches_reference_on_single_methods(ref_catalog, seed):
    rng = random.Random(seed)
    unit = loads_program(random_program(rng, max_methods=1, max_instr=22), f"s{seed}")
    res = analyze_unit(unit, ref_catalog)
    if res.notes:
        return
    for t in res.traces:
        assert t.feasibility.value == reference_feasibility(unit, list(t.path))


# -- randomized equivalence ----------------------------------------------------------


@settings(max_examples=120, deadline=None)
@given(st.integers(min_value=0, max_value=10_000_000))
def test_engine_matches_reference(ref_catalog, seed):
    rng = random.Random(seed)
    unit = loads_program(random_program(rng, max_methods=6, max_instr=24), f"s{seed}")
    res = analyze_unit(unit, ref_catalog)
    if res.notes:
        return
    eng = {
        (t.data_type, t.path[0][0], t.source_index, t.path[-1][0], t.sink_index, t.channel.value): (
            len(t.path),
            t.path_count,
        )
        for t in res.traces
    }
    ref = {
        (r.data_type, r.source_method, r.source_index, r.sink_method, r.sink_index, r.channel): (
            r.path_len,
            r.path_count,
        )
        for r in ReferenceTaint(unit, REF_CATALOG).traces()
    }
    assert eng == ref


# -- suppressions ------------------------------------------------------------------


def _suppression_file(tmp_path, records):
    p = tmp_path / "supp.yaml"
    import yaml

    p.write_text(yaml.safe_dump({"suppressions": records}), encoding="utf-8")
    return p


def test_suppression_downgrades_feasible(ref_catalog, tmp_path):
    body = (
        "method test.gen.M0.run0()\n"
        "  call x = test.Api.readImei()\n"
        "  call test.Net.send(String) x\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    entries = load_suppressions(
        _suppression_file(
            tmp_path,
            [
                {
                    "sdk_id": "test.gen",
                    "source": "test.Api.readImei()",
                    "sink": "test.Net.*",
                    "reason": "first-party endpoint",
                }
            ],
        )
    )
    out, warnings = apply_suppressions(res.traces, entries)
    assert [t.feasibility for t in out] == [Feasibility.SUPPRESSED]
    assert warnings == []


def test_suppression_never_touches_infeasible(ref_catalog, tmp_path):
    body = (
        "method test.gen.M0.run0()\n"
        '  const p "s0"\n'
        "  branch p true 3\n"
        "  return\n"
        "  call x = test.Api.readSsid()\n"
        "  branch p true 7\n"
        "  call test.Net.send(String) x\n"
        "  return\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    entries = load_suppressions(
        _suppression_file(
            tmp_path,
            [{"sdk_id": "test.gen", "source": "test.Api.*", "sink": "test.Net.*", "reason": "x"}],
        )
    )
    out, warnings = apply_suppressions(res.traces, entries)
    assert [t.feasibility for t in out] == [Feasibility.INFEASIBLE_GUARD]
    assert len(warnings) == 1 and "matched no trace" in warnings[0]


def test_suppression_respects_sdk_id(ref_catalog, tmp_path):
    body = (
        "method test.gen.M0.run0()\n"
        "  call x = test.Api.readImei()\n"
        "  call test.Net.send(String) x\n"
        "  return\n"
    )
    _, res = run(body, ref_catalog)
    entries = load_suppressions(
        _suppression_file(
            tmp_path,
            [{"sdk_id": "some.other", "source": "test.Api.*", "sink": "test.Net.*", "reason": "x"}],
        )
    )
    out, warnings = apply_suppressions(res.traces, entries)
    assert [t.feasibility for t in out] == [Feasibility.FEASIBLE]
    assert len(warnings) == 1


def test_bad_suppression_file_rejected(tmp_path):
    p = tmp_path / "supp.yaml"
    p.write_text("suppressions:\n  - {source: 'test.Api.*', sink: 'x.*'}\n", encoding="utf-8")
    with pytest.raises(CatalogError, match="sdk_id"):
        load_suppressions(p)


# -- catalog validation ---------------------------------------------------------------


def test_catalog_rejects_claim_only_types(ontology):
    doc = {
        "sources": [
            {"method": "a.B.c()", "data_type": "device_identifiers", "access_kind": "api_call"}
        ],
        "sinks": [],
    }
    with pytest.raises(CatalogError, match="claim-only"):
        load_catalog_document(doc, ontology)


def test_catalog_rejects_unknown_type(ontology):
    doc = {"sources": [{"method": "a.B.c()", "data_type": "mystery", "access_kind": "api_call"}]}
    with pytest.raises(CatalogError, match="unknown data_type"):
        load_catalog_document(doc, ontology)


def test_bundled_catalog_counts(catalog):
    assert len(catalog.sinks) == 46
    assert len(catalog.sources) == 58


def test_most_specific_source_wins(ontology):
    doc = {
        "sources": [
            {"method": "a.net.Wifi.*", "data_type": "wifi", "access_kind": "api_call"},
            {"method": "a.net.Wifi.getSSID()", "data_type": "ssid_bssid", "access_kind": "api_call"},
        ],
        "sinks": [{"method": "test.Net.send(String)", "channel": "network"}],
    }
    cat = load_catalog_document(doc, ontology)
    body = (
        "method test.gen.M0.run0()\n"
        "  call x = a.net.Wifi.getSSID()\n"
        "  call test.Net.send(String) x\n"
        "  return\n"
    )
    _, res = run(body, cat)
    assert {t.data_type for t in res.traces} == {"ssid_bssid"}


def test_equally_specific_sources_coexist(ontology):
    # one API may legitimately expose two data types
    doc = {
        "sources": [
            {"method": "a.net.Cell.info()", "data_type": "location", "access_kind": "api_call"},
            {"method": "a.net.Cell.info()", "data_type": "carrier_info", "access_kind": "api_call"},
        ],
        "sinks": [{"method": "test.Net.send(String)", "channel": "network"}],
    }
    cat = load_catalog_document(doc, ontology)
    body = (
        "method test.gen.M0.run0()\n"
        "  call x = a.net.Cell.info()\n"
        "  call test.Net.send(String) x\n"
        "  return\n"
    )
    _, res = run(body, cat)
    assert {t.data_type for t in res.traces} == {"location", "carrier_info"}
