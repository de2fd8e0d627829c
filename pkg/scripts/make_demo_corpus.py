#!/usr/bin/env python3
"""Regenerate the bundled fixture data.

Emits, deterministically:

  src/sdkaudit/data/demo/     20-SDK synthetic corpus (programs, policies,
                              recorded scores, suppressions, diff reports)
  src/sdkaudit/data/tuning/   labeled threshold-tuning corpus
  src/sdkaudit/data/metrics/  claim predictions and ground truth

The demo corpus is sized so the report lands on fixed totals: 346 traces,
338 feasible (332 network + 6 system settings), 1 infeasible guard,
7 suppressed, and 14 of 20 SDKs shipping a policy. The script re-runs the
full pipeline on its own output and fails if any of those drift.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "src" / "sdkaudit" / "data"

from sdkaudit.compliance import FindingKind, Severity
from sdkaudit.harness import RunConfig, run_corpus
from sdkaudit.ontology import load_bundled_ontology
from sdkaudit.policy import (
    EntailmentScores,
    FixtureScorer,
    ScoreFixture,
    Stance,
    generate_hypotheses,
    read_score_fixture,
    segment_policy,
    write_score_fixture,
)
from sdkaudit.report import ComplianceReport, SdkEntry, TraceStats, dumps_report
from sdkaudit.taint import Feasibility, load_bundled_catalog, load_suppressions


def sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# -- demo programs ------------------------------------------------------------------

# Identifier acquisition, hashing, and a write into two world-readable
# settings slots. The consumer side of the same channel is com.baidu.lbs.
ALICLOUD_PF = """\
pf 1
sdk com.alicloud.push 3.4.0
entry com.alicloud.push.Boot.start(Context)

method com.alicloud.push.Boot.start(Context) ctx
  const k "android_id"
  settings_read aid secure k
  call h = com.alicloud.push.Md5.digest(String) aid
  const slot1 "dxCRMxhQkdGePGnp"
  settings_write system slot1 h
  const slot2 "mqBRboGZkQPcAkyk"
  settings_write system slot2 h
  return
"""

# The network-state guard contradicts itself: the SSID read needs the
# false branch, the send needs the true branch, and the true branch
# returned already. One trace, never realizable.
MIPUSH_PF = """\
pf 1
sdk com.mipush.net 5.1.2
entry com.mipush.net.Reporter.sync()

method com.mipush.net.Reporter.sync()
  call c = android.net.NetworkInfo.isConnected()
  branch c true 5
  call w = android.net.NetworkInfo.getExtraInfo()
  branch c true 6
  return
  return
  call java.net.URL.<init>(String) w
  return
"""

BAIDU_PF = """\
pf 1
sdk com.baidu.lbs 7.8.1
entry com.baidu.lbs.Locator.begin(Context)

method com.baidu.lbs.Locator.begin(Context) ctx
  const k1 "com.baidu.uuid"
  settings_read u1 system k1
  const k2 "com.baidu.deviceid.v2"
  settings_read u2 system k2
  const prov "gps"
  call loc = android.location.LocationManager.getLastKnownLocation(String) prov
  call org.apache.http.client.methods.HttpPost.setEntity(HttpEntity) loc
  call com.baidu.lbs.Locator.upload(String) loc
  return

method com.baidu.lbs.Locator.upload(String) body
  call org.apache.http.client.methods.HttpGet.setHeader(String,String) body
  return
"""

SUPPRESS_PF = """\
pf 1
sdk com.suppress.net 2.0.6
entry com.suppress.net.Beacon.fire()

method com.suppress.net.Beacon.fire()
  call a = android.telephony.TelephonyManager.getImei()
  call org.apache.http.client.methods.HttpGet.<init>(String) a
  call b = android.telephony.TelephonyManager.getImei()
  call org.apache.http.client.methods.HttpPost.<init>(String) b
  call c = android.telephony.TelephonyManager.getImei()
  call org.apache.http.client.methods.HttpPost.setEntity(HttpEntity) c
  call d = android.telephony.TelephonyManager.getDeviceId()
  call org.apache.http.client.methods.HttpGet.setHeader(String,String) d
  call e = android.telephony.TelephonyManager.getDeviceId()
  call org.apache.http.client.methods.HttpPost.setHeader(String,String) e
  call f = android.telephony.TelephonyManager.getDeviceId()
  call org.apache.http.params.HttpParams.setParameter(String,Object) f
  return
"""

ACCOUNTS_PF = """\
pf 1
sdk com.accounts.sync 1.9.3
entry com.accounts.sync.Backup.dump()

method com.accounts.sync.Backup.dump()
  call acc = android.accounts.AccountManager.getAccounts()
  call java.io.Writer.write(String) acc
  return
"""

IOT_PF = """\
pf 1
sdk com.iot.bridge 0.9.14
entry com.iot.bridge.Sync.run(Context)

method com.iot.bridge.Sync.run(Context) ctx
  const ka "android_id"
  settings_read aid secure ka
  const s1 "com.iot.device.fp"
  settings_write global s1 aid
  field_read ser android.os.Build.SERIAL
  const s2 "com.iot.serial.cache"
  settings_write global s2 ser
  call im = android.telephony.TelephonyManager.getImei()
  const s3 "com.iot.imei.shadow"
  settings_write system s3 im
  call wm = android.net.wifi.WifiInfo.getMacAddress()
  const s4 "com.iot.mac.mirror"
  settings_write secure s4 wm
  return
"""

# small single-flow SDKs: (sdk, version, class stem, source lines, sink line)
SMALL_FLOWS = [
    (
        "com.pay.gateway",
        "4.2.0",
        "Checkout.verify",
        ["  call num = android.telephony.TelephonyManager.getLine1Number()"],
        "  call java.net.URL.<init>(String) num",
    ),
    (
        "com.game.engine",
        "11.0.2",
        "Sdk.boot",
        ["  call gid = com.google.android.gms.ads.identifier.AdvertisingIdClient$Info.getId()"],
        "  call org.apache.http.client.methods.HttpGet.<init>(String) gid",
    ),
    (
        "com.weather.kit",
        "3.3.8",
        "Forecast.locate",
        [
            '  const prov "network"',
            "  call pos = android.location.LocationManager.getLastKnownLocation(String) prov",
        ],
        "  call org.apache.http.client.methods.HttpPost.setEntity(HttpEntity) pos",
    ),
    (
        "com.crash.reporter",
        "6.1.1",
        "Dump.collect",
        [
            '  const flags "0"',
            "  call apps = android.content.pm.PackageManager.getInstalledPackages(int) flags",
        ],
        "  call org.android.spdy.SpdyRequest.setBody(byte[]) apps",
    ),
    (
        "com.video.player",
        "2.7.5",
        "Qos.probe",
        ["  call net = android.telephony.TelephonyManager.getNetworkType()"],
        "  call java.net.HttpURLConnection.setRequestProperty(String,String) hdr net",
    ),
    (
        "com.chat.relay",
        "8.0.0",
        "Invite.scan",
        ["  call book = android.provider.ContactsContract$Contacts.query()"],
        "  call org.apache.http.client.methods.HttpPost.setEntity(HttpEntity) book",
    ),
    (
        "com.map.embed",
        "5.5.2",
        "Tile.center",
        [
            '  const prov "gps"',
            "  call fix = android.location.LocationManager.getLastKnownLocation(String) prov",
            "  call lat = android.location.Location.getLatitude() fix",
        ],
        "  call java.net.URL.<init>(String) lat",
    ),
    (
        "com.fit.tracker",
        "1.4.9",
        "Motion.sample",
        ["  field_read sv android.hardware.SensorEvent.values"],
        "  call org.android.spdy.SpdyRequest.appendBody(byte[]) sv",
    ),
]

# SDKs that embed nothing sensitive; they pad the corpus the way most
# real dependencies would.
INERT = [
    ("com.clean.booster", "9.2.1", "Cache.sweep"),
    ("com.login.widget", "2.2.0", "Form.render"),
    ("com.push.lite", "0.5.3", "Ping.idle"),
]

BULK_SOURCES = {
    "google_ad_id": (
        [],
        "call {v} = com.google.android.gms.ads.identifier.AdvertisingIdClient$Info.getId()",
    ),
    "app_list": (
        ['const {v}f "0"'],
        "call {v} = android.content.pm.PackageManager.getInstalledPackages(int) {v}f",
    ),
    "imei": ([], "call {v} = android.telephony.TelephonyManager.getImei()"),
    "location": (
        ['const {v}p "gps"'],
        "call {v} = android.location.LocationManager.getLastKnownLocation(String) {v}p",
    ),
    "wifi_mac": ([], "call {v} = android.net.wifi.WifiInfo.getMacAddress()"),
    "carrier_info": ([], "call {v} = android.telephony.TelephonyManager.getNetworkOperatorName()"),
    "network_info": ([], "call {v} = android.telephony.TelephonyManager.getNetworkType()"),
    "sim_info": ([], "call {v} = android.telephony.TelephonyManager.getSimOperatorName()"),
    "phone_status": ([], "call {v} = android.telephony.TelephonyManager.getCallState()"),
    "imsi": ([], "call {v} = android.telephony.TelephonyManager.getSubscriberId()"),
    "bluetooth_mac": ([], "call {v} = android.bluetooth.BluetoothAdapter.getAddress()"),
    "external_storage": ([], "call {v} = android.os.Environment.getExternalStorageDirectory()"),
    "contact_list": ([], "call {v} = android.provider.ContactsContract$Contacts.query()"),
    "account_info": ([], "call {v} = android.accounts.AccountManager.getAccounts()"),
    "clipboard_data": ([], "call {v} = android.content.ClipboardManager.getText()"),
    "sms": ([], "call {v} = android.telephony.SmsMessage.getMessageBody()"),
}

BULK_SINKS = [
    "call java.net.URL.<init>(String) {v}",
    "call org.apache.http.client.methods.HttpPost.setEntity(HttpEntity) {v}",
    "call org.apache.http.client.methods.HttpGet.<init>(String) {v}",
    "call org.android.spdy.SpdyRequest.setBody(byte[]) {v}",
]

# (sdk, version, {data_type: trace count}); 122 + 110 + 90 = 322 traces
BULK = [
    (
        "com.ads.mega",
        "14.3.0",
        {
            "google_ad_id": 42,
            "app_list": 25,
            "imei": 20,
            "location": 15,
            "wifi_mac": 10,
            "carrier_info": 10,
        },
    ),
    (
        "com.analytics.hub",
        "10.1.7",
        {
            "network_info": 30,
            "sim_info": 25,
            "phone_status": 20,
            "imsi": 15,
            "bluetooth_mac": 10,
            "external_storage": 10,
        },
    ),
    (
        "com.social.connect",
        "6.6.1",
        {
            "contact_list": 30,
            "account_info": 25,
            "clipboard_data": 20,
            "sms": 15,
        },
    ),
]

PAIRS_PER_WORKER = 15


def small_pf(sdk: str, version: str, stem: str, source_lines: list[str], sink_line: str) -> str:
    cls, meth = stem.split(".")
    token = f"{sdk}.{cls}.{meth}()"
    lines = [f"pf 1", f"sdk {sdk} {version}", f"entry {token}", "", f"method {token}"]
    if "{v}" not in sink_line and " hdr " in sink_line:
        lines.append('  const hdr "X-Device"')
    lines += source_lines
    lines.append(sink_line)
    lines.append("  return")
    return "\n".join(lines) + "\n"


def inert_pf(sdk: str, version: str, stem: str) -> str:
    cls, meth = stem.split(".")
    token = f"{sdk}.{cls}.{meth}()"
    return (
        f"pf 1\nsdk {sdk} {version}\nentry {token}\n\n"
        f"method {token}\n"
        f'  const tag "{sdk}"\n'
        f"  call r = {sdk}.{cls}.stamp(String) tag\n"
        f"  branch r true 4\n"
        f"  return\n"
        f"  return\n\n"
        f"method {sdk}.{cls}.stamp(String) s\n"
        f"  assign t s\n"
        f"  return t\n"
    )


def bulk_pf(sdk: str, version: str, mix: dict[str, int]) -> str:
    pairs = []
    for dt in mix:  # insertion order keeps output stable
        pairs.extend([dt] * mix[dt])
    workers = [pairs[i : i + PAIRS_PER_WORKER] for i in range(0, len(pairs), PAIRS_PER_WORKER)]
    boot = f"{sdk}.Hub.boot()"
    out = [f"pf 1", f"sdk {sdk} {version}", f"entry {boot}", "", f"method {boot}"]
    for w in range(len(workers)):
        out.append(f"  call {sdk}.W{w}.run()")
    out.append("  return")
    n_sink = 0
    for w, chunk in enumerate(workers):
        out += ["", f"method {sdk}.W{w}.run()"]
        for i, dt in enumerate(chunk):
            v = f"v{i}"
            setup, src = BULK_SOURCES[dt]
            out += ["  " + s.format(v=v) for s in setup]
            out.append("  " + src.format(v=v))
            out.append("  " + BULK_SINKS[n_sink % len(BULK_SINKS)].format(v=v))
            n_sink += 1
        out.append("  return")
    return "\n".join(out) + "\n"


# -- demo policies ------------------------------------------------------------------

# sdk -> list of (sentence, [claimed types]); sentences with no claim
# still get scored, they just land on the fixture default.
POLICIES = {
    "com.alicloud.push": [
        ("We may share your device identifiers with our service partners.", ["device_identifiers"]),
        ("Data is retained for up to ninety days.", []),
    ],
    "com.mipush.net": [
        ("The SDK records the SSID of the connected network to localize push routing.", ["ssid_bssid"]),
        ("You can opt out of diagnostics in the host app.", []),
    ],
    "com.baidu.lbs": [
        ("Our SDK collects your precise location to provide geofencing.", ["location"]),
        ("We also collect your IP address for fraud prevention.", ["ip_address"]),
    ],
    "com.accounts.sync": [
        ("We access your account information to keep devices in sync.", ["account_info"]),
        ("Backups are encrypted at rest.", []),
    ],
    "com.ads.mega": [
        ("We collect your advertising ID to cap ad frequency.", ["google_ad_id"]),
        ("The list of installed applications is used for interest segments.", ["app_list"]),
        ("Coarse location helps us serve regional campaigns.", ["location"]),
    ],
    "com.analytics.hub": [
        ("To build session metrics the SDK reads the following:", []),
        ("- network type and connection state", ["network_info"]),
        ("- SIM operator details", ["sim_info"]),
        ("- call state transitions", ["phone_status"]),
        ("- the IMSI for carrier deduplication", ["imsi"]),
        ("- Bluetooth MAC address", ["bluetooth_mac"]),
        ("- external storage paths for cache placement", ["external_storage"]),
    ],
    "com.pay.gateway": [
        ("We collect your telephone number to verify payment requests.", ["telephone_number"]),
        ("Card data never touches SDK code.", []),
    ],
    "com.game.engine": [
        ("The engine reports your advertising ID for attribution.", ["google_ad_id"]),
    ],
    "com.weather.kit": [
        ("Forecasts require your device location.", ["location"]),
        ("We do not build movement profiles.", []),
    ],
    "com.crash.reporter": [
        ("Crash reports include the list of installed applications.", ["app_list"]),
    ],
    "com.video.player": [
        ("Playback telemetry includes your network connection type.", ["network_info"]),
    ],
    "com.chat.relay": [
        ("With your consent we upload your contact list to find friends.", ["contact_list"]),
    ],
    "com.map.embed": [
        ("Map tiles are chosen using your current location.", ["location"]),
    ],
    "com.fit.tracker": [
        ("We process motion sensor data to count steps.", ["misc_sensors"]),
    ],
}

SUPPRESSIONS_YAML = """\
# Manually confirmed false positives; each entry names one vetted flow.
suppressions:
  - sdk_id: com.suppress.net
    source: android.telephony.TelephonyManager.*
    sink: org.apache.http.*
    reason: identifier is salted and truncated before the beacon call
  - sdk_id: com.accounts.sync
    source: android.accounts.*
    sink: java.io.Writer.write(String)
    reason: write lands in the app-private sync journal, not shared storage
"""


def build_demo(ontology, hypotheses) -> Path:
    demo = DATA / "demo"
    (demo / "programs").mkdir(parents=True, exist_ok=True)
    (demo / "policies").mkdir(exist_ok=True)

    programs: dict[str, tuple[str, str]] = {
        "com.alicloud.push": ("3.4.0", ALICLOUD_PF),
        "com.mipush.net": ("5.1.2", MIPUSH_PF),
        "com.baidu.lbs": ("7.8.1", BAIDU_PF),
        "com.suppress.net": ("2.0.6", SUPPRESS_PF),
        "com.accounts.sync": ("1.9.3", ACCOUNTS_PF),
        "com.iot.bridge": ("0.9.14", IOT_PF),
    }
    for sdk, version, stem, src_lines, sink in SMALL_FLOWS:
        programs[sdk] = (version, small_pf(sdk, version, stem, src_lines, sink))
    for sdk, version, stem in INERT:
        programs[sdk] = (version, inert_pf(sdk, version, stem))
    for sdk, version, mix in BULK:
        programs[sdk] = (version, bulk_pf(sdk, version, mix))
    assert len(programs) == 20, len(programs)

    for sdk, (_v, text) in programs.items():
        (demo / "programs" / f"{sdk}.pf").write_text(text, encoding="utf-8")

    records: dict[tuple[str, str], EntailmentScores] = {}
    positives: dict[str, list] = {}
    for h in hypotheses:
        if h.stance is Stance.POSITIVE:
            positives.setdefault(h.data_type, []).append(h)
    for sdk, sentenced in POLICIES.items():
        text = "\n".join(s for s, _t in sentenced) + "\n"
        (demo / "policies" / f"{sdk}.txt").write_text(text, encoding="utf-8")
        premises = segment_policy(text)
        if len(premises) != len(sentenced):
            raise SystemExit(f"{sdk}: segmentation drifted:\n{premises}\nvs\n{sentenced}")
        # bullet markers are stripped during segmentation, so key the
        # records on the premise as segmented, matched by position
        for premise, (_s, types) in zip(premises, sentenced):
            for dt in types:
                for h in positives[dt]:
                    records[(sha(premise), sha(h.text))] = EntailmentScores(0.91, 0.05, 0.04)
    write_score_fixture(
        demo / "scores.jsonl",
        ScoreFixture(records, default=EntailmentScores(0.02, 0.08, 0.90)),
    )

    (demo / "suppressions.yaml").write_text(SUPPRESSIONS_YAML, encoding="utf-8")

    lines = ["corpus: sdkaudit-demo", "entries:"]
    for sdk in sorted(programs):
        version = programs[sdk][0]
        lines.append(f"  - sdk_id: {sdk}")
        lines.append(f'    version: "{version}"')
        lines.append(f"    program: programs/{sdk}.pf")
        if sdk in POLICIES:
            lines.append(f"    policy: policies/{sdk}.txt")
    (demo / "manifest.yaml").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return demo


# -- diff fixture -------------------------------------------------------------------

DIFF_OLD = {
    "com.diff.a": {"imei": 26, "location": 130},
    "com.diff.b": {"serial": 5, "ip_address": 1, "google_ad_id": 84},
    "com.diff.c": {"sms": 50, "wifi_mac": 50},
}
DIFF_NEW = {
    "com.diff.a": {"imei": 9, "location": 36},
    "com.diff.b": {"serial": 8, "ip_address": 10, "google_ad_id": 75},
    "com.diff.c": {"sms": 70, "wifi_mac": 50, "app_list": 53},
}


def diff_report(corpus: str, sdks: dict[str, dict[str, int]]) -> ComplianceReport:
    entries = []
    for sdk in sorted(sdks):
        mix = sdks[sdk]
        n = sum(mix.values())
        entries.append(
            SdkEntry(
                sdk_id=sdk,
                version="1.0",
                has_policy=False,
                collected=sorted(mix),
                exposed=sorted(mix),
                claimed=None,
                stats=TraceStats(
                    total=n,
                    feasible=n,
                    by_channel={"network": n},
                    per_type_feasible=dict(sorted(mix.items())),
                ),
            )
        )
    return ComplianceReport(corpus=corpus, entries=entries)


def build_diff(demo: Path) -> None:
    out = demo / "diff"
    out.mkdir(exist_ok=True)
    old = diff_report("sdkaudit-demo/2024-11", DIFF_OLD)
    new = diff_report("sdkaudit-demo/2025-04", DIFF_NEW)
    assert sum(sum(m.values()) for m in DIFF_OLD.values()) == 346
    assert sum(sum(m.values()) for m in DIFF_NEW.values()) == 311
    (out / "report_old.json").write_text(dumps_report(old), encoding="utf-8")
    (out / "report_new.json").write_text(dumps_report(new), encoding="utf-8")


# -- tuning fixture -----------------------------------------------------------------

# (file stem, sentence, truth types, recorded positive-hypothesis scores)
TUNING = [
    (
        "t0_regulatory",
        "Under applicable law, any collection of device identifiers must be disclosed to the user.",
        [],
        {"device_identifiers": 0.73},
    ),
    ("t1_imei", "We collect your IMEI.", ["imei"], {"imei": 0.95}),
    (
        "t2_location",
        "The SDK reports your approximate location to the host backend.",
        ["location"],
        {"location": 0.88},
    ),
    ("t3_negation", "We do not sell personal data to anyone.", [], {}),
    ("t4_filler", "Diagnostic information helps us improve stability.", [], {}),
]


def build_tuning(hypotheses) -> None:
    out = DATA / "tuning"
    (out / "policies").mkdir(parents=True, exist_ok=True)
    records: dict[tuple[str, str], EntailmentScores] = {}
    lines = ["# threshold calibration corpus: labeled policies plus recorded scores"]
    lines += ["score_fixtures: scores.jsonl", "policies:"]
    for stem, sentence, truth, scored in TUNING:
        (out / "policies" / f"{stem}.txt").write_text(sentence + "\n", encoding="utf-8")
        lines.append(f"  - policy: policies/{stem}.txt")
        if truth:
            lines.append(f"    truth: [{', '.join(truth)}]")
        else:
            lines.append("    truth: []")
        for dt, entail in scored.items():
            first = next(
                h for h in hypotheses if h.data_type == dt and h.stance is Stance.POSITIVE
            )
            records[(sha(sentence), sha(first.text))] = EntailmentScores(entail, 0.05, 0.10)
    write_score_fixture(
        out / "scores.jsonl",
        ScoreFixture(records, default=EntailmentScores(0.02, 0.08, 0.90)),
    )
    (out / "manifest.yaml").write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- metrics fixture ----------------------------------------------------------------

# micro counts back-solved from the target percentages:
#   precision 187/214 = 87.4%, recall 187/204 = 91.7%, F1 89.5%
TP, FP, FN = 187, 27, 17


def build_metrics(ontology) -> None:
    out = DATA / "metrics"
    out.mkdir(parents=True, exist_ok=True)
    types = sorted(t.id for t in ontology.types)
    n = len(types)
    n_sdks = 15
    tp_sizes = [13] * 7 + [12] * 8
    fp_sizes = [2] * 13 + [1] + [0]
    fn_sizes = [2] * 8 + [1] + [0] * 6
    assert sum(tp_sizes) == TP and sum(fp_sizes) == FP and sum(fn_sizes) == FN
    predicted: dict[str, list[str]] = {}
    truth: dict[str, list[str]] = {}
    for i in range(n_sdks):
        base = 13 * i
        tp = [types[(base + j) % n] for j in range(tp_sizes[i])]
        fn = [types[(base + 14 + j) % n] for j in range(fn_sizes[i])]
        fp = [types[(base + 25 + j) % n] for j in range(fp_sizes[i])]
        sdk = f"com.bench.sdk{i:02d}"
        predicted[sdk] = sorted(set(tp) | set(fp))
        truth[sdk] = sorted(set(tp) | set(fn))
        assert len(predicted[sdk]) == tp_sizes[i] + fp_sizes[i]
        assert len(truth[sdk]) == tp_sizes[i] + fn_sizes[i]
    for name, claims in (("predictions.json", predicted), ("truth.json", truth)):
        doc = {"schema": 1, "claims": {k: claims[k] for k in sorted(claims)}}
        (out / name).write_text(
            json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )


# -- self check ---------------------------------------------------------------------


def verify(demo: Path, ontology, catalog) -> None:
    cfg = RunConfig(
        ontology=ontology,
        catalog=catalog,
        scorer=FixtureScorer(read_score_fixture(demo / "scores.jsonl")),
        suppressions=load_suppressions(demo / "suppressions.yaml"),
    )
    report, artifacts = run_corpus(demo / "manifest.yaml", cfg)
    agg = report.aggregates()

    def need(cond, what):
        if not cond:
            raise SystemExit(f"demo corpus drifted: {what}")

    need(agg["n_sdks"] == 20, f"n_sdks={agg['n_sdks']}")
    need(agg["n_with_policy"] == 14, f"n_with_policy={agg['n_with_policy']}")
    t = agg["traces"]
    need(t["total"] == 346, f"total={t['total']}")
    need(t["feasible"] == 338, f"feasible={t['feasible']}")
    need(t["infeasible_guard"] == 1, f"infeasible={t['infeasible_guard']}")
    need(t["suppressed"] == 7, f"suppressed={t['suppressed']}")
    need(agg["by_channel"] == {"network": 332, "system_settings": 6}, f"channels={agg['by_channel']}")
    need(report.warnings == [], f"warnings={report.warnings}")

    by_sdk = {e.sdk_id: e for e in report.entries}
    kinds = {f.kind for e in report.entries for f in e.findings}
    need(kinds == set(FindingKind), f"finding kinds={kinds}")

    ali = by_sdk["com.alicloud.push"]
    keys = {
        ev.split("=", 1)[1]
        for f in ali.findings
        if f.kind is FindingKind.SETTINGS_INJECTION and f.severity is Severity.CRITICAL
        for ev in f.evidence
        if ev.startswith("settings_key=")
    }
    need(keys == {"dxCRMxhQkdGePGnp", "mqBRboGZkQPcAkyk"}, f"alicloud keys={keys}")
    need(
        {f.data_type for f in ali.findings if f.kind is FindingKind.TYPE2_EXCESSIVE_COLLECTION}
        == {"android_id"},
        "alicloud type2",
    )
    need(
        {f.data_type for f in ali.findings if f.kind is FindingKind.TYPE3_OVER_CLAIMING}
        == {"device_identifiers"},
        "alicloud type3",
    )

    baidu_keys = {
        ev.split("=", 1)[1]
        for f in by_sdk["com.baidu.lbs"].findings
        if f.kind is FindingKind.SETTINGS_INJECTION and f.severity is Severity.INFO
        for ev in f.evidence
        if ev.startswith("settings_key=")
    }
    need(baidu_keys == {"com.baidu.uuid", "com.baidu.deviceid.v2"}, f"baidu keys={baidu_keys}")
    need(
        {f.data_type for f in by_sdk["com.baidu.lbs"].findings if f.kind is FindingKind.TYPE3_OVER_CLAIMING}
        == {"ip_address"},
        "baidu type3",
    )

    mi = artifacts["traces"]["com.mipush.net"]
    need(len(mi) == 1 and mi[0]["feasibility"] == Feasibility.INFEASIBLE_GUARD.value, f"mipush={mi}")

    for sdk, _v, mix in BULK:
        need(
            by_sdk[sdk].stats.per_type_feasible == mix,
            f"{sdk} mix={by_sdk[sdk].stats.per_type_feasible}",
        )
    print("demo corpus verified:", json.dumps(t), "policies 14/20")


def main() -> int:
    ontology = load_bundled_ontology()
    catalog = load_bundled_catalog(ontology)
    hypotheses = generate_hypotheses(ontology)
    demo = build_demo(ontology, hypotheses)
    build_diff(demo)
    build_tuning(hypotheses)
    build_metrics(ontology)
    verify(demo, ontology, catalog)
    return 0


if __name__ == "__main__":
    sys.exit(main())
