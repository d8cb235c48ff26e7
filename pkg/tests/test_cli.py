from __future__ import annotations

import json
import shutil
from pathlib import Path

import pytest

from pyphitau.cli import ConfigError, canonical, main, run_config, run_suite

ROOT = Path(__file__).resolve().parent.parent
MANIFEST = ROOT / "goldens" / "manifest.json"


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_op_identity_psi_phi_passes(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {"params": {"identities": ["psi-phi"], "samples": 5}})
    code, out, _ = run(["op-identity", "--config", cfg], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "pass"
    assert {c["name"] for c in rep["checks"]} == {
        "psi-phi/integral", "psi-phi/rational", "psi-phi/twovar"}


def test_cocycle_verify_reports_counterexample(capsys):
    code, out, _ = run(["cocycle-verify", "--config", ROOT / "configs" / "cocycle_verify.json"],
                       capsys)
    rep = json.loads(out)
    assert code == 1
    st = {c["name"]: c["status"] for c in rep["checks"]}
    for a in range(3):
        assert st[f"naive-cocycle({a},1)"] == "pass"
        assert st[f"tau0-membership({a},1)"] == "fail"
        assert st[f"coboundary({a},1)"] == "pass"
    failing = [c for c in rep["checks"] if c["status"] == "fail"]
    assert all("witness" in c for c in failing)


def test_bk_xi_matches_lambda_golden(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(["bk-xi", "--config", ROOT / "configs" / "bk_xi.json", "--out", out], capsys)
    assert code == 0
    golden = (ROOT / "goldens" / "bk_xi.golden.json").read_text()
    assert out.read_text() == golden
    rep = json.loads(golden)
    assert {c["name"]: c["status"] for c in rep["checks"]}["xi-equals-lambda"] == "pass"


def test_reports_are_deterministic_and_float_free(tmp_path):
    conf = json.loads((ROOT / "configs" / "op_identity.json").read_text())
    a, b = canonical(run_config(conf)), canonical(run_config(conf))
    assert a == b
    assert "." not in "".join(ch for ch in a if not ch.isalpha())  # no floats
    c = canonical(run_config(conf, seed=99))
    assert json.loads(c)["seed"] == 99


def test_precision_trouble_is_inconclusive(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {"params": {"bk": {"A": [[{"0": -3, "1": 1}]],
                                                        "working_r": 5}}})
    code, out, _ = run(["bk-xi", "--config", cfg], capsys)
    assert code == 2
    assert json.loads(out)["status"] == "inconclusive-precision"


def test_parse_error_reports_line_and_column(tmp_path, capsys):
    cfg = write(tmp_path, "bad.json", '{\n  "params": {,}\n}')
    code, _, err = run(["ring-eval", "--config", cfg], capsys)
    assert code == 3
    assert "line 2, column 14" in err


@pytest.mark.parametrize("conf,field", [
    ({"prime": {"p": 4}}, "prime"),
    ({"windows": {"u": [3, -3]}}, "windows.u"),
    ({"windows": {"eta": 0}}, "windows.eta"),
    ({"params": {}}, "params.series"),
    ({"params": {"series": {"terms": {"0": 1}}, "ops": ["frobnicate"]}}, "params.ops"),
])
def test_validation_errors_name_the_field(tmp_path, capsys, conf, field):
    cfg = write(tmp_path, "c.json", conf)
    code, _, err = run(["ring-eval", "--config", cfg], capsys)
    assert code == 3 and field in err


def test_usage_errors_exit_3(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-verb", "--config", "x"])
    assert exc.value.code == 3
    with pytest.raises(SystemExit) as exc:
        main(["kernel"])
    assert exc.value.code == 3
    code, _, _ = run(["kernel", "--config", tmp_path / "missing.json"], capsys)
    assert code == 3


def test_run_config_rejects_unknown_command():
    with pytest.raises(ConfigError):
        run_config({"command": "nope"})


# -- suite ---------------------------------------------------------------------------------

def test_empty_manifest_passes(tmp_path):
    m = write(tmp_path, "m.json", {"entries": []})
    rep = run_suite(m)
    assert rep["status"] == "pass" and rep["checks"] == 0


def test_full_manifest_passes():
    rep = run_suite(MANIFEST)
    assert rep["status"] == "pass", [e for e in rep["entries"] if e["status"] != "pass"]
    assert all(e["golden"] == "match" for e in rep["entries"])


@pytest.fixture
def sandbox(tmp_path):
    shutil.copytree(ROOT / "configs", tmp_path / "configs")
    shutil.copytree(ROOT / "goldens", tmp_path / "goldens")
    return tmp_path / "goldens" / "manifest.json"


def test_tampered_golden_fails_with_diff(sandbox):
    g = sandbox.parent / "ring_eval.golden.json"
    g.write_text(g.read_text().replace('"pass"', '"fail"', 1))
    rep = run_suite(sandbox)
    row = next(e for e in rep["entries"] if e["name"] == "ring_eval")
    assert rep["status"] == "fail" and row["status"] == "fail"
    assert "digest" in row["golden"]


def test_changed_output_fails_with_diff(sandbox):
    manifest = json.loads(sandbox.read_text())
    for e in manifest["entries"]:
        e.pop("digest", None)
    sandbox.write_text(json.dumps(manifest))
    g = sandbox.parent / "ring_eval.golden.json"
    g.write_text(g.read_text().replace('"pass"', '"fail"', 1))
    rep = run_suite(sandbox)
    row = next(e for e in rep["entries"] if e["name"] == "ring_eval")
    assert row["golden"] == "mismatch" and any(line.startswith("+") for line in row["diff"])


def test_missing_golden_needs_flag(sandbox, capsys):
    (sandbox.parent / "kernel.golden.json").unlink()
    code, out, _ = run(["suite", "--config", sandbox], capsys)
    assert code == 1 and "new-baseline" in out
    code, out, _ = run(["suite", "--config", sandbox, "--accept-baselines"], capsys)
    assert code == 0 and "new-baseline accepted" in out
    code, _, _ = run(["suite", "--config", sandbox], capsys)
    assert code == 0
