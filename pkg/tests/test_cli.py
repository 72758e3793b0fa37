import json
from pathlib import Path

import pytest

from cqd.cli import main
from cqd.report import TIMING_MARKER

GOLDEN = Path(__file__).parent / "golden"
THREE = "KQvK,KRvK,KBvK,KNvK,KPvK"


@pytest.fixture(scope="module")
def tb(tmp_path_factory):
    out = tmp_path_factory.mktemp("tb")
    assert main(["chain", "--targets", THREE, "--out", str(out)]) == 0
    return out


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_chain_summary(tb, capsys, tmp_path):
    for f in tb.glob("*"):
        (tmp_path / f.name).write_bytes(f.read_bytes())
    code, out, _ = run(capsys, "chain", "--targets", "KQvK", "--out", str(tmp_path), "--resume")
    assert code == 0
    lines = out.splitlines()
    assert [ln.split("\t")[0] for ln in lines] == ["KvK", "KQvK"]
    assert all("verified=True" in ln for ln in lines)


def test_verify_json_schema_matches_golden(tb, capsys):
    schema = json.loads((GOLDEN / "report_schema.json").read_text())
    for mode in ("decomposed", "full", "quiet-only"):
        code, out, _ = run(capsys, "verify", "KQvK", "--mode", mode, "--tb", str(tb))
        assert code == 0
        r = json.loads(out)
        assert sorted(r) == schema["VerificationReport"]
        assert sorted(r["violations"]) == schema["VerificationReport.violations"]
        assert sorted(r["fractions"]) == schema["VerificationReport.fractions"]
        assert sorted(r["position_counts"]) == schema["VerificationReport.position_counts"]
        assert r["mode"] == mode and r["violations"]["total_v"] == 0


def test_manifest_schema_matches_golden(tb):
    schema = json.loads((GOLDEN / "report_schema.json").read_text())
    m = json.loads((tb / "manifest.json").read_text())
    assert sorted(m) == schema["ChainManifest"]
    e = m["entries"][1]
    assert sorted(e) == schema["ManifestEntry"]
    assert sorted(e["generation_stats"]) == schema["GenerationStats"]
    assert sorted(e["verification_reports"]) == schema["verification_modes"]


def test_gen_prints_stats(tb, capsys, tmp_path):
    for f in tb.glob("*.cqdt"):
        (tmp_path / f.name).write_bytes(f.read_bytes())
    (tmp_path / "KQvK.cqdt").unlink()
    code, out, _ = run(capsys, "gen", "KQvK", "--tb", str(tmp_path))
    assert code == 0
    st = json.loads(out)
    assert st["signature"] == "KQvK" and st["passes"] == 20
    assert (tmp_path / "KQvK.cqdt").read_bytes() == (tb / "KQvK.cqdt").read_bytes()


def test_mutate_then_verify_exits_one_with_equal_totals(tb, capsys, tmp_path):
    mutant = tmp_path / "m.cqdt"
    code, out, _ = run(capsys, "mutate", "KQvK", "--flips", "5", "--seed", "42",
                       "--tb", str(tb), "--out", str(mutant))
    assert code == 0 and len(json.loads(out)["indices"]) == 5
    totals = []
    for mode in ("decomposed", "full"):
        code, out, _ = run(capsys, "verify", "KQvK", "--mode", mode, "--tb", str(tb),
                           "--table", str(mutant))
        assert code == 1
        totals.append(json.loads(out)["violations"]["total_v"])
    assert totals[0] == totals[1] >= 1


def test_alldraw(tb, capsys, tmp_path):
    out_file = tmp_path / "ad.cqdt"
    assert run(capsys, "alldraw", "KPvK", "--fix-terminals", "--out", str(out_file))[0] == 0
    code, out, _ = run(capsys, "verify", "KPvK", "--tb", str(tb), "--table", str(out_file))
    assert code == 1 and json.loads(out)["violations"]["capture_v"] > 0
    assert run(capsys, "alldraw", "KvK", "--out", str(out_file))[0] == 0
    assert run(capsys, "verify", "KvK", "--tb", str(tb), "--table", str(out_file))[0] == 0


def test_stats_golden_and_stable(tb, capsys):
    outs = [run(capsys, "stats", "--tb", str(tb))[1] for _ in range(2)]
    fixed = [o.split(TIMING_MARKER)[0] for o in outs]
    assert fixed[0] == fixed[1]
    assert fixed[0].rstrip("\n") == (GOLDEN / "stats_3piece.md").read_text().rstrip("\n")
    assert TIMING_MARKER in outs[0]


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_stats_other_formats(tb, capsys, fmt):
    code, out, _ = run(capsys, "stats", "--tb", str(tb), "--format", fmt)
    assert code == 0
    fixed = out.split(TIMING_MARKER)[0]
    if fmt == "json":
        d = json.loads(fixed)
        assert [r["endgame"] for r in d["endgames"]][:2] == ["KvK", "KQvK"]
    else:
        assert "endgame,pieces,valid" in fixed


def test_report_writes_figures(tb, capsys, tmp_path):
    code, out, _ = run(capsys, "report", "--tb", str(tb), "--format", "markdown",
                       "--figures", str(tmp_path))
    assert code == 0
    for name in ("category_fractions.png", "timings.png"):
        p = tmp_path / name
        assert p.exists() and p.read_bytes()[:4] == b"\x89PNG"
        assert str(p) in out
    assert "| KQvK |" in out


def test_env_default_tb(tb, capsys, monkeypatch):
    monkeypatch.setenv("CQD_TB_DIR", str(tb))
    assert run(capsys, "verify", "KRvK")[0] == 0


def test_usage_errors(tb, capsys, tmp_path, monkeypatch):
    monkeypatch.delenv("CQD_TB_DIR", raising=False)
    assert run(capsys, "verify", "KQvK")[0] == 2
    code, _, err = run(capsys, "verify", "KXvK", "--tb", str(tb))
    assert code == 2 and "malformed" in err
    assert run(capsys, "verify", "KQvKR", "--tb", str(tb))[0] == 2          # no table
    assert run(capsys, "gen", "KQvKR", "--tb", str(tmp_path))[0] == 2       # no sub-models
    assert run(capsys, "chain", "--targets", "KQRvKR", "--out", str(tmp_path))[0] == 2
    assert run(capsys, "chain", "--targets", "KPvKP", "--out", str(tmp_path))[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["verify", "KQvK", "--mode", "both"])
    assert e.value.code == 2
