import json
from pathlib import Path

import pytest

from bakerweyl.cli import main
from bakerweyl.config import ExperimentConfig
from bakerweyl.errors import ConfigError
from bakerweyl.experiments import verify_manifest

ROOT = Path(__file__).resolve().parent.parent
EXAMPLE = ROOT / "configs" / "example.conf"
GOLDEN = Path(__file__).resolve().parent / "golden"


def write(tmp_path, text, name="run.conf"):
    path = tmp_path / name
    path.write_text(text)
    return path


def manifest(out):
    return json.loads((Path(out) / "manifest.json").read_text(encoding="utf-8"))


def test_config_parsing():
    cfg = ExperimentConfig.from_text("M = 3\nletters = 2, 0  # comment\nk = 2..4, 6\nbeta = fekete\n")
    assert cfg.letters == [0, 2] and cfg.k == [2, 3, 4, 6] and cfg.beta == "fekete"
    again = ExperimentConfig.from_text(cfg.resolved_text())
    assert again.resolved_text() == cfg.resolved_text()
    assert again.digest() == cfg.digest()


@pytest.mark.parametrize("text", [
    "letters = 0",
    "M = 3\nletters = 0, 2\ncolour = red",
    "M = 3\nletters = 0, 2\nM = 4",
    "M = 3\nletters = 0, 5",
    "M = 3\nletters = 0, 2\nrho = 1.5",
    "M = 3\nletters = 0, 2\nk = two",
    "M = 3\nletters = 0, 2\nchecks = tk, magic",
    "M = 3\nletters = 0, 2\ncutoff = smooth-bump\na = 0.05",
    "M = 3 letters = 0, 2",
])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text(text)


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["fup", "--config", str(tmp_path / "missing.conf")]) == 2
    bad = write(tmp_path, "M = 3\nletters = 0, 2\nbogus = 1\n")
    assert main(["theory", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_unitary_spectrum(tmp_path):
    cfg = write(tmp_path, "M = 2\nletters = 0, 1\ncutoff = indicator-one\nk = 2..4\n")
    out = tmp_path / "out"
    assert main(["spectrum", "--config", str(cfg), "--out", str(out), "--jobs", "2"]) == 0
    rows = (out / "spectrum_k4.csv").read_text().splitlines()[2:]
    assert len(rows) == 16
    assert all(abs(float(r.split(",")[4]) - 1) < 1e-8 for r in rows)
    assert verify_manifest(out) == []


def test_empty_depth_range_writes_manifest_only(tmp_path):
    cfg = write(tmp_path, "M = 3\nletters = 0, 2\n")
    out = tmp_path / "out"
    assert main(["spectrum", "--config", str(cfg), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["config.resolved", "manifest.json"]
    assert manifest(out)["tasks"] == []


def test_manifest_detects_tampering(tmp_path):
    out = tmp_path / "out"
    assert main(["energy", "--config", str(EXAMPLE), "--out", str(out)]) == 0
    m = manifest(out)
    assert m["command"] == "energy" and m["config_hash"] == ExperimentConfig.from_file(EXAMPLE).digest()
    assert {f["path"] for f in m["files"]} == {"config.resolved", "energy.csv", "gamma_fit.json"}
    (out / "energy.csv").write_text("tampered\n")
    assert verify_manifest(out) == ["energy.csv"]


def test_fup_middle_thirds_all_hold(tmp_path):
    cfg = write(tmp_path, "M = 3\nletters = 0, 2\nk = 1..6\n")
    out = tmp_path / "out"
    assert main(["fup", "--config", str(cfg), "--out", str(out)]) == 0
    lines = [json.loads(s) for s in (out / "fup_report.jsonl").read_text(encoding="utf-8").splitlines()]
    assert {d["check"] for d in lines} >= {"tk", "tk_vs_rk", "trace_identity", "lemma41", "lemma42",
                                           "prop43", "prop44", "fekete"}
    assert all(d["holds"] is True for d in lines)


@pytest.mark.parametrize("letters, delta", [("0, 1, 2", "1"), ("1", "0")])
def test_fup_rejections(tmp_path, letters, delta):
    cfg = write(tmp_path, f"M = 3\nletters = {letters}\nk = 2\nchecks = prop43, fekete, lemma42\n")
    out = tmp_path / "out"
    assert main(["fup", "--config", str(cfg), "--out", str(out)]) == 0
    lines = [json.loads(s) for s in (out / "fup_report.jsonl").read_text(encoding="utf-8").splitlines()]
    rejected = [d for d in lines if d["check"] in ("prop43", "fekete")]
    assert rejected and all(d["status"] == f"rejected: δ={delta}" for d in rejected)
    assert {t["status"] for t in manifest(out)["tasks"]} == {"ok", "rejected"}


def test_violation_gives_exit_one(tmp_path):
    # the constant 16 is too small for isolated points with rho close to 1
    cfg = write(tmp_path, "M = 3\nletters = 1\nk = 2\nrho = 0.8\nchecks = lemma41\n")
    out = tmp_path / "out"
    assert main(["fup", "--config", str(cfg), "--out", str(out)]) == 1
    assert manifest(out)["tasks"][0]["status"] == "violated"


def test_count_and_theory(tmp_path):
    out = tmp_path / "out"
    assert main(["count", "--config", str(EXAMPLE), "--out", str(out)]) == 0
    curve = (out / "counting_curve.csv").read_text().splitlines()
    assert curve[1] == "k,N,nu,count" and len(curve) == 2 + 4 * 3
    statuses = {t["name"]: t["status"] for t in manifest(out)["tasks"]}
    assert statuses["fit nu=0.5"] == "skipped"  # no eigenvalue reaches 3**-0.5
    assert main(["theory", "--config", str(EXAMPLE), "--out", str(out)]) == 0
    theory = (out / "theory.csv").read_text().splitlines()
    assert theory[1] == "nu,m_thm11,c_thm12,m_thm13" and len(theory) == 2 + 101


def test_theory_without_proper_alphabet_fails(tmp_path):
    cfg = write(tmp_path, "M = 3\nletters = 0, 1, 2\nbeta_bd = 0.1\n")
    assert main(["theory", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_example_matches_golden(tmp_path):
    out = tmp_path / "out"
    assert main(["spectrum", "--config", str(EXAMPLE), "--out", str(out)]) == 0
    golden = sorted(GOLDEN.glob("spectrum_k*.csv"))
    assert len(golden) == 4
    for path in golden:
        assert (out / path.name).read_bytes() == path.read_bytes(), path.name
