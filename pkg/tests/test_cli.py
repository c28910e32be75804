import json
import math

import numpy as np
import pytest

from hypiso import io
from hypiso.cli import main
from hypiso.config import parse_config
from hypiso.errors import DomainError


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_dumps_fixed_digits():
    text = io.dumps({"a": 0.1, "b": [1, float("nan")], "c": np.float64(2.0), "d": True})
    data = json.loads(text)
    assert data == {"a": 0.1, "b": [1, None], "c": 2.0, "d": True}
    assert "0.10000000000000001" in text


def test_submanifold_json(disk):
    data = json.loads(io.dumps(io.submanifold_to_dict(disk, per_dim=5)))
    assert data["schema"] == "hypiso-submanifold-v1"
    pts = np.array(data["interior_charts"][0]["points"])
    assert pts.shape == (25, 3) and np.all(np.linalg.norm(pts, axis=1) <= 1 + 1e-15)


def test_config_validation():
    cfg = parse_config({"family": {"kind": "cap", "theta": 0.5}, "seed": 4})
    assert cfg.family.build().kind == "cap" and cfg.optimizer.seed == 4
    for bad in ({"family": {"kind": "torus"}},
                {"family": {"kind": "cap", "theta": 2.0}},
                {"family": {"kind": "mobius-image", "translation": [1.0, 0, 0]}},
                {"measure": {"truncation": 0.0}},
                {"verdicts": {"select": ["Nope"]}},
                {"family": {"colour": 1}},
                {"extra": 1}):
        with pytest.raises(DomainError):
            parse_config(bad)


def test_sweep_theta(tmp_path):
    cfg = write(tmp_path, "[measure]\ntheta_grid = [0.5235987755982988, 1.5707963267948966]\n")
    assert main(["sweep-theta", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    header, rows = io.read_csv(tmp_path / "o" / "sweep.csv")
    assert ",".join(header) == io.SWEEP_HEADER
    assert float(rows[0][1]) == pytest.approx(1.047198, abs=1e-6)
    assert float(rows[0][2]) == pytest.approx(3.141593, abs=1e-6)
    assert rows[0][4] == "n/a" and rows[1][4] == "pass"
    assert abs(float(rows[1][3])) < 1e-8 and abs(float(rows[1][5])) < 1e-8
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["schema"] == "hypiso-report-v1"
    assert (tmp_path / "o" / "timings.json").exists()


def test_monotonicity_command(tmp_path):
    cfg = write(tmp_path, '[family]\nkind = "disk"\n[measure]\ngrid_size = 12\n')
    assert main(["monotonicity", "--config", str(cfg), "--out", str(tmp_path / "m")]) == 0
    header, rows = io.read_csv(tmp_path / "m" / "monotonicity.csv")
    assert header == ["r", "ratio"]
    assert all(abs(float(r[1]) - math.pi) < 1e-8 for r in rows)


def test_mobius_command(tmp_path):
    cfg = write(tmp_path, '[family]\nkind = "disk"\n[optimizer]\nmax_evaluations = 40\n')
    out = tmp_path / "mb"
    assert main(["mobius", "--config", str(cfg), "--out", str(out), "--target", "boundary",
                 "--restarts", "2", "--history"]) == 0
    res = json.loads((out / "mobius.json").read_text())["mobius"]
    assert res["value"] == pytest.approx(2 * math.pi, abs=1e-6)
    header, rows = io.read_csv(out / "mobius_history.csv")
    assert header == ["evaluation", "volume", "best"] and len(rows) == res["evaluations"]


def test_verify_all_deterministic_and_negative_control(tmp_path):
    text = ('seed = 5\n[family]\nkind = "cap"\n[measure]\ngrid_size = 12\nlaplacian_samples = 20\n'
            '[optimizer]\nrestarts = 2\nmax_evaluations = 40\n')
    cfg = write(tmp_path, text)
    assert main(["verify-all", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["verify-all", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "report.json").read_bytes()
    assert a == (tmp_path / "b" / "report.json").read_bytes()
    ids = [v["theorem_id"] for v in json.loads(a)["verdicts"]]
    assert len(ids) == 9
    bad = write(tmp_path, text + '[verdicts]\nselect = ["Monotonicity"]\ncorrupt_curve = true\n', "bad.toml")
    assert main(["verify-all", "--config", str(bad), "--out", str(tmp_path / "c")]) == 1


def test_error_exit_code(tmp_path, capsys):
    assert main(["verify-all", "--truncation", "2.0", "--out", str(tmp_path / "e")]) == 2
    assert "truncation" in capsys.readouterr().err
    missing = tmp_path / "nope.toml"
    assert main(["monotonicity", "--config", str(missing), "--out", str(tmp_path / "e")]) == 2
