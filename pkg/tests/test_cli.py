"""Command-line contract: exit codes, report schema, CSV format and determinism."""
import csv
import io
import json
import subprocess
import sys

import pytest

from specialkahler import cli
from specialkahler.cli import ConfigError, RunConfig, main, run
from specialkahler.errors import NumericalError

FAST = ["verify-ricci", "verify-kahler", "holonomy", "gh-curl", "fixed-points", "admissible-p", "moduli-dims",
        "g2-algebra", "g2-torsion"]


@pytest.mark.parametrize("suite", FAST)
def test_suite_exits_zero_with_schema(suite_run, suite):
    code, rep, out = suite_run(suite)
    assert code == 0
    doc = json.loads((out / f"{suite}.json").read_text())
    assert {"suite", "config", "checks", "pass", "seed"} <= set(doc)
    assert doc["suite"] == suite and doc["pass"] is True and doc["seed"] == 0
    for c in doc["checks"]:
        assert set(c) == {"name", "value", "tol", "pass"}
    meta = json.loads((out / f"{suite}.run.json").read_text())
    assert meta["seconds"] >= 0 and "numpy" in meta["versions"]


def test_moduli_dims_reports_58_twice(suite_run):
    _, rep, _ = suite_run("moduli-dims")
    assert rep.check("page_total").value == 58
    assert rep.check("z3_total").value == 58


def test_admissible_orders_up_to_twelve(suite_run):
    _, rep, _ = suite_run("admissible-p", max_order=12)
    assert rep.extra["orders"] == [3, 4, 6]


@pytest.mark.parametrize("argv", [
    ["gh-compare", "--t", "0.1"],
    ["gluing-scan", "--t", "0.1,0.05"],
    ["g2-torsion", "--t", "0.05,0.1,0.025"],
    ["verify-ricci", "--k", "2", "--l", "4"],
    ["verify-ricci", "--tol", "-1"],
    ["verify-ricci", "--grid", "1"],
    ["no-such-suite"],
    ["verify-ricci", "--k", "one"],
])
def test_bad_configuration_exits_two(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == 2
    assert not list(tmp_path.iterdir())


def test_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"k": 2, "l": 3, "max_order": 6}))
    args = cli.build_parser().parse_args(["admissible-p", "--config", str(path), "--max", "8"])
    cfg = cli.load_config(args)
    assert (cfg.k, cfg.l, cfg.max_order) == (2, 3, 8)


@pytest.mark.parametrize("content", ['{"grdi": 3}', "not json", "[1, 2]"])
def test_bad_config_file_exits_two(tmp_path, content):
    path = tmp_path / "cfg.json"
    path.write_text(content)
    assert main(["fixed-points", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_validate_rejects_repeated_t():
    with pytest.raises(ConfigError):
        RunConfig("gluing-scan", t=(0.1, 0.1, 0.05)).validate()
    RunConfig("verify-ricci", t=(0.1,)).validate()  # t only matters for slope suites


def test_numerical_failure_exits_three(monkeypatch, tmp_path):
    def boom(cfg):
        raise NumericalError("synthetic")
    monkeypatch.setitem(cli.RUNNERS, "fixed-points", boom)
    code, rep = run(RunConfig("fixed-points", out=str(tmp_path)).validate())
    assert code == 3 and rep is None


def test_failed_check_exits_one(tmp_path):
    # a tolerance below the finite-difference floor cannot be met
    assert main(["verify-ricci", "--k", "1", "--l", "2", "--grid", "4", "--tol", "1e-15",
                 "--out", str(tmp_path)]) == 1


def test_reruns_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert main(["g2-torsion", "--out", str(tmp_path / d)]) == 0
    for name in ("g2-torsion.json", "g2-torsion.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_csv_format(suite_run):
    _, _, out = suite_run("g2-torsion")
    raw = (out / "g2-torsion.csv").read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    rows = list(csv.reader(io.StringIO(raw.decode())))
    assert rows[0] == ["t", "sup_norm", "l2_norm", "slope", "residual"]
    assert len(rows) == 4
    # 17 significant digits survive a round trip exactly
    for cell in rows[1][1:]:
        assert repr(float(cell)) == repr(float(f"{float(cell):.17g}"))
        assert len(cell.lstrip("-").replace(".", "").split("e")[0].lstrip("0")) == 17


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "specialkahler", "admissible-p", "--max", "12",
                           "--out", str(tmp_path)], capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "PASS" in proc.stdout
