"""Campaign configuration, CSV I/O, gate tables, threshold, overhead."""

import math

import pytest

from surfgkp import experiments as xp
from surfgkp.gkp import GkpParams


def test_config_file_roundtrip(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# campaign settings\n"
        "d = 3,5\n"
        "sigma-db = 9.5,10.0   # grid\n"
        "lambda = 1.1\n"
        "shots = 5000\n"
        "seed = 99\n"
        "weights = none\n"
    )
    cfg = xp.config_from_mapping(xp.parse_config_file(str(path)), command="logical-curve")
    assert cfg.d == (3, 5)
    assert cfg.sigma_db == (9.5, 10.0)
    assert cfg.lam == 1.1
    assert cfg.shots == 5000
    assert cfg.seed == 99
    assert not cfg.analog


def test_config_validation():
    with pytest.raises(ValueError):
        xp.config_from_mapping({"d": "4"})
    with pytest.raises(ValueError):
        xp.config_from_mapping({"sigma_db": "25"})
    with pytest.raises(ValueError):
        xp.config_from_mapping({"decoder": "magic"})
    with pytest.raises(ValueError):
        xp.config_from_mapping({"shots": "0"})
    with pytest.raises(ValueError):
        xp.config_from_mapping({"frobnicate": "1"})


def test_gate_failure_rate_deterministic_and_stderr():
    params = GkpParams(11.0, 1.0)
    p1, se1 = xp.gate_failure_rate("cnot", params, "ml", 40_000, seed=7)
    p2, se2 = xp.gate_failure_rate("cnot", params, "ml", 40_000, seed=7)
    assert p1 == p2 and se1 == se2
    assert se1 == pytest.approx(math.sqrt(p1 * (1 - p1) / 40_000))


def test_stderr_shrinks_with_shots():
    params = GkpParams(10.0, 1.0)
    _, se_small = xp.gate_failure_rate("cnot", params, "ml", 20_000, seed=3)
    _, se_big = xp.gate_failure_rate("cnot", params, "ml", 80_000, seed=3)
    assert se_big == pytest.approx(se_small / 2, rel=0.2)


def test_gate_pauli_table_sums_to_one():
    table = xp.gate_pauli_table("cz", GkpParams(10.0, 1.2), "ml", 30_000, seed=5)
    assert sum(table.values()) == pytest.approx(1.0, abs=1e-12)
    assert table["II"] > 0.9


def test_cmd_cnot_table_rows():
    cfg = xp.config_from_mapping(
        {"sigma_db": "12", "shots": "200000", "seed": "1"}, command="cnot-table"
    )
    rows = xp.cmd_cnot_table(cfg)
    assert [r["decoder"] for r in rows] == ["ml", "closest"]
    ml, closest = rows
    assert ml["failure_rate"] < closest["failure_rate"]
    assert ml["failure_rate"] == pytest.approx(3.61e-3, rel=0.2)


def test_find_crossing():
    grid = [9.0, 9.5, 10.0, 10.5]
    a = [1e-1, 3e-2, 1e-2, 3e-3]
    b = [2e-1, 4e-2, 8e-3, 1e-3]  # steeper: crosses between 9.5 and 10
    est, bracket = xp.find_crossing(grid, a, b)
    assert bracket == (9.5, 10.0)
    assert 9.5 < est < 10.0
    assert xp.find_crossing(grid, a, a[:]) == (9.0, (9.0, 9.5))
    assert xp.find_crossing(grid, a, [x * 2 for x in a]) is None


def test_overhead_table3_rows():
    for p, d_want, q_want in ((6.71e-3, 69, 9521), (3.61e-3, 27, 1457), (1.82e-3, 17, 577)):
        row = xp.standard_surface_overhead(p, 1e-7)
        assert row["achievable"]
        assert row["d_min"] == d_want
        assert row["qubits"] == q_want
        assert row["p_l"] < 1e-7
    gkp = xp.surface_gkp_overhead(7)
    assert gkp["modes"] == 291 and gkp["qubits"] == 97
    assert not xp.standard_surface_overhead(1.2e-2)["achievable"]


def test_overhead_pl_values_match_published():
    assert xp.standard_surface_overhead(3.61e-3)["p_l"] == pytest.approx(6.38e-8, rel=0.01)
    assert xp.standard_surface_overhead(1.82e-3)["p_l"] == pytest.approx(2.19e-8, rel=0.01)
    assert xp.standard_surface_overhead(6.71e-3)["p_l"] == pytest.approx(8.62e-8, rel=0.01)


def test_gkp_d_from_curve():
    rows = [
        {"d": 3, "sigma_db": 12.0, "logical_z_rate": 1e-4},
        {"d": 5, "sigma_db": 12.0, "logical_z_rate": 1e-6},
        {"d": 7, "sigma_db": 12.0, "logical_z_rate": 1e-8},
    ]
    assert xp.gkp_d_from_curve(rows, 12.0, 1e-7) == 7
    assert xp.gkp_d_from_curve(rows, 12.0, 1e-9) is None


def test_csv_roundtrip_and_reproducibility(tmp_path):
    rows = [
        {"d": 3, "sigma_db": 10.0, "rate": 1.25e-3, "note": "x"},
        {"d": 5, "sigma_db": 10.5, "rate": 3e-4, "note": "y"},
    ]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    xp.write_csv(p1, rows, {"seed": 1, "shots": 10})
    xp.write_csv(p2, rows, {"seed": 1, "shots": 10})
    body1 = p1.read_text().splitlines()
    body2 = p2.read_text().splitlines()
    assert body1[0].startswith("# timestamp=")
    assert body1[1:] == body2[1:]  # byte-identical below the timestamp
    back = xp.read_csv_rows(p1)
    assert back[0]["d"] == 3 and back[0]["rate"] == pytest.approx(1.25e-3)
    assert back[1]["note"] == "y"


def test_logical_curve_smoke():
    cfg = xp.config_from_mapping(
        {"d": "3", "sigma_db": "9.5", "shots": "4096", "seed": "2", "weights": "none"},
        command="logical-curve",
    )
    rows = xp.cmd_logical_curve(cfg)
    assert len(rows) == 1
    row = rows[0]
    assert row["shots"] == 4096
    assert 0 < row["logical_z_rate"] < 0.5
    assert row["stderr_z"] > 0


def test_cli_entrypoints(tmp_path, capsys):
    from surfgkp.cli import main

    out = tmp_path / "t.csv"
    rc = main([
        "cnot-table", "--sigma-db", "11", "--shots", "20000", "--seed", "4",
        "--out", str(out),
    ])
    assert rc == 0
    rows = xp.read_csv_rows(out)
    assert {r["decoder"] for r in rows} == {"ml", "closest"}

    rc = main(["overhead", "--p", "3.61e-3", "--gkp-d", "7"])
    assert rc == 0
    captured = capsys.readouterr().out
    assert "1457" in captured and "291" in captured

    rc = main(["cnot-table", "--sigma-db", "44", "--shots", "10"])
    assert rc == 1  # out-of-range config reports an error

    with pytest.raises(SystemExit) as exc:
        main(["bogus-command"])
    assert exc.value.code == 2


def test_cli_help_documents_csv_columns():
    from surfgkp.cli import build_parser

    parser = build_parser()
    txt = parser.format_help()
    assert "cnot-table" in txt and "logical-curve" in txt
    assert "threshold" in txt and "overhead" in txt


def test_cli_subcommand_help_documents_columns(capsys):
    from surfgkp.cli import build_parser

    parser = build_parser()
    with pytest.raises(SystemExit):
        parser.parse_args(["cnot-table", "--help"])
    txt = capsys.readouterr().out
    assert "failure_rate" in txt and "stderr" in txt
    with pytest.raises(SystemExit):
        parser.parse_args(["logical-curve", "--help"])
    txt = capsys.readouterr().out
    assert "logical_z_rate" in txt and "stderr_x" in txt


def test_cli_threshold_and_curve(tmp_path, capsys):
    from surfgkp.cli import main

    out = tmp_path / "curve.csv"
    rc = main([
        "logical-curve", "--d", "3", "--sigma-db", "9.5", "--weights", "none",
        "--shots", "4096", "--seed", "3", "--rel-se", "0", "--out", str(out),
    ])
    assert rc == 0
    rows = xp.read_csv_rows(out)
    assert rows[0]["d"] == 3 and rows[0]["shots"] == 4096

    rc = main([
        "threshold", "--d", "3,5", "--sigma-db", "9.0,9.5", "--weights", "none",
        "--shots", "4096", "--seed", "3", "--rel-se", "0",
    ])
    assert rc == 0
    err = capsys.readouterr().err
    assert "crossing" in err or "no crossing" in err
