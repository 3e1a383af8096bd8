import csv
import io
import json

import numpy as np
import pytest

from ginprod.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(out):
    rows = list(csv.reader(io.StringIO("".join(l for l in out.splitlines(True) if not l.startswith("#")))))
    return rows[0], rows[1:]


def test_expected_count_examples(capsys):
    code, out, _ = run(capsys, "expected-count", "--n", "2", "--m", "1")
    assert code == 0
    head, rows = table(out)
    rec = dict(zip(head, rows[0]))
    assert float(rec["exact"]) == pytest.approx(1.414214, abs=1e-6)
    assert float(rec["asymptotic"]) == pytest.approx(1.128379, abs=1e-6)
    assert "# ginprod_version=" in out and "# wall_time_s=" in out and "# config=" in out
    code, out, _ = run(capsys, "expected-count", "--n", "100", "--m", "4")
    assert float(dict(zip(*[table(out)[0], table(out)[1][0]]))["asymptotic"]) == pytest.approx(15.957691, abs=1e-6)


def test_odd_n_usage_error(capsys):
    code, _, err = run(capsys, "expected-count", "--n", "3", "--m", "1")
    assert code == 2 and "N must be even" in err


def test_bad_flags_usage_error(capsys):
    assert run(capsys, "moments", "--n", "four")[0] == 2
    assert run(capsys, "nonsense")[0] == 2


def test_expected_count_with_mc_echoes_seed(capsys):
    code, out, _ = run(capsys, "expected-count", "--n", "4", "--m", "2", "--trials", "300", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and "seed" in doc["metadata"]
    assert doc["columns"][-2:] == ["mc_mean", "mc_stderr"]


def test_moments_table(capsys):
    code, out, _ = run(capsys, "moments", "--n", "10", "--m", "2", "--k-max", "4")
    head, rows = table(out)
    assert head == ["k", "exact", "asymptotic", "limit"]
    assert float(rows[1][1]) == 0.0 and float(rows[3][1]) == 0.0
    assert float(rows[2][3]) == pytest.approx(1 / 5)
    _, out2, _ = run(capsys, "expected-count", "--n", "10", "--m", "2")
    assert float(table(out2)[1][0][2]) == float(rows[0][1])


def test_density(capsys, caplog):
    code, out, _ = run(capsys, "density", "--n", "10", "--m", "2", "--grid=-2:2:201")
    assert code == 0 and "x = 0 removed" in caplog.text
    head, rows = table(out)
    assert head == ["x", "rho_unscaled", "rho_scaled", "h", "h_limit"]
    a = np.array(rows, dtype=float)
    assert 0.0 not in a[:, 0]
    np.testing.assert_allclose(a[:, 2], a[::-1, 2], rtol=1e-10)
    np.testing.assert_allclose(a[:, 4], np.where(np.abs(a[:, 0]) <= 1, np.abs(a[:, 0]) ** -0.5 / 4, 0))
    np.testing.assert_allclose(a[:, 1] * 10, a[:, 2], rtol=1e-14)
    code, out, _ = run(capsys, "density", "--n", "10", "--m", "1", "--grid=-2:2:401")
    a = np.array(table(out)[1], dtype=float)
    assert np.trapezoid(a[:, 3], a[:, 0]) == pytest.approx(1.0, abs=1e-4)


def test_simulate_dumps_and_determinism(capsys, tmp_path):
    args = ["simulate", "--n", "8", "--m", "2", "--trials", "400", "--seed", "9", "--k-max", "2"]
    c1 = tmp_path / "c.csv"
    code, out1, _ = run(capsys, *args, "--dump-counts", str(c1), "--dump-samples", str(tmp_path / "s.csv"))
    assert code == 0 and "# seed=9" in out1
    _, out2, _ = run(capsys, *args, "--workers", "2")
    assert table(out1)[1] == table(out2)[1]
    counts = [int(r[1]) for r in list(csv.reader(open(c1)))[1:]]
    assert len(counts) == 400 and all(c % 2 == 0 for c in counts)


def test_coeff(capsys):
    code, out, _ = run(capsys, "coeff", "--m", "1", "--j", "1", "--k", "1", "--oracle")
    rec = dict(zip(*[table(out)[0], table(out)[1][0]]))
    assert float(rec["a"]) == pytest.approx(1.253314, abs=1e-6)
    assert float(rec["rel_diff"]) <= 1e-8
    code, _, err = run(capsys, "coeff", "--m", "4", "--j", "1", "--k", "1", "--oracle")
    assert code == 4


def test_unsupported_range_exit(capsys):
    assert run(capsys, "moments", "--n", "10", "--m", "6")[0] == 4


def test_cache_and_out_files(capsys, tmp_path):
    cache = tmp_path / "cache.txt"
    out = tmp_path / "m.json"
    code, stdout, _ = run(capsys, "moments", "--n", "6", "--m", "2", "--k-max", "2", "--cache", str(cache),
                          "--format", "json", "--out", str(out))
    assert code == 0 and stdout == ""
    assert cache.read_text().startswith("ginprod-cache v1\n")
    doc = json.loads(out.read_text())
    assert doc["metadata"]["config"]["cache"] == str(cache)


def test_env_and_config_file(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 4\nm = 3\n")
    monkeypatch.setenv("GINPROD_M", "2")
    code, out, _ = run(capsys, "expected-count", "--config", str(cfg))
    rec = dict(zip(*[table(out)[0], table(out)[1][0]]))
    assert (rec["n"], rec["m"]) == ("4", "2")


def test_verify_subset_and_fault_hook(capsys):
    code, out, err = run(capsys, "verify", "--criteria", "2,5,10")
    assert code == 0 and err.count("[PASS]") == 3
    head, rows = table(out)
    assert head[:5] == ["criterion", "name", "measured", "required", "status"]
    code, _, err = run(capsys, "verify", "--criteria", "9", "--inject-a0-factor", "1.05")
    assert code != 0 and "[FAIL]" in err
    assert run(capsys, "verify", "--criteria", "13")[0] == 2
