import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

from tdcfie.cli import PRESETS, main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_presets_listed(capsys):
    code, out, _ = run(["presets"], capsys)
    rows = table(out)
    assert code == 0
    assert {r["name"] for r in rows} == set(PRESETS)
    a0 = next(r for r in rows if r["name"] == "fig-a0b0-osc")
    assert (float(a0["alpha"]), float(a0["beta"]), a0["signal"], a0["dt"]) == (0.0, 0.0, "osc", "97/12800")


@pytest.mark.parametrize("name", ["fig-a0b0-osc", "fig-a1bh-nonosc"])
def test_preset_runs(name, capsys):
    code, out, _ = run(["solve", "--preset", name], capsys)
    rows = table(out)
    dt = float(eval(PRESETS[name][3]))  # noqa: S307 - literal fraction
    assert code == 0
    assert float(rows[1]["t"]) == pytest.approx(dt, rel=1e-15)
    assert float(rows[-1]["t"]) >= 10.0
    assert all(math.isfinite(float(r["mu"])) for r in rows)


def test_solve_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["solve", "--preset", "fig-a1b0-nonosc", "--residual", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0]
    assert header == "t,mu,g,residual"


def test_full_precision_output(capsys):
    _, out, _ = run(["solve", "--alpha", "1", "--beta", "1", "--dt", "1/7", "--t-end", "2"], capsys)
    t1 = table(out)[1]["t"]
    assert float(t1) == 1 / 7 and len(t1.replace("0.", "")) >= 16


def test_empty_signal_gives_zeros(capsys):
    code, out, _ = run(["solve", "--signal", "none", "--n", "2", "--t-end", "3"], capsys)
    assert code == 0
    assert all(float(r["mu"]) == 0.0 for r in table(out))


def test_residual_column(capsys):
    _, out, _ = run(["solve", "--preset", "fig-a1bh-nonosc", "--residual"], capsys)
    rows = table(out)
    early = [r["residual"] for r in rows if float(r["t"]) < 2]
    late = np.array([float(r["residual"]) for r in rows if float(r["t"]) >= 2])
    assert all(v == "nan" for v in early)
    assert np.max(np.abs(late)) < 1e-7


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# mode 1\nn = 1\nalpha = 0.5\nbeta=0.5\nt_end = 3  # short\nsignal = nonosc\n")
    _, from_file, _ = run(["solve", "--config", str(cfg)], capsys)
    _, from_flags, _ = run(["solve", "--n", "1", "--alpha", "0.5", "--beta", "0.5", "--t-end", "3"], capsys)
    assert from_file == from_flags
    _, overridden, _ = run(["solve", "--config", str(cfg), "--alpha", "1", "--beta", "1", "--n", "0"], capsys)
    rows = table(overridden)
    assert all(float(r["mu"]) == pytest.approx(float(r["g"]), abs=1e-12) for r in rows)


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--preset", "no-such-preset"],
        ["solve", "--dt", "0"],
        ["solve", "--dt", "abc"],
        ["solve", "--dt", "3", "--t-end", "10"],
        ["solve", "--alpha", "-1"],
        ["convergence", "--levels", "2"],
        ["asymptotics", "--surface", "sphere", "--axes", "x"],
    ],
)
def test_config_errors_exit_2(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2 and out == "" and err.startswith("error:")


def test_bad_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("gamma = 1\n")
    assert run(["solve", "--config", str(cfg)], capsys)[0] == 2
    assert run(["solve", "--config", str(tmp_path / "missing.cfg")], capsys)[0] == 2


def test_numerical_failure_exit_3(capsys):
    code, _, err = run(["asymptotics", "--ppw", "5", "--k", "10"], capsys)
    assert code == 3 and "per wavelength" in err


def test_convergence_series_reference(capsys):
    code, out, _ = run(["convergence", "--alpha", "1", "--beta", "0.5", "--dt", "1/50", "--levels", "4"], capsys)
    rows = table(out)
    assert code == 0 and len(rows) == 3
    orders = [float(r["observed_order"]) for r in rows[1:]]
    assert all(5.5 <= q <= 6.5 for q in orders)


def test_convergence_second_order(capsys):
    _, out, _ = run(["convergence", "--order", "2", "--dt", "1/50", "--levels", "4", "--jobs", "2"], capsys)
    orders = [float(r["observed_order"]) for r in table(out)[1:]]
    assert all(1.7 <= q <= 2.3 for q in orders)


def test_convergence_exact_case_has_all_levels(capsys):
    _, out, _ = run(["convergence", "--alpha", "0.5", "--beta", "1", "--levels", "3", "--t-end", "4"], capsys)
    rows = table(out)
    assert len(rows) == 3 and all(float(r["error"]) < 1e-6 for r in rows)


def test_roots(capsys):
    _, out, _ = run(["roots", "--alpha", "1", "--beta", "1"], capsys)
    rows = table(out)
    assert len(rows) == 1 and rows[0]["re"] == "" and rows[0]["predicted_decay_rate"] == "inf"
    _, out, _ = run(["roots", "--alpha", "1", "--beta", "0", "--re-min", "-0.5", "--re-max", "0.5",
                     "--im-min", "-0.5", "--im-max", "0.5"], capsys)
    rows = table(out)
    assert len(rows) == 1 and abs(complex(float(rows[0]["re"]), float(rows[0]["im"]))) < 1e-10
    _, out, _ = run(["roots", "--alpha", "1", "--beta", "0.5", "--re-min", "-3", "--re-max", "0.5",
                     "--im-min", "0", "--im-max", "20"], capsys)
    rows = table(out)
    assert rows and all(float(r["re"]) < 0 for r in rows)
    assert float(rows[0]["predicted_decay_rate"]) == pytest.approx(0.6282156, abs=1e-6)


def test_asymptotics_sweep(capsys):
    _, out, _ = run(["asymptotics", "--surface", "sphere", "--axes", "1", "--k", "20,10", "--a", "2", "--jobs", "2"], capsys)
    rows = table(out)
    assert [float(r["k"]) for r in rows] == [20.0, 10.0]
    assert all(float(r["cancellation_ratio"]) == pytest.approx(1.0) for r in rows)
    _, out, _ = run(["asymptotics", "--surface", "sphere", "--axes", "1", "--k", "20", "--a", "1"], capsys)
    assert float(table(out)[0]["cancellation_ratio"]) == pytest.approx(0.0, abs=1e-14)


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "tdcfie", "presets"], capture_output=True, text=True, check=True)
    assert out.stdout.splitlines()[0] == "name,n,alpha,beta,signal,dt,t_end"
