import csv
import io
import json
import subprocess
import sys

import pytest

from lohomodyne.cli import EXIT_INVARIANT, EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION, config_hash, run


def _write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def _run(args):
    buf = io.StringIO()
    code = run(args, stdout=buf)
    return code, buf.getvalue()


def _table(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


MEASURE = {"kind": "measure", "params": {"n_tot": 5}, "grid": {"delta": {"logspace": [1e-5, 1e-3, 4]}, "r": [0.073, 0.5]}}


def test_bound_sweep_csv(tmp_path):
    code, out = _run(["bound", "--config", _write(tmp_path, MEASURE)])
    assert code == EXIT_OK
    assert out.startswith("# lohomodyne")
    assert f"config_sha256={config_hash(MEASURE)}" in out
    rows = _table(out)
    assert len(rows) == 8
    assert rows[0]["equation_id"] == "measurement-general"
    assert "e-" in rows[0]["distance_sq"] and len(rows[0]["delta"].split("e")[0]) == 18


def test_output_is_deterministic_and_thread_independent(tmp_path):
    cfg = _write(tmp_path, MEASURE)
    _, a = _run(["bound", "--config", cfg])
    _, b = _run(["bound", "--config", cfg, "--threads", "4"])
    assert a == b


def test_out_file_and_pretty(tmp_path):
    out = tmp_path / "o.txt"
    code, _ = _run(["bound", "--config", _write(tmp_path, MEASURE), "--out", str(out), "--format", "pretty"])
    assert code == EXIT_OK
    text = out.read_text()
    assert "measurement-general" in text and "," not in text.splitlines()[-1]


@pytest.mark.parametrize(
    "kind,params",
    [
        ("measure-sph", {"delta": 1e-4, "r": 0.073, "n_tot": 5}),
        ("charfn", {"delta": 1e-4, "gamma_abs": 20, "n_tot": 5, "variant": "sph"}),
        ("moment", {"delta": 1e-4, "k": 4, "n_tot": 5, "q_4k": 1.0}),
        ("function", {"delta": 1e-4, "f0": 1, "f2": 4, "n_tot": 5}),
        ("conddisp", {"delta": 1e-4, "xi": 1.0, "composite_exp": 10.0}),
        ("teleport", {"delta": 1e-4, "xi": 1.0, "sigma": 730, "m1": 1, "m2a": 2, "m2b": 2, "n_a": 1, "n_b": 1}),
        ("multi", {"delta": 1e-4, "measurements": [{"f0": 1, "f1": 1, "f2": 1}], "omega_tot_exp": 2, "omega_bar_sq_tot": 1}),
    ],
)
def test_every_bound_kind(tmp_path, kind, params):
    code, out = _run(["bound", "--config", _write(tmp_path, {"kind": kind, "params": params})])
    assert code == EXIT_OK, out
    assert len(_table(out)) == 1


def test_charfn_row_matches_library(tmp_path):
    from lohomodyne.bounds import charfn_error_bound

    cfg = {"kind": "charfn", "params": {"delta": 1e-4, "gamma_abs": 20, "n_tot": 5}}
    _, out = _run(["bound", "--config", _write(tmp_path, cfg)])
    assert float(_table(out)[0]["distance_sq"]) == charfn_error_bound(1e-4, 20, 5)


def test_validation_errors(tmp_path, capsys):
    assert _run(["bound", "--config", _write(tmp_path, "{bad json")])[0] == EXIT_VALIDATION
    assert "line 1" in capsys.readouterr().err
    assert _run(["bound", "--config", _write(tmp_path, {"kind": "nope"})])[0] == EXIT_VALIDATION
    empty = {"kind": "measure", "params": {"n_tot": 5, "r": 1}, "grid": {"delta": []}}
    assert _run(["bound", "--config", _write(tmp_path, empty)])[0] == EXIT_VALIDATION
    assert "EmptyGrid" in capsys.readouterr().err
    neg = {"kind": "measure", "params": {"n_tot": 5, "r": 1, "delta": -1}}
    assert _run(["bound", "--config", _write(tmp_path, neg)])[0] == EXIT_VALIDATION
    missing = {"kind": "moment", "params": {"delta": 1e-4}}
    assert _run(["bound", "--config", _write(tmp_path, missing)])[0] == EXIT_VALIDATION
    assert _run(["bound"])[0] == EXIT_VALIDATION


def test_gkp_plan_reference_table():
    code, out = _run(["gkp", "plan"])
    assert code == EXIT_OK
    rows = _table(out)
    assert len(rows) == 7
    assert [r["status"] for r in rows] == ["ok"] * 6 + ["ec-budget-infeasible"]
    assert "n_lo_at_730" in rows[0] and "n_lo_at_8250" in rows[0]


def test_gkp_plan_no_budget_row(tmp_path):
    cfg = {"rows": [{"n_bar": 4.8, "sigma_noise": 0.1, "sigma_0": 0.07, "eps_ec": 0.06, "eps_m": 0.02}]}
    code, out = _run(["gkp", "plan", "--config", _write(tmp_path, cfg)])
    assert code == EXIT_OK
    assert _table(out)[0]["status"] == "no-budget"


def test_gkp_fidelity_analytic(tmp_path):
    cfg = {"codes": [{"n_bar": 4.8}, {"n_bar": 12}], "sigma_noise": {"linspace": [0, 0.2, 5]}}
    code, out = _run(["gkp", "fidelity", "--config", _write(tmp_path, cfg)])
    assert code == EXIT_OK
    rows = _table(out)
    assert len(rows) == 10
    inf = [float(r["infidelity"]) for r in rows[:5]]
    assert inf == sorted(inf)


def test_gkp_fidelity_numeric_transpose(tmp_path):
    cfg = {"mode": "numeric-transpose", "codes": [{"n_bar": 2}], "sigma_noise_sq": [0.01]}
    code, out = _run(["gkp", "fidelity", "--config", _write(tmp_path, cfg)])
    assert code == EXIT_OK
    row = _table(out)[0]
    assert 0 < float(row["infidelity"]) < 1 and row["cutoff"] == "28"


def test_gkp_fidelity_refuses_other_codes(tmp_path):
    cfg = {"code_kind": "triv"}
    assert _run(["gkp", "fidelity", "--config", _write(tmp_path, cfg)])[0] == EXIT_VALIDATION


def test_gkp_fidelity_numeric_failure(tmp_path):
    cfg = {"mode": "numeric-transpose", "codes": [{"n_bar": 4.8}], "sigma_noise_sq": [0.01], "max_cutoff": 30}
    assert _run(["gkp", "fidelity", "--config", _write(tmp_path, cfg)])[0] == EXIT_NUMERIC


def test_witness_default_and_random(tmp_path):
    code, out = _run(["witness"])
    assert code == EXIT_OK
    assert "violations=0" in out
    cfg = {"delta": [0.01], "s": [1.0], "gamma": [0.0], "random_points": 50}
    _, a = _run(["witness", "--config", _write(tmp_path, cfg), "--seed", "5"])
    _, b = _run(["witness", "--config", _write(tmp_path, cfg), "--seed", "5"])
    assert a == b and len(_table(a)) == 2 + 50


def test_witness_violation_exit_code(monkeypatch):
    import lohomodyne.cli as cli
    from lohomodyne.witness import WitnessPoint

    monkeypatch.setattr(cli, "witness_point", lambda inp: WitnessPoint(1.0, 0.5, 0.5, True))
    cfg_args = ["witness"]
    assert run(cfg_args, stdout=io.StringIO()) == EXIT_INVARIANT


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "lohomodyne", "gkp", "plan", "--format", "pretty"], capture_output=True, text=True)
    assert res.returncode == 0 and "ec-budget-infeasible" in res.stdout


def test_measure_sph_sweep_fidelity_decreasing(tmp_path):
    cfg = {"kind": "measure-sph", "params": {"r": 0.073, "n_tot": 5}, "grid": {"delta": {"logspace": [1e-5, 1e-3, 9]}}}
    _, out = _run(["bound", "--config", _write(tmp_path, cfg)])
    fid = [float(r["fidelity_lb"]) for r in _table(out)]
    assert len(fid) == 9 and all(a > b for a, b in zip(fid, fid[1:]))


def test_charfn_gamma_sweep(tmp_path):
    cfg = {"kind": "charfn", "params": {"delta": 1e-4, "n_tot": 5}, "grid": {"gamma_abs": {"linspace": [0, 40, 5]}}}
    _, out = _run(["bound", "--config", _write(tmp_path, cfg)])
    rows = _table(out)
    vals = {float(r["gamma_abs"]): float(r["distance_sq"]) for r in rows}
    assert vals[0.0] == 0.0
    assert round(vals[20.0], 4) == 0.0385


def test_analytic_curve_starts_at_code_penalty(tmp_path):
    from lohomodyne.gkp import p_succ, sigma_gkp_sq_from_n_bar

    cfg = {"codes": [{"n_bar": 4.8}], "sigma_noise": [0.0, 0.05, 0.1, 0.15]}
    _, out = _run(["gkp", "fidelity", "--config", _write(tmp_path, cfg)])
    inf = [float(r["infidelity"]) for r in _table(out)]
    g2 = sigma_gkp_sq_from_n_bar(4.8)
    assert inf[0] == pytest.approx(1 - p_succ((3 * g2) ** 0.5) ** 2, rel=1e-12)
    assert inf[0] > 0 and all(a < b for a, b in zip(inf, inf[1:]))
