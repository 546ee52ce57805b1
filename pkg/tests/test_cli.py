import json

import pytest

from asymcert import cli

ROW2 = "58.4,121.6,180"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def records(out):
    rows = {}
    for line in out.splitlines():
        if " : " in line:
            key, value = line.split(" : ", 1)
            rows[key.strip()] = value.strip()
    return rows


def test_bounds_row2(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "bounds", "--angles", ROW2, "--out", str(path))
    assert code == cli.EXIT_OK
    rec = records(out)
    assert float(rec["Q_mirror"]) == pytest.approx(5.82843, abs=1e-4)
    assert float(rec["Delta"]) == pytest.approx(0.11107, abs=1e-4)
    report = json.loads(path.read_text())
    assert report["bounds"]["q_max"] == pytest.approx(5.93950, abs=1e-4)
    assert report["config"]["optimizer"]["restarts"] == 64
    assert report["target"]["angles_deg"] == pytest.approx([58.4, 121.6, 180.0])


def test_bounds_accepts_cosines(capsys):
    code, out, _ = run(capsys, "bounds", "--cosines", "0,0,-0.5", "--restarts", "8")
    assert code == cli.EXIT_OK
    assert float(records(out)["Delta"]) == pytest.approx(0.0, abs=1e-4)


def test_report_is_reproducible(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert run(capsys, "simulate", "--angles", "54,112,194", "--restarts", "8", "--seed", "7",
                   "--out", str(p))[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["bounds", "--angles", "10,20"],
        ["bounds", "--angles", "0,50,50"],  # coincident states
        ["bounds", "--angles", "10,150,10"],  # not realizable
        ["bounds", "--cosines", "1.5,0,0"],
        ["bounds"],
        ["bounds", "--angles", ROW2, "--restarts", "0"],
        ["simulate", "--angles", ROW2, "--shots", "0"],
        ["simulate", "--angles", ROW2, "--depolarizing", "2"],
        ["certify", "--angles", ROW2, "--observed", "5.9"],
        ["certify", "--angles", ROW2, "--sigma-k", "-1"],
        ["frobnicate"],
    ],
)
def test_invalid_input_exit_code(capsys, argv):
    with_exit = None
    try:
        with_exit = cli.main(argv)
    except SystemExit as exc:  # argparse errors
        with_exit = exc.code
    capsys.readouterr()
    assert with_exit == cli.EXIT_INVALID


def test_non_convergence_exit_code(capsys):
    code, _, err = run(capsys, "bounds", "--angles", "130,130,100", "--max-iterations", "1", "--restarts", "2")
    assert code == cli.EXIT_NOT_CONVERGED
    assert "converge" in err


def test_certify_refuses_unconverged(capsys):
    code, _, _ = run(capsys, "certify", "--angles", ROW2, "--observed", "5.9", "--observed-sigma", "0.01",
                     "--max-iterations", "1", "--restarts", "2")
    assert code == cli.EXIT_NOT_CONVERGED


@pytest.mark.parametrize(
    "angles, q, s, verdict",
    [
        ("60,200,100", 5.7877, 0.0113, "not_certified"),
        (ROW2, 5.8894, 0.0145, "asymmetry_certified"),
        ("54,112,194", 5.8347, 0.0106, "asymmetry_certified"),
    ],
)
def test_certify_observed_at_one_sigma(capsys, angles, q, s, verdict):
    code, out, _ = run(capsys, "certify", "--angles", angles, "--observed", str(q), "--observed-sigma", str(s),
                       "--sigma-k", "1", "--restarts", "16")
    assert code == 0
    assert records(out)["verdict"] == verdict


def test_certify_default_k_is_three(capsys):
    # 2.5 sigma above the bound is not enough at the default threshold
    code, out, _ = run(capsys, "certify", "--angles", "54,112,194", "--observed", "5.8347",
                       "--observed-sigma", "0.0106", "--restarts", "16")
    rec = records(out)
    assert float(rec["k"]) == 3.0
    assert rec["verdict"] == "not_certified"


def test_certify_expectations_file(capsys, tmp_path):
    from asymcert.shot_sim import scenario_from_targets
    from asymcert.witness import TargetTriple, build_witness

    target = TargetTriple.from_angles(58.4, 121.6, 180.0)
    spec = build_witness(target)
    E = scenario_from_targets(target).expectations()
    lines = ["# ideal table, unused cells blank", ""]
    for x in range(6):
        cells = [f"{E[x, y]:.12f}" if spec.W[x, y] != 0 else "nan" for y in range(6)]
        lines.append(", ".join(cells) + "  # row")
    path = tmp_path / "E.txt"
    path.write_text("\n".join(lines) + "\n")
    out_json = tmp_path / "v.json"
    code, out, _ = run(capsys, "certify", "--angles", ROW2, "--expectations", str(path), "--shots", "8192",
                       "--restarts", "16", "--out", str(out_json))
    assert code == 0
    rec = records(out)
    assert float(rec["I6 observed"]) == pytest.approx(5.93950, abs=1e-4)
    assert rec["verdict"] == "asymmetry_certified"
    report = json.loads(out_json.read_text())
    assert report["source"] == "expectations"
    v = report["verdict"]
    assert v["excess"] > v["sigma_k"] * v["sigma"]


def test_certify_rejects_bad_table(capsys, tmp_path):
    path = tmp_path / "E.txt"
    path.write_text("0 0 0\n")
    code, _, _ = run(capsys, "certify", "--angles", ROW2, "--expectations", str(path), "--restarts", "4")
    assert code == cli.EXIT_INVALID
    path.write_text("\n".join(["2 0 0 0 0 0"] + ["0 0 0 0 0 0"] * 5))
    code, _, _ = run(capsys, "certify", "--angles", ROW2, "--expectations", str(path), "--restarts", "4")
    assert code == cli.EXIT_INVALID
    path.write_text("\n".join(["nan 0 0 0 0 0"] + ["0 0 0 0 0 0"] * 5))  # nan in a used cell
    code, _, _ = run(capsys, "certify", "--angles", ROW2, "--expectations", str(path), "--restarts", "4")
    assert code == cli.EXIT_INVALID


def test_certify_simulated_default(capsys):
    code, out, _ = run(capsys, "certify", "--angles", ROW2, "--restarts", "16")
    assert code == 0
    rec = records(out)
    assert rec["source"] == "simulation"
    assert rec["verdict"] == "asymmetry_certified"


def test_simulate_noiseless_row2(capsys):
    code, out, _ = run(capsys, "simulate", "--angles", ROW2, "--shots", "8192", "--seed", "0", "--restarts", "16")
    assert code == 0
    rec = records(out)
    assert abs(float(rec["Q_sim"]) - 5.93950) <= 3 * float(rec["sigma"])
    for key in ("I3_sim(omega12)", "I3_sim(omega13)", "I3_sim(omega23)"):
        assert key in rec


def test_simulate_depolarized_brackets_between_bounds(capsys):
    p = 1 - 5.889 / 5.93950
    code, out, _ = run(capsys, "simulate", "--angles", ROW2, "--depolarizing", f"{p:.6f}",
                       "--seed", "1", "--restarts", "16")
    assert code == 0
    rec = records(out)
    q, s = float(rec["Q_sim"]), float(rec["sigma"])
    assert float(rec["Q_exact"]) == pytest.approx(5.889, abs=1e-4)
    lo, hi = float(rec["Q_mirror"]), float(rec["Q_max"])
    # the one-sigma interval contains some value strictly between the bounds
    assert q - s < hi and q + s > lo


def test_gap_small_budget(capsys, tmp_path):
    path = tmp_path / "g.json"
    code, out, _ = run(capsys, "gap", "--start-angles", "130,130,100", "--candidates", "0", "--refine", "1",
                       "--restarts", "1", "--search-restarts", "1", "--out", str(path))
    assert code == 0
    assert float(records(out)["Delta"]) >= -1e-9
    report = json.loads(path.read_text())
    assert report["search"]["evaluations"] >= 1


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"angles": [58.4, 121.6, 180.0], "restarts": 8, "seed": 3}))
    out_json = tmp_path / "r.json"
    code, out, _ = run(capsys, "bounds", "--config", str(cfg), "--out", str(out_json))
    assert code == 0
    assert json.loads(out_json.read_text())["config"]["optimizer"] == {
        "restarts": 8, "max_iterations": 10000, "improvement_tol": 1e-12, "seed": 3}
    # flags override the file
    code, _, _ = run(capsys, "bounds", "--config", str(cfg), "--restarts", "4", "--out", str(out_json))
    assert json.loads(out_json.read_text())["config"]["optimizer"]["restarts"] == 4


@pytest.mark.parametrize(
    "data",
    [
        {"angles": [1, 2]},
        {"restarts": 0},
        {"bogus": 1},
        {"angles": [50, 60, 70], "cosines": [0, 0, 0]},
    ],
)
def test_config_file_rejected(capsys, tmp_path, data):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(data))
    code, _, err = run(capsys, "bounds", "--config", str(cfg))
    assert code == cli.EXIT_INVALID
    assert "invalid config" in err


def test_config_file_unreadable(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert run(capsys, "bounds", "--config", str(cfg))[0] == cli.EXIT_INVALID


def test_table1_flags_the_rounded_bias(capsys, tmp_path):
    path = tmp_path / "t.json"
    code, out, _ = run(capsys, "table1", "--out", str(path))
    report = json.loads(path.read_text())
    failed = [(c["row"], c["column"]) for c in report["cells"] if not c["ok"]]
    # row 2 omega13 evaluates to 0.35851 against a published 0.358
    assert failed == [(2, "omega13")]
    assert code == cli.EXIT_REGRESSION
    assert "FAIL" in out


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "asymcert", "--version"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "asymcert" in res.stdout
