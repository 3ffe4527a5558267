import json
import math

import pytest

from optrec import cli
from optrec.ideal_spline import IdealSpline, validate_ideal_spline
from optrec.recovery import uniform_nodes

PI_NODES = "0,3.141592653589793"
TRUNC = ["--class", "rm1", "--r", "2", "--M", "1"]


def run_json(capsys, argv):
    code = cli.run(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_errors_euler_sup_norm(capsys):
    code, doc = run_json(capsys, ["errors", "--class", "rm1", "--r", "2", "--M", "10", "--nodes", PI_NODES, "--p", "inf"])
    assert code == 0
    assert doc["schema"] == "optrec/1"
    assert doc["result"]["value"] == pytest.approx(1.2337005501, abs=1e-9)
    assert doc["config"]["spec"]["M"] == 10.0
    assert doc["config"]["nodes"] == [0.0, math.pi]


def test_errors_at_a_point_with_pi_literal(capsys):
    code, doc = run_json(capsys, ["errors", *TRUNC, "--nodes", "0,pi", "--tau", "pi/2"])
    assert code == 0
    assert doc["result"]["value"] == pytest.approx((math.pi - 1) / 2, abs=1e-6)


def test_errors_with_samples(capsys):
    code, doc = run_json(capsys, ["errors", *TRUNC, "--nodes", "0,pi", "--p", "inf", "--samples", "20",
                                  "--methods", "optimal,linear"])
    assert code == 0
    emp = doc["result"]["empirical"]
    assert set(emp) == {"optimal", "linear"}
    assert emp["optimal"] <= doc["result"]["value"] + 1e-7


def test_errors_needs_one_of_tau_and_p(capsys):
    code, doc = run_json(capsys, ["errors", *TRUNC, "--nodes", "0,pi"])
    assert code == 2
    assert "exactly one" in doc["error"]["message"]


def test_nodes_check_gap_zero_at_uniform_mesh(capsys):
    nodes = ",".join(repr(float(x)) for x in uniform_nodes(2))
    code, doc = run_json(capsys, ["nodes-check", *TRUNC, "--nodes", nodes])
    assert code == 0
    assert doc["result"]["gap"] == 0.0


def test_nodes_check_positive_gap(capsys):
    code, doc = run_json(capsys, ["nodes-check", *TRUNC, "--nodes", "0,pi/2+0.3,pi,3*pi/2"])
    assert code == 0
    assert doc["result"]["gap"] > 0


def test_malformed_nodes_exit_2(capsys):
    code = cli.run(["errors", *TRUNC, "--nodes", "3,1", "--p", "inf"])
    captured = capsys.readouterr()
    assert code == 2
    doc = json.loads(captured.out)
    assert doc["error"]["message"] == "nodes not increasing"
    assert "nodes not increasing" in captured.err
    assert doc["config"]["argv"][0] == "errors"


@pytest.mark.parametrize("argv, fragment", [
    (["errors", *TRUNC, "--nodes", "0,1,2", "--p", "inf"], "even"),
    (["errors", *TRUNC, "--nodes", "0,pi", "--p", "0.5"], "p"),
    (["errors", "--class", "rm3", "--r", "2", "--M", "1", "--nodes", "0,pi", "--p", "inf"], "unknown class"),
    (["errors", "--class", "rm2", "--r", "2", "--M", "1", "--nodes", "0,pi", "--p", "inf"], "r >= 3"),
    (["recover-point", *TRUNC, "--nodes", "0,pi", "--values", "1", "--tau", "1"], "need 2 values"),
    (["errors", *TRUNC, "--nodes", "0,__import__('os')", "--p", "inf"], "cannot parse"),
])
def test_input_errors_exit_2(capsys, argv, fragment):
    code, doc = run_json(capsys, argv)
    assert code == 2
    assert fragment in doc["error"]["message"]


def test_solver_failure_exit_3(capsys, monkeypatch):
    from optrec import recovery
    from optrec.ideal_spline import SolverError

    def boom(*args, **kwargs):
        raise SolverError("no convergence", best_residual=1.0)

    recovery.clear_cache()
    monkeypatch.setattr(recovery, "find_ideal_spline", boom)
    code, doc = run_json(capsys, ["ideal", *TRUNC, "--nodes", "0.1,2.5"])
    recovery.clear_cache()
    assert code == 3
    assert doc["error"]["type"] == "SolverError"


def test_parse_angle_forms():
    assert cli.parse_angle("pi/2") == pytest.approx(math.pi / 2)
    assert cli.parse_angle("3*pi/4") == pytest.approx(3 * math.pi / 4)
    assert cli.parse_angle("π") == pytest.approx(math.pi)
    assert cli.parse_angle("-0.5") == -0.5
    assert cli.parse_angle("inf") == math.inf
    with pytest.raises(ValueError):
        cli.parse_angle("pi**pi**pi**pi")
    with pytest.raises(ValueError):
        cli.parse_angle("x")


def test_ideal_round_trip_revalidates(tmp_path, capsys):
    out = tmp_path / "spline.json"
    code = cli.run(["ideal", "--class", "rm2", "--r", "3", "--M", "0.5", "--nodes", "0.3,1.2,2.9,4.4",
                    "--seed", "7", "--json", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["result"]["valid"]
    phi = IdealSpline.from_dict(doc["result"]["ideal_spline"])
    rep = validate_ideal_spline(phi)
    assert rep.passed
    assert rep.to_dict() == doc["result"]["validation"]
    assert doc["config"]["seed"] == 7

    code, interp = run_json(capsys, ["interp", "--spline", str(out), "--values", "1,0,-1,0.5", "--at", "1.0,2.0"])
    assert code == 0
    assert interp["result"]["dimension"] == 4
    assert len(interp["result"]["at"]) == 2
    assert len(interp["result"]["coefficients"]) == 4


def test_recover_point_and_function(tmp_path, capsys):
    code, doc = run_json(capsys, ["recover-point", "--class", "rm1", "--r", "2", "--M", "10", "--nodes", "0,pi",
                                  "--values", "1,3", "--tau", "pi/2"])
    assert code == 0
    pt = doc["result"]["points"][0]
    assert pt["value"] == pytest.approx(2.0, abs=1e-10)
    assert pt["best_error"] == pytest.approx(math.pi ** 2 / 8, abs=1e-6)

    csv = tmp_path / "s.csv"
    code, doc = run_json(capsys, ["recover-function", *TRUNC, "--nodes", "0,pi", "--values", "1,3",
                                  "--csv", str(csv), "--points", "16"])
    assert code == 0
    lines = csv.read_text().strip().splitlines()
    assert lines[0] == "t,s" and len(lines) == 17


def test_plot_data_csv(capsys):
    code = cli.run(["plot-data", *TRUNC, "--nodes", "0,pi", "--points", "10"])
    lines = capsys.readouterr().out.strip().splitlines()
    assert code == 0
    assert lines[0] == "t,phi,phi_d1,phi_d2"
    assert len(lines) == 11


def test_verify_subset_passes(capsys):
    code = cli.run(["verify", "--only", "1,2,3"])
    captured = capsys.readouterr()
    assert code == 0
    doc = json.loads(captured.out)
    assert [c["number"] for c in doc["result"]["checks"]] == [1, 2, 3]
    assert captured.err.count("PASS") == 3


def test_verify_unknown_check(capsys):
    code, doc = run_json(capsys, ["verify", "--only", "99"])
    assert code == 2


def test_verify_failure_exit_1(capsys, monkeypatch):
    from optrec import verify

    monkeypatch.setitem(cli.CHECKS, 1, lambda: verify.CheckResult(1, "stub", False, "forced", 0.0, {}))
    code = cli.run(["verify", "--only", "1"])
    capsys.readouterr()
    assert code == 1


def test_main_exits_with_code():
    with pytest.raises(SystemExit) as info:
        cli.main(["errors", *TRUNC, "--nodes", "3,1", "--p", "inf"])
    assert info.value.code == 2
