import csv
import io
import json
import shutil
import subprocess
import sys

import pytest

from gzverify.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, emit_report, main, report_dict
from gzverify.suites import Check


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_help_exits_cleanly(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == EXIT_OK and "verify" in out


def test_missing_command_is_usage_error(capsys):
    code, _, _ = run(capsys)
    assert code == EXIT_USAGE


@pytest.mark.parametrize("argv", [["classgroup", "--disc", "-12"], ["theta", "--disc", "7"],
                                  ["greens", "--kind", "resolvent", "--s", "2", "--z", "1j"],
                                  ["lfunc", "std"], ["lfunc", "--kind", "std"],
                                  ["heegner", "--N", "5", "--disc", "-7", "--r", "0"],
                                  ["greens", "--kind", "lift", "--s", "1.5", "--z", "-1j"],
                                  ["lattice", "--family", "sig12"],
                                  ["trace", "--fn", "file", "--disc", "-7"],
                                  ["trace", "--kind", "geo", "--disc", "-7"],
                                  ["trace", "--kind", "geo", "--N", "2", "--disc", "5"],
                                  ["lfunc", "deriv", "--curve", "0,0,1,-1,0", "--level", "37", "--sign", "1",
                                   "--prec", "500"]])
def test_bad_input_exit_code(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE and err


def test_format_flag_after_subcommand(capsys):
    code, out, _ = run(capsys, "classgroup", "--disc", "-23", "--format", "json")
    assert code == EXIT_OK and json.loads(out)["h"] == 3


def test_classgroup_json(capsys):
    code, out, _ = run(capsys, "--format", "json", "classgroup", "--disc", "-23")
    data = json.loads(out)
    assert code == EXIT_OK and data["h"] == 3 and len(data["forms"]) == 3
    assert abs(data["h_from_L1"] - 3) < 1e-9
    table = data["table"]
    assert sorted(table[0]) == [0, 1, 2] and all(sorted(row) == [0, 1, 2] for row in table)
    assert len(data["characters"]) == 3 and all(len(ch) == 3 for ch in data["characters"])


def test_classgroup_narrow(capsys):
    # Q(sqrt 3): wide class number 1, narrow class number 2
    _, out, _ = run(capsys, "--format", "json", "classgroup", "--disc", "12")
    assert json.loads(out)["h"] == 1
    _, out, _ = run(capsys, "--format", "json", "classgroup", "--disc", "12", "--narrow")
    data = json.loads(out)
    assert data["h"] == 2 and data["narrow"] and data["table"] == [[0, 1], [1, 0]]


def test_lattice_and_weil(capsys):
    code, out, _ = run(capsys, "--format", "json", "lattice", "--N", "37")
    data = json.loads(out)
    assert data["family"] == "sig12" and data["signature"] == [1, 2]
    assert data["disc_module"]["order"] == 74 and data["level"] == 148
    code, out, _ = run(capsys, "--format", "json", "lattice", "--family", "LA", "--disc", "-23", "--class", "1")
    data = json.loads(out)
    assert data["signature"] == [2, 2] and data["level"] == 23 and data["disc_module"]["order"] == 529
    code, out, _ = run(capsys, "--format", "json", "weil", "--disc", "-23", "--check")
    data = json.loads(out)
    assert code == EXIT_OK and data["pass"] and max(data["residuals"].values()) < 1e-12


def test_weil_check_fails_on_bad_residual(capsys, monkeypatch):
    import gzverify.cli as cli
    monkeypatch.setattr(cli, "relation_residuals", lambda rep: {"unitary_S": 1.0})
    assert run(capsys, "weil", "--N", "11", "--check")[0] == EXIT_FAIL
    assert run(capsys, "weil", "--N", "11")[0] == EXIT_OK


def test_theta_and_ap(capsys):
    code, out, _ = run(capsys, "--format", "json", "theta", "--disc", "-4", "--prec", "10")
    assert json.loads(out)["coefficients"][:6] == ["1/4", "1", "1", "0", "1", "2"]  # r(0) = 1/w
    code, out, _ = run(capsys, "theta", "--disc", "-23", "--class", "1", "--prec", "8")
    rows = list(csv.reader(io.StringIO(out)))
    # 2x^2 + xy + 3y^2 represents 2, 3, 4, 6, 8 once up to sign
    assert rows[0] == ["m", "r_A(m)"] and rows[1:] == [["0", "1/2"], ["1", "0"], ["2", "1"], ["3", "1"],
                                                    ["4", "1"], ["5", "0"], ["6", "1"], ["7", "0"],
                                                    ["8", "1"]]
    code, out, _ = run(capsys, "ap", "--curve", "0,0,1,-1,0", "--pmax", "7")
    assert out.split("\n")[:4] == ["2 -2", "3 -3", "5 -2", "7 -1"]


def test_ap_uses_cache(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("GZVERIFY_CACHE_DIR", str(tmp_path))
    run(capsys, "ap", "--curve", "0,0,1,-1,0", "--pmax", "20")
    assert list(tmp_path.iterdir())


def test_ap_cache_file(capsys, tmp_path):
    cache = tmp_path / "ap37.txt"
    run(capsys, "ap", "--curve", "0,0,1,-1,0", "--pmax", "11", "--cache", str(cache))
    assert cache.read_text().split("\n")[:5] == ["2 -2", "3 -3", "5 -2", "7 -1", "11 -5"]


def test_lfunc_classical_shift(capsys):
    code, out, _ = run(capsys, "--format", "json", "lfunc", "std", "--curve", "0,0,1,-1,0",
                       "--level", "37", "--sign", "-1", "--prec", "3000", "--eval", "1", "--classical")
    data = json.loads(out)
    assert code == EXIT_OK and data["s"] == 0.5
    assert abs(complex(*data["value"])) < 1e-10 and data["residual"] < 1e-8


def test_lfunc_deriv(capsys):
    code, out, _ = run(capsys, "--format", "json", "lfunc", "deriv", "--curve", "0,0,1,-1,0",
                       "--level", "37", "--sign", "-1", "--prec", "3000")
    data = json.loads(out)
    assert code == EXIT_OK and set(data) >= {"value", "error_estimate", "sign", "conductor", "residual"}
    assert abs(data["L_prime"] - 0.3059998) < 1e-5 and data["sign"] == -1


def test_lfunc_rs_schema(capsys):
    code, out, _ = run(capsys, "--format", "json", "lfunc", "rs", "--curve", "0,0,1,-1,0", "--level", "37",
                       "--disc", "-7", "--chi", "0", "--prec", "4000", "--eval", "0.5", "--eval", "0.7")
    data = json.loads(out)
    assert code == EXIT_OK and data["sign"] == -1 and abs(data["conductor"] - 37 * 7) < 1e-9
    assert len(data["value"]) == 2 and data["residual"] < 1e-8


def test_heegner_and_trace(capsys):
    code, out, _ = run(capsys, "--format", "json", "heegner", "--N", "37", "--disc", "-139", "--r", "3")
    data = json.loads(out)
    assert data["count"] == 3 and data["degree"] == "3"
    code, out, _ = run(capsys, "--format", "json", "trace", "--kind", "cm", "--disc", "-4", "--r", "0",
                       "--relax")
    assert abs(json.loads(out)["trace"] - 492) < 1e-6
    code, out, _ = run(capsys, "--format", "json", "trace", "--disc", "-7")
    re, im = json.loads(out)["trace"]
    assert abs(re + 4119) < 1e-6 and abs(im) < 1e-6


def test_trace_from_grid_file(capsys, tmp_path):
    grid = tmp_path / "grid.csv"
    lines = ["re,im,value_re,value_im"]
    for i in range(21):
        for k in range(16):
            x, y = -1 + 0.1 * i, 0.5 + 0.1 * k
            lines.append(f"{x},{y},{2 * x + 1},{2 * y}")
    grid.write_text("\n".join(lines) + "\n")
    # 2 tau + 1 at tau = (-1 + i sqrt 7)/2 is i sqrt 7; linear interpolation is exact
    code, out, _ = run(capsys, "--format", "json", "trace", "--fn", "file", "--grid", str(grid), "--disc", "-7")
    re, im = json.loads(out)["trace"]
    assert code == EXIT_OK and abs(re) < 1e-12 and abs(im - 7 ** 0.5) < 1e-12


def test_trace_geodesic_matches_contour_integral(capsys):
    import mpmath as mp
    code, out, _ = run(capsys, "--format", "json", "trace", "--kind", "geo", "--disc", "5")
    data = json.loads(out)
    assert code == EXIT_OK and [g["form"] for g in data["geodesics"]] == [[1, 1, -1]]
    # arc of z^2 + z - 1 from its top to the image under (z + 1)/(z + 2); along this
    # orientation ds = -sqrt(5) dz / Q(z, 1) and m = 5/4, so the trace is -(1/pi) int F dz / Q
    c, R = mp.mpf(-1) / 2, mp.sqrt(5) / 2
    z0 = c + 1j * R
    th1 = mp.arg((z0 + 1) / (z0 + 2) - c)

    def integrand(t):
        z = c + R * mp.expj(t)
        return (1728 * mp.kleinj(z) - 744) / (z * z + z - 1) * 1j * R * mp.expj(t)

    expected = -mp.quad(integrand, [mp.pi / 2, th1]) / mp.pi
    re, im = data["trace"]
    assert abs(re - float(expected.real)) < 1e-9 and abs(im) < 1e-9


def test_greens_csv(capsys):
    code, out, _ = run(capsys, "greens", "--kind", "resolvent", "--s", "2", "--z", "0.3+1.1i", "--z", "2i",
                       "--w=-0.2+2.5i")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == EXIT_OK and rows[0] == ["x", "y", "x2", "y2", "value", "tail_bound"] and len(rows) == 3
    assert float(rows[1][4]) < 0
    code, out, _ = run(capsys, "greens", "--kind", "lift", "--s", "1.5", "--z", "0.3+1.7j")
    assert len(list(csv.reader(io.StringIO(out)))) == 2


def test_verify_json_report(capsys, tmp_path):
    path = tmp_path / "report.json"
    code, out, _ = run(capsys, "--format", "json", "verify", "lattice", "--output", str(path))
    data = json.loads(out)
    assert code == EXIT_OK
    assert data["schema_version"] == 1 and data["suite"] == "lattice"
    assert [c["id"] for c in data["checks"]] == sorted(c["id"] for c in data["checks"])
    assert all(c["pass"] for c in data["checks"])
    assert json.loads(path.read_text()) == data


def test_verify_is_deterministic(capsys):
    def body():
        _, out, _ = run(capsys, "--format", "json", "verify", "modforms", "--seed", "4")
        data = json.loads(out)
        data.pop("wall_time_s")
        return data
    assert body() == body()


def test_verify_csv_rows(capsys):
    code, out, _ = run(capsys, "--format", "csv", "verify", "numerics")
    rows = list(csv.reader(io.StringIO(out)))
    _, jout, _ = run(capsys, "--format", "json", "verify", "numerics")
    assert len(rows) == len(json.loads(jout)["checks"]) + 1


def test_failing_report_exit_code(capsys, monkeypatch):
    import gzverify.cli as cli

    monkeypatch.setitem(cli.SUITES, "numerics", lambda cfg: [Check("x", "forced", 1, 2, 0.0, False)])
    code, out, _ = run(capsys, "verify", "numerics")
    assert code == EXIT_FAIL and "FAIL x" in out


def test_empty_report_formats():
    rep = report_dict("none", [], 0.0)
    assert json.loads(emit_report(rep, "json"))["checks"] == []
    assert emit_report(rep, "csv").strip() == "id,description,expected,computed,tol,pass"
    assert "0/0 passed" in emit_report(rep, "text")


def test_complex_values_serialize():
    rep = report_dict("c", [Check("a", "d", 1 + 2j, 1 + 2j, 0.0, True)], 0.1)
    assert json.loads(emit_report(rep, "json"))["checks"][0]["expected"] == [1.0, 2.0]


def test_console_script_and_module():
    exe = shutil.which("gzverify")
    cmds = [[sys.executable, "-m", "gzverify", "--version"]] + ([[exe, "--version"]] if exe else [])
    for cmd in cmds:
        res = subprocess.run(cmd, capture_output=True, text=True, timeout=60)
        assert res.returncode == 0 and res.stdout.strip() == "0.1.0"
