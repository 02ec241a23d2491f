import csv
import io
import math

import pytest

from greybound import cli
from greybound.config import ConfigError, RunConfig, build_config, parse_omega, read_config_file

SECH2_1_3 = 0.896629559604914404
SECH2_5_16 = 0.908366819767681618


def run(args, tmp_path, capsys, name="out.csv"):
    out = tmp_path / name
    code = cli.main(list(args) + ["--out", str(out)])
    captured = capsys.readouterr()
    return code, out, captured


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0]
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    return header, rows


# ---- potential ---------------------------------------------------------------------

def test_potential_fig2(tmp_path, capsys):
    code, out, cap = run(["potential", "--preset", "fig2"], tmp_path, capsys)
    assert code == 0
    header, rows = read_csv(out)
    assert header.startswith("# command=potential ")
    assert list(rows[0]) == ["r", "r_star", "V_rn", "V_schwarzschild"]
    assert len(rows) == 400
    v = [float(r["V_rn"]) for r in rows]
    assert v[0] <= 1e-8 * max(v)
    assert all(x > 0 for x in v)
    # rows inside the uncharged horizon have no uncharged potential
    assert math.isnan(float(rows[0]["V_schwarzschild"]))
    assert "charged peak is" in cap.out


def test_potential_fig1_columns_agree(tmp_path, capsys):
    code, out, _ = run(["potential", "--preset", "fig1"], tmp_path, capsys)
    assert code == 0
    _, rows = read_csv(out)
    for r in rows:
        a, b = float(r["V_rn"]), float(r["V_schwarzschild"])
        assert abs(a - b) <= 1e-14 * max(abs(a), 1e-300)


def test_zero_count_grid_creates_no_file(tmp_path, capsys):
    code, out, cap = run(["potential", "--preset", "fig2", "--r-grid", "4:10:0"], tmp_path, capsys)
    assert code == 1
    assert not out.exists()
    assert "error" in cap.err


def test_grid_inside_horizon_is_rejected(tmp_path, capsys):
    code, out, _ = run(["potential", "--r-grid", "3:10:5"], tmp_path, capsys)
    assert code == 1 and not out.exists()


# ---- bounds ------------------------------------------------------------------------

def test_bounds_fig3(tmp_path, capsys):
    code, out, cap = run(["bounds", "--preset", "fig3"], tmp_path, capsys)
    assert code == 0
    _, rows = read_csv(out)
    assert len(rows) == 50
    assert "never exceed" in cap.out
    for r in rows:
        t_rn, t_s = float(r["T_bound_rn"]), float(r["T_bound_schw"])
        r_rn, r_s = float(r["R_bound_rn"]), float(r["R_bound_schw"])
        assert t_rn <= t_s and r_rn >= r_s
        assert abs(t_rn + r_rn - 1) <= 1e-15 and abs(t_s + r_s - 1) <= 1e-15


def test_bounds_at_omega_one(tmp_path, capsys):
    code, out, _ = run(["bounds", "--preset", "fig3", "--omega", "1.0"], tmp_path, capsys)
    assert code == 0
    _, (row,) = read_csv(out)
    assert float(row["T_bound_rn"]) == pytest.approx(SECH2_1_3, rel=1e-14)
    assert float(row["T_bound_schw"]) == pytest.approx(SECH2_5_16, rel=1e-14)


@pytest.mark.parametrize("args", [["--m", "1", "--q", "1"], ["--q", "3"], ["--omega", "0"],
                                  ["--omega", "2,1"], ["--family", "schwarzschild", "--q", "1"],
                                  ["--omega", "0.1:1:x"]])
def test_bounds_invalid_input(tmp_path, capsys, args):
    code, out, _ = run(["bounds", *args], tmp_path, capsys)
    assert code == 1 and not out.exists()


# ---- verify ------------------------------------------------------------------------

def test_verify_fig3(tmp_path, capsys):
    code, out, cap = run(["verify", "--preset", "fig3"], tmp_path, capsys)
    assert code == 0
    _, rows = read_csv(out)
    assert len(rows) == 50
    for r in rows:
        assert r["converged"] == "True"
        assert float(r["bound_margin"]) >= 0
        assert float(r["unitarity_defect"]) <= 1e-6
    assert "violations=0" in cap.out


def test_verify_injected_zero_potential(tmp_path, capsys):
    code, out, _ = run(["verify", "--inject", "zero", "--omega", "0.5,1.0"], tmp_path, capsys)
    assert code == 0
    _, rows = read_csv(out)
    for r in rows:
        assert abs(float(r["T_num"]) - 1) <= 1e-10
        assert float(r["T_bound"]) == 1.0
        assert abs(float(r["bound_margin"])) <= 1e-10


def test_verify_corrupted_bound_fails(tmp_path, capsys):
    code, _, cap = run(["verify", "--bound-offset", "0.5", "--omega", "0.5,1.0"], tmp_path, capsys)
    assert code == cli.EXIT_BOUND_VIOLATION
    assert "BOUND VIOLATION" in cap.out


def test_verify_reports_non_convergence(tmp_path, capsys):
    # this horizon cut is rejected at omega = 1, so that point fails
    code, out, cap = run(["verify", "--omega", "1,5", "--eps-horizon", "1e-6"], tmp_path, capsys)
    assert code == cli.EXIT_NOT_CONVERGED
    _, rows = read_csv(out)
    assert rows[0]["converged"] == "False" and "DomainError" in rows[0]["error"]
    assert rows[1]["converged"] == "True"


def test_verify_is_deterministic(tmp_path, capsys):
    args = ["verify", "--omega", "0.2:1.0:5", "--l", "2"]
    _, a, _ = run(args, tmp_path, capsys, "a.csv")
    _, b, _ = run(args + ["--workers", "2"], tmp_path, capsys, "b.csv")
    body = lambda p: p.read_text().splitlines()[1:]
    assert body(a) == body(b)


# ---- tortoise ------------------------------------------------------------------------

def test_tortoise_sub_extremal(tmp_path, capsys):
    code, out, _ = run(["tortoise", "--preset", "fig2"], tmp_path, capsys)
    assert code == 0
    _, rows = read_csv(out)
    assert {r["branch"] for r in rows} == {"sub-extremal"}
    assert max(float(r["residual"]) for r in rows) < 1e-6
    r_star = [float(r["r_star"]) for r in rows]
    assert r_star == sorted(r_star)


def test_tortoise_extremal(tmp_path, capsys):
    code, out, _ = run(["tortoise", "--m", "1", "--q", "1"], tmp_path, capsys)
    assert code == 0
    _, rows = read_csv(out)
    assert {r["branch"] for r in rows} == {"extremal"}
    assert max(float(r["residual"]) for r in rows) < 1e-6


def test_tortoise_super_extremal_warns(tmp_path, capsys):
    code, out, cap = run(["tortoise", "--m", "1", "--q", "2"], tmp_path, capsys)
    assert code == 0
    _, rows = read_csv(out)
    assert {r["branch"] for r in rows} == {"super-extremal"}
    assert "warning" in cap.out and "naked singularity" in cap.out


def test_super_extremal_rejected_for_bounds(tmp_path, capsys):
    code, _, cap = run(["bounds", "--m", "1", "--q", "2"], tmp_path, capsys)
    assert code == 1 and "sub-extremal" in cap.err


# ---- output and configuration ----------------------------------------------------------

def test_stdout_output(capsys):
    code = cli.main(["bounds", "--omega", "1.0"])
    cap = capsys.readouterr()
    assert code == 0
    lines = cap.out.splitlines()
    assert lines[0].startswith("# command=bounds")
    assert lines[1] == "omega,T_bound_rn,T_bound_schw,R_bound_rn,R_bound_schw"
    assert "never exceed" in cap.err


def test_header_records_effective_config(tmp_path, capsys):
    _, out, _ = run(["bounds", "--preset", "fig3", "--l", "2"], tmp_path, capsys)
    header = out.read_text().splitlines()[0]
    fields = dict(item.split("=", 1) for item in header[2:].split(" "))
    assert fields["command"] == "bounds"
    assert fields["l"] == "2" and fields["q"] == "1.0" and fields["omega"] == "0.1:2.0:50"


def test_config_file_and_flag_precedence(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# sweep settings\npreset = fig3\nl = 2\nomega = 0.5,1.0  # two points\nq=0.5\n")
    _, out, _ = run(["bounds", "--config", str(conf), "--l", "3"], tmp_path, capsys)
    header = out.read_text().splitlines()[0]
    assert " l=3 " in header and " q=0.5 " in header and " omega=0.5,1.0 " in header
    cfg = build_config("fig1", read_config_file(conf), {"q": 0.0})
    assert (cfg.l, cfg.q, cfg.family) == (2, 0.0, "schwarzschild")


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.conf"
    bad.write_text("colour = blue\n")
    with pytest.raises(ConfigError):
        read_config_file(bad)
    bad.write_text("just words\n")
    with pytest.raises(ConfigError):
        read_config_file(bad)
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "missing.conf")
    code, _, _ = run(["bounds", "--config", str(tmp_path / "missing.conf")], tmp_path, capsys)
    assert code == 1


def test_parse_omega():
    assert parse_omega("0.1:2.0:50").size == 50
    assert parse_omega("1").tolist() == [1.0]
    assert parse_omega("0.5, 1.5").tolist() == [0.5, 1.5]
    for bad in ("", "1:2", "1:2:0", "2,1", "0", "-1", "nan"):
        with pytest.raises(ConfigError):
            parse_omega(bad)


def test_unwritable_output(tmp_path, capsys):
    code = cli.main(["bounds", "--omega", "1", "--out", str(tmp_path / "no" / "such" / "dir.csv")])
    assert code == 1


def test_defaults_match_figure_parameters():
    cfg = RunConfig()
    assert (cfg.g, cfg.m, cfg.q, cfg.l) == (1.0, 2.0, 1.0, 1)


def test_tortoise_residual_helper():
    from greybound.spacetime import BlackHole

    assert cli.tortoise_residual(BlackHole(2.0, 1.0), 10.0) < 1e-8
