import io
import json
import math

import pytest

from blaschke_lab import ZeroSequence, blaschke_functional, disk, make_test_function, unit_disk
from blaschke_lab.cli import emit_plot_data, parse_complex, parse_domain, parse_real, plot_csv, read_plot_csv, run
from blaschke_lab.exprcore.grid import sample_grid
from blaschke_lab.potential.green import GreenKernel

from cli_corpus import CORPUS, run_cli, write_inputs


def _run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    write_inputs(tmp_path)
    monkeypatch.chdir(tmp_path)
    return tmp_path


# -- argument decoding ----------------------------------------------------------

def test_parse_real_fraction():
    assert parse_real("1/256") == 1 / 256
    assert parse_real("2.5e-3") == 0.0025


@pytest.mark.parametrize("text,value", [("0.5i", 0.5j), ("-0.2-0.3i", -0.2 - 0.3j), ("i", 1j), ("3", 3)])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_domain_kinds():
    assert parse_domain("unitdisk").kind == "unitdisk"
    d = parse_domain("disk:0.5i,2")
    assert d.center == 0.5j and d.radius == 2
    assert parse_domain("moebius:1,1,-1,1").kind == "moebius"


# -- commands ----------------------------------------------------------------------

def test_blaschke_example(workdir):
    code, out, _ = _run(["blaschke", "--f", "blaschke(0.9;0.99)", "--v", "loginv", "--d0", "0.5"])
    assert code == 0
    assert json.loads(out)["lhs"] == 0.115410851511328


def test_zeros_example(workdir):
    code, out, _ = _run(["zeros", "--f", "z^2-0.25", "--region", "disk:0,1"])
    data = json.loads(out)
    assert code == 0
    assert sorted(z["re"] for z in data["zeros"]) == [-0.5, 0.5]
    assert [z["mult"] for z in data["zeros"]] == [1, 1]


def test_missing_file_exit_3(workdir):
    code, out, err = _run(["implication", "--f", "blaschke(0.5)", "--M", "0", "--v", "badfile.json"])
    assert code == 3
    assert out == ""
    assert json.loads(err)["error"]["type"] == "FileNotFoundError"


def test_unknown_command_exit_3(workdir):
    code, _, err = _run(["bogus"])
    assert code == 3
    assert "error" in json.loads(err)


def test_parse_error_exit_3(workdir):
    code, _, err = _run(["zeros", "--f", "exp(z", "--region", "disk:0,1"])
    assert code == 3
    assert json.loads(err)["error"]["type"] == "ParseError"


def test_config_overrides_flags(workdir):
    (workdir / "cfg.json").write_text(json.dumps({"f": "blaschke(0.6)", "v": "loginv"}))
    code, out, _ = _run(["blaschke", "--f", "blaschke(0.9)", "--config", "cfg.json"])
    assert code == 0
    assert json.loads(out)["lhs"] == pytest.approx(-math.log(0.6), abs=1e-14)


def test_bad_config_key(workdir):
    (workdir / "cfg.json").write_text(json.dumps({"nonsense": 1}))
    assert _run(["blaschke", "--config", "cfg.json"])[0] == 3


def test_spec_from_file(workdir):
    (workdir / "f.txt").write_text("blaschke(0.9; 0.99)\n")
    code, out, _ = _run(["blaschke", "--f", "@f.txt"])
    assert code == 0 and json.loads(out)["lhs"] == 0.115410851511328


def test_out_file(workdir):
    code, out, _ = _run(["blaschke", "--f", "blaschke(0.9)", "--out", "r.json"])
    assert code == 0 and out == ""
    assert json.loads((workdir / "r.json").read_text())["verdict"] == "HOLDS"


def test_trace_csv(workdir):
    code, out, _ = _run(["blaschke", "--f", "blaschke(0.9;0.99)", "--format", "csv"])
    assert code == 0
    assert out.splitlines() == ["k,abs_zk,partial_sum", "1,0.9,0.105360515657826", "2,0.99,0.115410851511328"]


def test_csv_unsupported_command(workdir):
    assert _run(["inequality-c", "--u", "abs(z)^2", "--M", "abs(z)^2", "--z0", "0.1", "--format", "csv"])[0] == 3


def test_l_bound_holds(workdir):
    B = "blaschke(0.3; 0.6i)"
    code, out, _ = _run(["l-bound", "--u0", "0", "--f", B, "--M", f"logabs({B})", "--z", "0.1", "--r", "0.5",
                         "--eps", "0.5"])
    assert code == 0
    assert json.loads(out)["verdict"] == "HOLDS"


def test_validate_power(workdir):
    code, out, _ = _run(["validate-v", "--v", "power:2", "--d0", "0.75"])
    data = json.loads(out)
    assert code == 0
    assert data["flags"] == {"normal_derivative_vanishes": True, "vanishes_on_boundary": True}


# -- plot data --------------------------------------------------------------------

def test_green_field_csv(tmp_path):
    field = sample_grid(GreenKernel(unit_disk(), 0.2), -1 - 1j, 1 + 1j, 1 / 8, real=True)
    rows = read_plot_csv(emit_plot_data(field, tmp_path / "g.csv"))
    assert rows[0] == ["re", "im", "value"]
    assert len(rows) == 1 + 17 * 17


def test_sum_trace_csv(tmp_path):
    v = make_test_function("loginv", unit_disk(inner=disk(0, 0.5)))
    trace = blaschke_functional(v, ZeroSequence.from_points([0.9, 0.99], region=unit_disk()))
    rows = read_plot_csv(emit_plot_data(trace, tmp_path / "t.csv"))
    assert rows[0] == ["k", "abs_zk", "partial_sum"]
    assert rows[2] == ["2", "0.99", "0.115410851511328"]


def test_empty_trace_csv_is_header_only(tmp_path):
    v = make_test_function("loginv", unit_disk(inner=disk(0, 0.5)))
    trace = blaschke_functional(v, ZeroSequence.from_points([], region=unit_disk()))
    assert plot_csv(trace) == "k,abs_zk,partial_sum\n"


# -- golden corpus ------------------------------------------------------------------

@pytest.mark.parametrize("name,argv,expected", CORPUS, ids=[c[0] for c in CORPUS])
def test_golden_invocation(tmp_path, name, argv, expected):
    write_inputs(tmp_path)
    first = run_cli(argv, tmp_path)
    second = run_cli(argv, tmp_path)
    assert first[0] == expected
    assert first == second
