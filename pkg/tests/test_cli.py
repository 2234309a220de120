import contextlib
import io
import json

import pytest

from approxenum import figures
from approxenum.cli import main
from approxenum.db import serialize_database
from approxenum.neighborhoods import TypeRegistry
from approxenum.query import print_query


@pytest.fixture
def workdir(tmp_path):
    registry = TypeRegistry()
    schema = tmp_path / "schema.txt"
    schema.write_text(figures.GRAPH_SCHEMA.serialize())
    db = tmp_path / "db.txt"
    db.write_text(serialize_database(figures.fallback_family(m=2, a_copies=1)))
    local_q = tmp_path / "local.query"
    local_q.write_text(print_query(figures.local_pair_a_query(registry)))
    demo_q = tmp_path / "demo.query"
    demo_q.write_text(print_query(figures.demo_query(registry)))
    return tmp_path


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def io_args(workdir, query="local.query"):
    return ["--schema", str(workdir / "schema.txt"), "--db", str(workdir / "db.txt"),
            "--d", "3", "--query", str(workdir / query)]


def test_exact_enumerate(workdir):
    code, out, err = run_cli(["exact-enumerate"] + io_args(workdir))
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[-1] == "-- end --"
    # the tree copy sits in the third block
    assert lines[:-1] == ["17 20"]


def test_enumerate_local_stream_deterministic(workdir):
    argv = ["enumerate", "--mode", "local", "--gamma", "0.01", "--seed", "7"] + io_args(workdir)
    code1, out1, err1 = run_cli(argv)
    code2, out2, err2 = run_cli(argv)
    assert code1 == code2 == 0
    assert out1 == out2  # byte-identical replay
    assert out1.strip().splitlines()[-1] == "-- end --"
    report = json.loads(err1.strip().splitlines()[-1])
    # the summary reports the audit constants
    assert {"alpha", "batch", "mu", "q", "seed"} <= set(report)


def test_enumerate_requires_seed(workdir):
    code, out, err = run_cli(["enumerate", "--mode", "local"] + io_args(workdir))
    assert code == 2 and "--seed" in err


def test_enumerate_mode_mismatch(workdir):
    code, out, err = run_cli(
        ["enumerate", "--mode", "local", "--seed", "3"] + io_args(workdir, "demo.query"))
    assert code == 3


def test_enumerate_max_outputs(workdir, tmp_path):
    # a dense workload truncates at the cap
    iso = tmp_path / "iso.txt"
    iso.write_text(serialize_database(figures.isolated_db(50)))
    registry = TypeRegistry()
    q = tmp_path / "iso.query"
    q.write_text(print_query(figures.isolated_pair_query(registry)))
    argv = ["enumerate", "--mode", "local", "--gamma", "0.2", "--seed", "5",
            "--max-outputs", "5", "--schema", str(workdir / "schema.txt"),
            "--db", str(iso), "--d", "3", "--query", str(q)]
    code, out, err = run_cli(argv)
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 6 and lines[-1] == "-- truncated --"


def test_enumerate_general_modes(workdir):
    for mode in ("general", "general-strengthened", "hanf"):
        argv = ["enumerate", "--mode", mode, "--gamma", "0.05", "--epsilon", "0.05",
                "--seed", "11", "--tester", "exact"] + io_args(workdir, "demo.query")
        if mode == "hanf":
            argv[argv.index("--tester") + 1] = "example22"
        code, out, err = run_cli(argv)
        assert code == 0, err
        assert out.strip().splitlines()[-1] in ("-- end --", "-- truncated --")


def test_parse_error_exit_code(workdir, tmp_path):
    bad = tmp_path / "bad.query"
    bad.write_text("QUERY k=2\n")
    code, out, err = run_cli(["enumerate", "--mode", "local", "--seed", "1",
                              "--schema", str(workdir / "schema.txt"),
                              "--db", str(workdir / "db.txt"), "--d", "3",
                              "--query", str(bad)])
    assert code == 2 and "error" in err


def test_member_exact_and_approx(workdir):
    base = ["member"] + io_args(workdir, "demo.query") + ["--tuple", "17,20"]
    code, out, _ = run_cli(base + ["--exact"])
    assert code == 0 and out.strip() == "true"
    code, out, _ = run_cli(base + ["--seed", "4", "--epsilon", "0.02"])
    assert code == 0 and out.strip() == "true"
    code, out, _ = run_cli(["member"] + io_args(workdir, "demo.query")
                           + ["--tuple", "1,4", "--seed", "4", "--epsilon", "0.02"])
    assert code == 0 and out.strip() == "false"  # marker vertex exists


def test_count_command(workdir):
    code, out, err = run_cli(["count", "--seed", "6", "--epsilon", "0.02",
                              "--lambda", "0.1"] + io_args(workdir, "demo.query"))
    assert code == 0
    estimate = float(out.strip())
    report = json.loads(err.strip().splitlines()[-1])
    assert estimate >= 0 and report["conn"] == 1


def test_test_command_demo_property(workdir):
    code, out, err = run_cli(["test", "--epsilon", "0.5", "--seed", "2",
                              "--schema", str(workdir / "schema.txt"),
                              "--db", str(workdir / "db.txt"), "--d", "3"])
    assert code == 0
    assert out.strip() in ("accept", "reject")
    # this instance carries a marker vertex: the property fails
    assert out.strip() == "reject"


def test_test_command_clauses(workdir):
    code, out, err = run_cli(["test", "--epsilon", "0.02", "--seed", "2",
                              "--tester", "exact"] + io_args(workdir, "demo.query"))
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "clause 1: accept"
    assert lines[1] == "clause 2: reject"


def test_split_command(workdir):
    code, out, err = run_cli(["split", "--tuple", "1,4", "--r", "2",
                              "--schema", str(workdir / "schema.txt"),
                              "--db", str(workdir / "db.txt"), "--d", "3"])
    assert code == 0
    assert out.startswith("group 1: coords=[1, 2]")


def test_bench_delay_single_row(workdir):
    code, out, err = run_cli(["bench-delay", "--sizes", "400", "--seed", "3",
                              "--mode", "local", "--max-outputs", "50"])
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 2 and lines[0].split()[0] == "n"


def test_seed_auto(workdir):
    argv = ["enumerate", "--mode", "local", "--gamma", "0.01", "--seed", "auto"] \
        + io_args(workdir)
    code, out, err = run_cli(argv)
    assert code == 0 and "seed:" in err


def test_selftest_scale_zero():
    code, out, err = run_cli(["selftest", "--scale", "0"])
    assert code == 0 and "vacuous" in out


def test_selftest_fault_injection():
    code, out, err = run_cli(["selftest", "--scale", "0.02", "--inject-fault",
                              "dedup", "--only", "C1"])
    assert code == 1
    assert any("C4 no duplicates] FAIL" in line for line in out.splitlines())
