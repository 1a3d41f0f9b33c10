import csv
import io
import json
import math
from fractions import Fraction

import pytest

from commlab._seeds import derive_seed
from commlab.bitmatrix import (
    ConstructionParams,
    Rectangle,
    format_bmat,
    gen_constant,
    gen_identity,
    gen_row_regular,
    read_bmat,
    submatrix,
    write_bmat,
)
from commlab.cli import main
from commlab.discrepancy import disc_exact
from commlab.protocols import error_monte_carlo, run_deterministic, tree_from_dict
from commlab.structure import certify
from commlab.zoo import compile_sparse_protocol


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_gen_writes_row_regular_file(tmp_path, capsys):
    path = tmp_path / "m.bmat"
    code, out, _ = run(capsys, "gen", "--n", "16", "--r", "4", "--seed", "7", "-o", str(path))
    assert code == 0
    assert json.loads(out) == {"n": 16, "r": 4, "seed": 7, "output": str(path)}
    lines = path.read_text().splitlines()
    assert lines[0] == "16 16" and len(lines) == 17
    assert all(len(line) == 16 and line.count("1") == 4 for line in lines[1:])
    assert read_bmat(path) == gen_row_regular(ConstructionParams(16, 4, 7))


def test_gen_from_w_gives_all_ones(capsys):
    code, out, err = run(capsys, "gen", "--n", "8", "--w", "1")
    assert code == 0
    assert out == format_bmat(gen_constant(8, 8, 1))
    assert json.loads(err)["r"] == 8


@pytest.mark.parametrize("argv", [
    ["gen", "--n", "4", "--r", "9", "--seed", "1"],
    ["gen", "--n", "4", "--r", "2"],
    ["gen", "--n", "4", "--r", "2", "--w", "1", "--seed", "1"],
    ["gen", "--n", "4", "--r", "2", "--seed", str(2**64)],
])
def test_gen_parameter_errors(argv, capsys):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("commlab:")


def test_disc_exact_identity_2(tmp_path, capsys):
    path = tmp_path / "i2.bmat"
    write_bmat(gen_identity(2), path)
    csv_path = tmp_path / "d.csv"
    code, out, _ = run(capsys, "disc", str(path), "--method", "exact", "-o", str(csv_path))
    assert code == 0
    doc = json.loads(out)
    assert Fraction(doc["value"]) == Fraction(1, 4)
    assert doc["bound"] == pytest.approx(math.log2(4 / 3), abs=1e-9)
    (row,) = read_csv(csv_path)
    assert (row["n"], row["value_num"], row["value_den"]) == ("2", "1", "4")


def test_disc_local_zero_restarts_deterministic(tmp_path, capsys):
    path = tmp_path / "m.bmat"
    write_bmat(gen_row_regular(ConstructionParams(30, 5, 2)), path)
    first = run(capsys, "disc", str(path), "--method", "local", "--seed", "1")
    second = run(capsys, "disc", str(path), "--method", "local", "--seed", "1")
    assert first == second and first[0] == 0
    assert json.loads(first[1])["restarts"] == 0


def test_disc_errors(tmp_path, capsys):
    assert run(capsys, "disc", str(tmp_path / "missing.bmat"))[0] == 1
    big = tmp_path / "big.bmat"
    write_bmat(gen_row_regular(ConstructionParams(26, 3, 1)), big)
    code, _, err = run(capsys, "disc", str(big), "--method", "exact")
    assert code == 2 and "--method local" in err
    const = tmp_path / "c.bmat"
    write_bmat(gen_constant(3, 3, 1), const)
    assert run(capsys, "disc", str(const))[0] == 2
    bad = tmp_path / "bad.bmat"
    bad.write_text("2 2\n1\n")
    assert run(capsys, "disc", str(bad))[0] == 1


def test_verify_ii_identity(tmp_path, capsys):
    path = tmp_path / "i.bmat"
    write_bmat(gen_identity(64), path)
    code, out, _ = run(capsys, "verify-ii", str(path), "--k", "8", "--samples", "30", "--seed", "1",
                       "--mc-samples", "200")
    assert code == 0
    doc = json.loads(out)
    assert doc["peelable_fraction"] == 1.0 and doc["costs"] == [20]


def test_verify_ii_all_ones(tmp_path, capsys):
    path = tmp_path / "ones.bmat"
    write_bmat(gen_constant(12, 12, 1), path)
    csv_path = tmp_path / "s.csv"
    code, out, _ = run(capsys, "verify-ii", str(path), "--k", "4", "--samples", "10", "--seed", "1",
                       "-o", str(csv_path))
    doc = json.loads(out)
    assert code == 0 and doc["peelable_fraction"] == 0.0 and doc["witnesses"] == 10
    assert all(r["peelable"] == "0" and r["witness_rows"] == "4" for r in read_csv(csv_path))


def test_verify_ii_rows_rederivable(tmp_path, capsys):
    m = gen_row_regular(ConstructionParams(256, 4, 3))
    path = tmp_path / "m.bmat"
    write_bmat(m, path)
    csv_path = tmp_path / "s.csv"
    code, _, _ = run(capsys, "verify-ii", str(path), "--k", "8", "--samples", "12", "--seed", "9",
                     "--mc-subsample", "2", "--mc-samples", "500", "-o", str(csv_path))
    assert code == 0
    rows = read_csv(csv_path)
    assert len(rows) == 12
    for row in rows:
        rect = Rectangle(tuple(map(int, row["rows"].split())), tuple(map(int, row["cols"].split())))
        f = submatrix(m, rect)
        cert = certify(f)
        assert row["peelable"] == "1"
        if row["mc_max_error"]:
            comp = compile_sparse_protocol(cert, 4)
            err = error_monte_carlo(comp.protocol, f, 500, derive_seed(9, int(row["sample"])))
            assert row["mc_max_error"] == f"{err.max_error:.6f}"
            assert row["mc_ones_errors"] == "0"


def test_counterexample_report(tmp_path, capsys):
    csv_path = tmp_path / "c.csv"
    code, out, _ = run(capsys, "counterexample", "--n", "8", "12", "--r", "2", "4", "--seed", "5",
                       "--samples", "20", "-o", str(csv_path))
    assert code == 0 and json.loads(out)["rows"] == 4
    rows = read_csv(csv_path)
    assert all(r["seed"] == "5" for r in rows)
    assert all(r["peelable_fraction"] == "1" for r in rows)
    for r in rows:
        m = gen_row_regular(ConstructionParams(int(r["n"]), int(r["r"]), 5))
        v = disc_exact(m).value
        assert (int(r["disc_num"]), int(r["disc_den"])) == (v.numerator, v.denominator)


def test_counterexample_to_stdout_and_w(capsys):
    code, out, _ = run(capsys, "counterexample", "--n", "8", "--w", "0", "--seed", "1", "--samples", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[1].startswith("n,r,seed") and lines[2].startswith("8,1,1,")


def test_derandomize_success_and_round_trip(tmp_path, capsys):
    path = tmp_path / "trees.json"
    code, out, _ = run(capsys, "derandomize", "--n", "4", "--t", "33", "--seed", "0", "-o", str(path))
    assert code == 0
    doc = json.loads(out)
    assert doc["verified"] and doc["t"] == 33 and doc["max_cost"] <= 3
    trees = [tree_from_dict(d) for d in json.loads(path.read_text())["trees"]]
    assert len(trees) == 33
    for i in range(4):
        for j in range(4):
            votes = sum(run_deterministic(tr, i, j).output for tr in trees)
            assert (2 * votes > 33) == (i == j)


def test_derandomize_failure_exit_code(capsys):
    # 2-bit fingerprints collide on 8 keys, so no single tree computes I_8
    code, _, err = run(capsys, "derandomize", "--n", "8", "--t", "1", "--seed", "1")
    assert code == 3 and "attempts" in err


def test_derandomize_even_t_is_parameter_error(capsys):
    assert run(capsys, "derandomize", "--n", "4", "--t", "2", "--seed", "1")[0] == 2


def test_module_entry_point():
    from cli_golden import run_cli

    proc = run_cli(["gen", "--n", "3", "--r", "1", "--seed", "2"], cwd=".")
    assert proc.returncode == 0 and proc.stdout.startswith(b"3 3\n")
