import json

import pytest

import ccpivot as cc
from ccpivot.cli import main


def run(args):
    return main(args)


def test_gen_deterministic(tmp_path):
    a, b = tmp_path / "a.cc", tmp_path / "b.cc"
    assert run(["gen", "complete", "--n", "9", "--p", "0.5", "--seed", "7", "-o", str(a)]) == 0
    assert run(["gen", "complete", "--n", "9", "--p", "0.5", "--seed", "7", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_requires_seed():
    assert run(["gen", "complete", "--n", "5", "--p", "0.5"]) == 64


def test_gen_gap_ti_no_seed_needed(tmp_path):
    out = tmp_path / "gap.cc"
    assert run(["gen", "gap-ti", "--n", "4", "-o", str(out)]) == 0
    inst = cc.parse_instance(out.read_text())
    assert inst.kind == "weighted" and inst.ti and inst.n == 8


def test_gen_kpartite(tmp_path):
    out = tmp_path / "kp.cc"
    assert run(["gen", "kpartite", "--parts", "3,3,3", "--p", "0.5", "--seed", "1", "-o", str(out)]) == 0
    inst = cc.parse_instance(out.read_text())
    assert inst.kind == "kpartite" and inst.n == 9


def test_lp_gap_ti_objective(tmp_path):
    inst_file, sol_file = tmp_path / "g.cc", tmp_path / "g.json"
    run(["gen", "gap-ti", "--n", "4", "-o", str(inst_file)])
    assert run(["lp", "--instance", str(inst_file), "-o", str(sol_file)]) == 0
    doc = json.loads(sol_file.read_text())
    assert doc["objective"] <= 12.0 + 1e-6
    assert "meta" in doc and "version" in doc["meta"]


def test_lp_all_plus_zero(tmp_path):
    inst_file, sol_file = tmp_path / "p.cc", tmp_path / "p.json"
    run(["gen", "complete", "--n", "5", "--p", "1.0", "--seed", "3", "-o", str(inst_file)])
    assert run(["lp", "--instance", str(inst_file), "-o", str(sol_file)]) == 0
    assert json.loads(sol_file.read_text())["objective"] == pytest.approx(0.0, abs=1e-9)


def test_lp_c4_gap_instance(tmp_path):
    inst, point = cc.gap_kpartite_lp_point(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)])
    inst_file, sol_file = tmp_path / "c4.cc", tmp_path / "c4.json"
    inst_file.write_text(cc.serialize_instance(inst))
    assert run(["lp", "--instance", str(inst_file), "-o", str(sol_file)]) == 0
    assert json.loads(sol_file.read_text())["objective"] <= 4.0 / 3.0 + 1e-6


def test_round_modes(tmp_path):
    inst_file = tmp_path / "i.cc"
    sol_file = tmp_path / "i.json"
    out1, out2, out3 = (tmp_path / f"r{i}.json" for i in range(3))
    run(["gen", "complete", "--n", "8", "--p", "0.5", "--seed", "5", "-o", str(inst_file)])
    run(["lp", "--instance", str(inst_file), "-o", str(sol_file)])

    base = ["round", "--instance", str(inst_file), "--lp-solution", str(sol_file),
            "--scheme", "complete206"]
    assert run(base + ["--mode", "random", "--seed", "9", "-o", str(out1)]) == 0
    assert run(base + ["--mode", "random", "--seed", "9", "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()

    assert run(base + ["--mode", "derand", "--alpha", "2.06", "-o", str(out3)]) == 0
    doc = json.loads(out3.read_text())
    assert doc["cost"] <= doc["alpha_lp"] + 1e-9

    assert run(base + ["--mode", "random"]) == 64  # missing seed
    assert run(base + ["--mode", "derand"]) == 64  # missing alpha


def test_round_weighted_dispatch(tmp_path):
    inst_file, sol_file, out = tmp_path / "w.cc", tmp_path / "w.json", tmp_path / "o.json"
    run(["gen", "weighted", "--n", "4", "--seed", "2", "-o", str(inst_file)])
    run(["lp", "--instance", str(inst_file), "-o", str(sol_file)])
    assert run([
        "round", "--instance", str(inst_file), "--lp-solution", str(sol_file),
        "--scheme", "weighted_ti_150", "--mode", "random", "--seed", "4", "-o", str(out),
    ]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["assignment"]) == 4


def test_certify_exit_codes(tmp_path):
    out = tmp_path / "cert.json"
    assert run(["certify", "complete206", "--alpha", "2.06", "--grid", "0.02",
                "--tol", "1e-9", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "PASS"
    assert run(["certify", "complete206", "--alpha", "2.0", "--grid", "0.02",
                "-o", str(out)]) == 1
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "FAIL"
    assert run(["certify", "kpartite3", "--alpha", "3", "--class", "kpartite",
                "--grid", "0.02", "-o", str(out)]) == 0


def test_certify_weighted_class(tmp_path):
    out = tmp_path / "w.json"
    assert run(["certify", "weighted_ti_150", "--alpha", "1.5", "--class", "weighted",
                "--grid", "0.05", "--tol", "1e-7", "-o", str(out)]) == 0
    assert run(["certify", "weighted_ti_153", "--alpha", "1.49", "--class", "weighted",
                "--grid", "0.05", "--tol", "1e-7", "-o", str(out)]) == 1


def test_certify_scheme_from_file(tmp_path):
    scheme_file = tmp_path / "acn.json"
    scheme_file.write_text(cc.get_scheme("acn_linear").to_json())
    assert run(["certify", str(scheme_file), "--alpha", "3", "--grid", "0.05"]) == 0


def test_certify_ineligible_exit_code(tmp_path):
    from ccpivot.rounding import Piece, PiecewiseFn, RoundingScheme

    bad = RoundingScheme(
        "sqrtplus",
        PiecewiseFn([Piece(0.0, 1.0, "power", (0.0, 1.0, 0.5))]),
        PiecewiseFn([Piece(0.0, 1.0, "linear", (0.0, 1.0))]),
    )
    scheme_file = tmp_path / "bad.json"
    scheme_file.write_text(bad.to_json())
    assert run(["certify", str(scheme_file), "--alpha", "4", "--grid", "0.1",
                "--no-full-grid"]) == 2
    # with the fallback enabled it runs the full grid instead
    assert run(["certify", str(scheme_file), "--alpha", "8", "--grid", "0.1"]) in (0, 1)


def test_unknown_scheme_is_usage_error():
    assert run(["certify", "no_such_scheme", "--alpha", "2"]) == 64


def test_opt_command(tmp_path):
    inst_file, out = tmp_path / "i.cc", tmp_path / "opt.json"
    run(["gen", "complete", "--n", "8", "--p", "0.5", "--seed", "5", "-o", str(inst_file)])
    assert run(["opt", "--instance", str(inst_file), "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    inst = cc.parse_instance(inst_file.read_text())
    _c, opt = cc.brute_force_opt(inst)
    assert doc["cost"] == pytest.approx(opt)
    assert cc.clustering_cost(inst, cc.Clustering(doc["assignment"])) == pytest.approx(opt)


def test_bench_csv(tmp_path):
    out = tmp_path / "bench.csv"
    assert run(["bench", "--family", "complete", "--n", "7", "--instances", "4",
                "--trials", "50", "--scheme", "complete206", "--alpha", "2.06",
                "--seed", "3", "-o", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("# meta:")
    header = lines[1].split(",")
    assert header == ["instance", "lp", "opt", "mean_alg", "std_alg", "derand_alg", "ratio_mean"]
    rows = [dict(zip(header, l.split(","))) for l in lines[2:]]
    assert len(rows) == 4
    for r in rows:
        lp, opt = float(r["lp"]), float(r["opt"])
        assert lp <= opt + 1e-6
        assert float(r["derand_alg"]) <= 2.06 * lp + 1e-9
        if lp > 0:
            assert float(r["ratio_mean"]) <= 2.06 + 3.0  # loose smoke bound


def test_bench_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["bench", "--n", "6", "--instances", "2", "--trials", "20", "--seed", "11"]
    run(args + ["-o", str(a)])
    run(args + ["-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_bench_jobs_match_serial(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["bench", "--n", "6", "--instances", "4", "--trials", "10", "--seed", "11"]
    run(args + ["-o", str(a)])
    run(args + ["--jobs", "2", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_data_error_exit_code(tmp_path):
    missing = tmp_path / "nope.cc"
    assert run(["lp", "--instance", str(missing)]) == 65
    bad = tmp_path / "bad.cc"
    bad.write_text("cc complete 3\n0 1 +\n")  # missing pairs
    assert run(["lp", "--instance", str(bad)]) == 65


def test_usage_error_exit_code():
    assert run(["frobnicate"]) == 64
    assert run(["certify"]) == 64
