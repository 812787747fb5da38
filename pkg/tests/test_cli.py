import json
import math

import numpy as np
import pytest

from synthcov.cli import main
from synthcov.dataio import read_data_csv, read_dist_cache, write_data_csv
from synthcov.randgen import RngState, draw_mvn

TOY = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]])


def _write_csv(path, rows, header=None):
    rows = np.asarray(rows, dtype=float)
    header = header or [f"x{j + 1}" for j in range(rows.shape[1])]
    write_data_csv(str(path), header, rows)
    return str(path)


def _run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


# ---------------------------------------------------------------------------
# synthesize
# ---------------------------------------------------------------------------

def test_synthesize_shape_and_header(tmp_path, capsys):
    src = _write_csv(tmp_path / "x.csv", TOY, header=["a", "b"])
    out = tmp_path / "v.csv"
    rc, stdout, _ = _run(capsys, "synthesize", "--input", src, "--seed", "1",
                         "--output", str(out))
    assert rc == 0
    header, v = read_data_csv(str(out))
    assert header == ["a", "b"]
    assert v.shape == (4, 2)


def test_synthesize_multiple_replicates(tmp_path, capsys):
    src = _write_csv(tmp_path / "x.csv", TOY)
    rc, _, _ = _run(capsys, "synthesize", "--input", src, "--m", "3", "--seed", "2",
                    "--output", str(tmp_path / "v.csv"))
    assert rc == 0
    files = sorted(p.name for p in tmp_path.glob("v_*.csv"))
    assert files == ["v_1.csv", "v_2.csv", "v_3.csv"]
    _, v1 = read_data_csv(str(tmp_path / "v_1.csv"))
    _, v2 = read_data_csv(str(tmp_path / "v_2.csv"))
    assert not np.array_equal(v1, v2)


def test_synthesize_large_sample_mean(tmp_path, capsys):
    src = _write_csv(tmp_path / "x.csv", TOY)
    out = tmp_path / "v.csv"
    rc, _, _ = _run(capsys, "synthesize", "--input", src, "--n-imp", "100000",
                    "--seed", "3", "--output", str(out))
    assert rc == 0
    _, v = read_data_csv(str(out))
    # Input column means are (1, 1); sigma_hat diagonal is 4/3.
    bound = 3.0 * math.sqrt((4.0 / 3.0) / 100000)
    assert np.abs(v.mean(axis=0) - 1.0).max() <= bound


def test_synthesize_singular_input_exit_code(tmp_path, capsys):
    rows = np.column_stack([np.arange(5.0), np.full(5, 7.0)])
    src = _write_csv(tmp_path / "x.csv", rows)
    rc, _, err = _run(capsys, "synthesize", "--input", src, "--output",
                      str(tmp_path / "v.csv"))
    assert rc == 3
    assert "error:" in err
    assert not (tmp_path / "v.csv").exists()


def test_synthesize_missing_input_is_io_error(tmp_path, capsys):
    rc, _, _ = _run(capsys, "synthesize", "--input", str(tmp_path / "nope.csv"),
                    "--output", str(tmp_path / "v.csv"))
    assert rc == 4


def test_parse_error_on_ragged_csv(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n3\n")
    rc, _, err = _run(capsys, "synthesize", "--input", str(path), "--output",
                      str(tmp_path / "v.csv"))
    assert rc == 2


# ---------------------------------------------------------------------------
# nulldist
# ---------------------------------------------------------------------------

def test_nulldist_cache_roundtrip(tmp_path, capsys):
    cache = tmp_path / "gv.json"
    rc, stdout, _ = _run(capsys, "nulldist", "--test", "gv", "--n", "10", "--p", "4",
                         "--iterations", "2000", "--seed", "7", "--cache", str(cache))
    assert rc == 0
    dist = read_dist_cache(str(cache))
    assert dist.meta() == {"kind": "gv", "nsample": 10, "pvariates": 4, "part": None,
                           "iterations": 2000, "seed": 7}
    lines = stdout.strip().splitlines()
    assert lines[0] == "gamma,quantile"
    assert len(lines) == 12
    # Reload must reproduce the exact binary doubles that were simulated.
    from synthcov.nulldist import gv_dist

    direct = gv_dist(10, 4, 2000, RngState(7))
    assert np.array_equal(dist.values, direct.values)


def test_nulldist_median_self_consistency(tmp_path, capsys):
    medians = []
    caches = []
    for seed in ("100", "200"):
        cache = tmp_path / f"sph{seed}.json"
        rc, stdout, _ = _run(capsys, "nulldist", "--test", "sph", "--n", "10", "--p", "4",
                             "--iterations", "8000", "--seed", seed, "--cache", str(cache))
        assert rc == 0
        row = [l for l in stdout.splitlines() if l.startswith("0.5,")][0]
        medians.append(float(row.split(",")[1]))
        caches.append(read_dist_cache(str(cache)))
    # Order-statistic estimate of the median standard error.
    vals = caches[0].values
    half = len(vals) // 2
    spread = int(math.sqrt(len(vals)) / 2)
    se = (vals[half + spread] - vals[half - spread]) / 2.0
    assert abs(medians[0] - medians[1]) <= 3.0 * math.sqrt(2.0) * se


def test_nulldist_part_usage_errors(tmp_path, capsys):
    rc, _, err = _run(capsys, "nulldist", "--test", "ind", "--n", "10", "--p", "4",
                      "--cache", str(tmp_path / "c.json"))
    assert rc == 2 and "part" in err
    rc, _, _ = _run(capsys, "nulldist", "--test", "gv", "--n", "10", "--p", "4",
                    "--part", "1", "--cache", str(tmp_path / "c.json"))
    assert rc == 2


# ---------------------------------------------------------------------------
# test
# ---------------------------------------------------------------------------

def _synthetic_file(tmp_path, name="v.csv", n=20, p=4, seed=5):
    rng = RngState(seed)
    x = draw_mvn(rng, np.zeros(p), np.eye(p), n)
    from synthcov.synthesis import fit, sim_synth_data

    v = sim_synth_data(fit(x), rng)
    return _write_csv(tmp_path / name, v)


def test_test_sph_json_schema(tmp_path, capsys):
    src = _synthetic_file(tmp_path)
    rc, stdout, _ = _run(capsys, "test", "--test", "sph", "--input", src,
                         "--iterations", "2000", "--seed", "1")
    assert rc == 0
    doc = json.loads(stdout)
    assert set(doc) == {"kind", "observed", "alpha", "thresholds", "reject",
                        "p_value", "dist_meta"}
    assert doc["kind"] == "sph"
    assert doc["alpha"] == 0.05
    assert isinstance(doc["reject"], bool)
    assert 0.0 < doc["p_value"] <= 1.0


def test_test_cache_hit_matches_inline(tmp_path, capsys):
    src = _synthetic_file(tmp_path)
    cache = tmp_path / "sph.json"
    rc, inline_out, _ = _run(capsys, "test", "--test", "sph", "--input", src,
                             "--iterations", "2000", "--seed", "9")
    assert rc == 0
    rc, first, _ = _run(capsys, "test", "--test", "sph", "--input", src,
                        "--iterations", "2000", "--seed", "9", "--cache", str(cache))
    assert rc == 0 and cache.exists()
    rc, second, _ = _run(capsys, "test", "--test", "sph", "--input", src,
                         "--iterations", "2000", "--seed", "9", "--cache", str(cache))
    assert rc == 0
    assert inline_out == first == second


def test_test_cache_metadata_mismatch(tmp_path, capsys):
    cache = tmp_path / "sph.json"
    rc, _, _ = _run(capsys, "nulldist", "--test", "sph", "--n", "10", "--p", "4",
                    "--iterations", "500", "--seed", "0", "--cache", str(cache))
    assert rc == 0
    src = _synthetic_file(tmp_path, n=20)  # cache was built for n = 10
    rc, _, err = _run(capsys, "test", "--test", "sph", "--input", src, "--cache", str(cache))
    assert rc == 2
    assert "nsample" in err


def test_test_cano_plug_in_never_rejects(tmp_path, capsys):
    src = _synthetic_file(tmp_path, n=15)
    _, v = read_data_csv(src)
    from synthcov.teststats import plug_in_coefficients, summarize

    d0 = plug_in_coefficients(summarize(v), 1)
    d0_path = _write_csv(tmp_path / "d0.csv", d0.values)
    rc, stdout, _ = _run(capsys, "test", "--test", "cano", "--input", src, "--part", "1",
                         "--delta0", d0_path, "--iterations", "1000", "--seed", "2")
    assert rc == 0
    doc = json.loads(stdout)
    assert doc["observed"] == 0.0
    assert doc["reject"] is False


def test_test_gv_dimension_mismatch(tmp_path, capsys):
    src = _synthetic_file(tmp_path, p=4)
    sigma0 = _write_csv(tmp_path / "s0.csv", np.eye(3))
    rc, _, _ = _run(capsys, "test", "--test", "gv", "--input", src, "--sigma0", sigma0,
                    "--iterations", "500")
    assert rc == 2


def test_test_missing_hypothesis_inputs(tmp_path, capsys):
    src = _synthetic_file(tmp_path)
    rc, _, err = _run(capsys, "test", "--test", "gv", "--input", src)
    assert rc == 2 and "sigma0" in err
    rc, _, err = _run(capsys, "test", "--test", "cano", "--input", src, "--part", "1")
    assert rc == 2 and "delta0" in err


def test_test_sph_size_over_seeded_runs(tmp_path, capsys):
    # Data synthesized from an identity covariance should rarely be rejected.
    cache = tmp_path / "sph30.json"
    rc, _, _ = _run(capsys, "nulldist", "--test", "sph", "--n", "30", "--p", "4",
                    "--iterations", "4000", "--seed", "77", "--cache", str(cache))
    assert rc == 0
    keep = 0
    runs = 50
    for k in range(runs):
        x = np.random.default_rng(1000 + k).standard_normal((30, 4))
        src = _write_csv(tmp_path / "x.csv", x)
        out = tmp_path / "v.csv"
        rc, _, _ = _run(capsys, "synthesize", "--input", src, "--seed", str(k),
                        "--output", str(out))
        assert rc == 0
        rc, stdout, _ = _run(capsys, "test", "--test", "sph", "--input", str(out),
                             "--cache", str(cache))
        assert rc == 0
        keep += not json.loads(stdout)["reject"]
    assert keep / runs >= 0.94


# ---------------------------------------------------------------------------
# ci
# ---------------------------------------------------------------------------

def test_ci_json_fields(tmp_path, capsys):
    src = _synthetic_file(tmp_path)
    rc, stdout, _ = _run(capsys, "ci", "--input", src, "--iterations", "2000", "--seed", "4")
    assert rc == 0
    doc = json.loads(stdout)
    assert set(doc) == {"lower", "upper", "alpha", "target"}
    assert 0.0 < doc["lower"] < doc["upper"]
    assert doc["target"] == "generalized variance |Sigma|"


# ---------------------------------------------------------------------------
# coverage
# ---------------------------------------------------------------------------

def test_coverage_builtin_deterministic_bytes(tmp_path, capsys):
    args = ["coverage", "--builtin", "--reps", "300", "--iterations", "400", "--seed", "3"]
    out1, out2, out3 = (tmp_path / f"r{i}.csv" for i in range(3))
    assert _run(capsys, *args, "--out", str(out1))[0] == 0
    assert _run(capsys, *args, "--out", str(out2))[0] == 0
    assert _run(capsys, *args, "--workers", "4", "--out", str(out3))[0] == 0
    assert out1.read_bytes() == out2.read_bytes() == out3.read_bytes()
    lines = out1.read_text().strip().splitlines()
    assert lines[0] == "test,sigma,p1,n,cov,stderr"
    assert len(lines) == 33


def test_coverage_single_rep_binary(tmp_path, capsys):
    out = tmp_path / "r.csv"
    rc, _, _ = _run(capsys, "coverage", "--builtin", "--reps", "1", "--iterations", "200",
                    "--seed", "2", "--out", str(out))
    assert rc == 0
    covs = [float(line.split(",")[4]) for line in out.read_text().strip().splitlines()[1:]]
    assert set(covs) <= {0.0, 1.0}


def test_coverage_json_format(tmp_path, capsys):
    out = tmp_path / "r.json"
    rc, _, _ = _run(capsys, "coverage", "--builtin", "--reps", "50", "--iterations", "100",
                    "--seed", "1", "--format", "json", "--out", str(out))
    assert rc == 0
    doc = json.loads(out.read_text())
    assert len(doc["scenarios"]) == 32
    row = doc["scenarios"][0]
    assert set(row) == {"test", "sigma", "p1", "n", "cov", "stderr"}


def test_coverage_config_file(tmp_path, capsys):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({
        "scenarios": [
            {"test": "ind", "n": 12, "sigma": "sigma4", "part": 2, "reps": 60,
             "mc_iterations": 150, "seed": 1},
            {"test": "sph", "n": 10,
             "sigma": [[2.0, 0.0], [0.0, 2.0]], "mu": [0.0, 0.0], "label": "iso2"},
        ]
    }))
    out = tmp_path / "r.csv"
    rc, _, _ = _run(capsys, "coverage", "--config", str(config), "--reps", "40",
                    "--iterations", "100", "--seed", "5", "--out", str(out))
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 3
    assert lines[1].startswith("ind,sigma4,2,12,")
    assert lines[2].startswith("sph,iso2,,10,")


def test_coverage_rejects_bad_config(tmp_path, capsys):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"scenarios": [{"test": "sph"}]}))
    rc, _, _ = _run(capsys, "coverage", "--config", str(config), "--out",
                    str(tmp_path / "r.csv"))
    assert rc == 2
    assert not (tmp_path / "r.csv").exists()


# ---------------------------------------------------------------------------
# export-dist
# ---------------------------------------------------------------------------

def test_export_dist_format(tmp_path, capsys):
    out = tmp_path / "dist.csv"
    rc, _, _ = _run(capsys, "export-dist", "--test", "gv", "--sigma", "sigma3", "--n", "10",
                    "--reps", "50", "--iterations", "80", "--seed", "6", "--out", str(out))
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("sample_kind,")
    assert "gv" in lines[0] and "sigma3" in lines[0] and "n10" in lines[0]
    assert len(lines) == 1 + 50 + 80
    kinds = {line.split(",")[0] for line in lines[1:]}
    assert kinds == {"observed", "null"}


def test_export_dist_requires_part_for_ind(tmp_path, capsys):
    rc, _, _ = _run(capsys, "export-dist", "--test", "ind", "--sigma", "sigma1", "--n", "10",
                    "--out", str(tmp_path / "d.csv"))
    assert rc == 2
