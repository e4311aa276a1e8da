import json
import math

import pytest

from thetaforge import RigorError, read_graph
from thetaforge.harness import (RunConfig, atomic_write_json,
                                check_vanishing_frequency, run_bertrand_table,
                                run_claim_check, run_construct,
                                run_lemma_checks, run_moments, run_scaling,
                                run_scan, write_bad_pairs_csv,
                                write_histogram_csv)


def test_config_precedence():
    cfg = RunConfig.from_sources({"q": 3, "seed": 9, "lambda": 4},
                                 {"q": 7, "tau": 3})
    assert cfg.q == 7 and cfg.seed == 9 and cfg.lam == 4 and cfg.tau == 3


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError):
        RunConfig.from_sources({"qq": 3}, None)


def test_config_none_values_ignored():
    cfg = RunConfig.from_sources({"q": 11}, {"q": None})
    assert cfg.q == 11


def test_resolve_params_via_target_n():
    cfg = RunConfig.from_sources(None, {"target_n": 10**6})
    p = cfg.resolve_params()
    assert p.q == 7  # Bertrand window (5, 10) at exponent 6
    assert p.n_a == 7**6


def test_resolve_c_default_is_moment_bound():
    cfg = RunConfig.from_sources(None, {"q": 5})
    assert cfg.resolve_c(cfg.resolve_params()) == 24


def test_construct_report_and_files(tmp_path):
    cfg = RunConfig.from_sources(None, {
        "q": 3, "seed": 1, "out": "g.txt", "out_dir": str(tmp_path)})
    report = run_construct(cfg)
    assert report["ok"]
    assert report["expected_edges"] == 729
    assert abs(report["edges_before"] - 729) <= 135
    assert report["max_path_count_after"] <= report["c"] - 1
    assert report["params"]["q"] == 3 and report["seed"] == 1
    g, header = read_graph(tmp_path / "g.txt")
    assert g.n_edges == report["edges_after"]
    saved = json.loads((tmp_path / "g.txt.report.json").read_text())
    assert saved == report

    # byte-identical on re-run
    before = (tmp_path / "g.txt").read_bytes()
    run_construct(cfg)
    assert (tmp_path / "g.txt").read_bytes() == before


def test_lemma_checks_pass(tmp_path):
    cfg = RunConfig.from_sources(None, {
        "seed": 3, "lemma_samples": 4000,
        "multi_cases": ((2, 7, 2, 20_000),)})
    report = run_lemma_checks(cfg)
    assert report["ok"]
    single = report["single_point"]
    assert abs(single["frequency"] - 1 / 7) <= 4 * single["sigma"]
    case = report["multi_point"][0]
    assert case["expected"] == pytest.approx(1 / 49)


def test_vanishing_frequency_input_validation():
    with pytest.raises(ValueError):
        check_vanishing_frequency(3, 2, 7, 2, 100, 0,
                                  points=[(1, 1, 1), (1, 1, 1)])
    with pytest.raises(RigorError):
        check_vanishing_frequency(3, 2, 5, 4, 100, 0)  # q <= C(4,2)
    with pytest.raises(RigorError):
        check_vanishing_frequency(3, 1, 7, 3, 100, 0)  # d < m - 1


def test_vanishing_frequency_explicit_points():
    out = check_vanishing_frequency(2, 2, 7, 2, 20_000, 5,
                                    points=[(0, 1), (3, 2)])
    assert out["ok"]


def test_bertrand_table():
    report = run_bertrand_table([10**6, 4096, 2], 3, 2)
    rows = report["rows"]
    assert rows[0]["p"] == 7
    assert rows[0]["ratio"] == pytest.approx(7**6 / 10**6)
    assert rows[1]["p"] == 3
    assert rows[1]["ratio"] == pytest.approx(729 / 4096)
    assert rows[2]["p"] is None and not rows[2]["ok"]
    assert not report["ok"]  # the flagged row fails the table
    good = run_bertrand_table([10**6, 4096], 3, 2)
    assert good["ok"]
    for row in good["rows"]:
        assert 4.0**-6 < row["ratio"] < 1.0


def test_scaling_quick():
    cfg = RunConfig.from_sources(None, {
        "q": None, "d_eff": 2, "r_eff": 0, "c": 24, "seed": 5,
        "primes": (3, 5, 7), "seeds_per_prime": 1})
    report = run_scaling(cfg)
    assert [row["q"] for row in report["rows"]] == [3, 5, 7]
    assert report["theoretical_slope"] == 1.0
    assert abs(report["fitted_slope"] - 1.0) <= 0.15
    assert report["ok"]
    for row in report["rows"]:
        assert row["n"] == row["q"] ** 6


def test_scaling_requires_three_primes():
    cfg = RunConfig.from_sources(None, {"primes": (5,)})
    with pytest.raises(ValueError):
        run_scaling(cfg)
    cfg = RunConfig.from_sources(None, {"primes": (3, 5)})
    with pytest.raises(ValueError):
        run_scaling(cfg)


def test_scaling_slope_invariant_under_prime_order():
    kwargs = {"q": None, "d_eff": 2, "r_eff": 0, "c": 24, "seed": 5,
              "seeds_per_prime": 1}
    a = run_scaling(RunConfig.from_sources(None,
                                           dict(kwargs, primes=(3, 5, 7))))
    b = run_scaling(RunConfig.from_sources(None,
                                           dict(kwargs, primes=(7, 3, 5))))
    assert a["fitted_slope"] == b["fitted_slope"]
    assert a["rows"] == b["rows"]


def test_run_moments_report():
    cfg = RunConfig.from_sources(None, {"q": 5, "trials": 15, "seed": 2})
    report = run_moments(cfg)
    assert report["bound"] == 24
    assert report["ok"]
    assert report["rigor_note"]  # q = 5 is below C(6, 2) = 15
    again = run_moments(cfg)
    assert again["estimate"] == report["estimate"]


def test_run_claim_check():
    cfg = RunConfig.from_sources(None, {"k": 3, "tau": 1, "lam": 2})
    report = run_claim_check(cfg, r=2, pools=3)
    assert report["ok"] and report["collections_checked"] == 81


def test_run_scan_and_csv(tmp_path):
    cfg = RunConfig.from_sources(None, {
        "q": 3, "seed": 1, "out": "g.txt", "out_dir": str(tmp_path)})
    run_construct(cfg)
    scan_cfg = RunConfig.from_sources(None, {
        "graph": str(tmp_path / "g.txt"), "out_dir": str(tmp_path)})
    report = run_scan(scan_cfg)
    assert report["ok"]
    assert sum(report["dichotomy"]["histogram"].values()) == 729 * 27

    hist = {int(k): v for k, v in report["dichotomy"]["histogram"].items()}
    write_histogram_csv(tmp_path / "h.csv", hist)
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "count,num_pairs"
    assert sum(int(ln.split(",")[1]) for ln in lines[1:]) == 729 * 27

    from thetaforge import complete_bipartite, scan_bad_pairs
    scan = scan_bad_pairs(complete_bipartite(3, 3), 4, k=3)
    write_bad_pairs_csv(tmp_path / "bad.csv", scan)
    lines = (tmp_path / "bad.csv").read_text().splitlines()
    assert lines[0] == "w1,w2,path_count,walk_count"
    assert len(lines) == 10


def test_atomic_write_json_is_canonical(tmp_path):
    atomic_write_json(tmp_path / "r.json", {"b": 1, "a": [2, 3]})
    assert (tmp_path / "r.json").read_text() == \
        '{\n  "a": [\n    2,\n    3\n  ],\n  "b": 1\n}\n'
