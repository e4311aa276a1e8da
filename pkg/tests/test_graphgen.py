import numpy as np
import pytest

from thetaforge import (CapacityError, build_graph, complete_bipartite,
                        derive_params, expected_edges, from_edges,
                        prune_bad_pairs, read_graph, write_graph)
from thetaforge.graphgen import VertexCodec, check_invariants
from thetaforge.mpoly import PolySystem, from_terms, sample_system
from thetaforge.params import Reduced

SMALL = Reduced(d_eff=2, r_eff=0)


def test_codec_roundtrip(rng):
    codec = VertexCodec(q=5, dim=4)
    for _ in range(50):
        vec = rng.integers(0, 5, size=4)
        assert np.array_equal(codec.decode(codec.encode(vec)), vec)
    ids = rng.integers(0, codec.size, size=40)
    back = np.array([codec.encode(v) for v in codec.decode_block(ids)])
    assert np.array_equal(back, ids)


def test_codec_big_endian():
    codec = VertexCodec(q=3, dim=3)
    assert codec.encode((1, 0, 2)) == 1 * 9 + 0 * 3 + 2
    assert codec.all_points().tolist()[:4] == [[0, 0, 0], [0, 0, 1],
                                               [0, 0, 2], [0, 1, 0]]


def test_expected_edges_values():
    assert expected_edges(derive_params(3, 1, 2, 5)).exact == 15625
    assert expected_edges(derive_params(3, 1, 2, 3)).exact == 729
    p = derive_params(3, 1, 2, 7)
    e = expected_edges(p)
    assert e.exact == p.q**(p.t - p.gamma)
    assert e.lower_bound == p.q**((p.lam + p.tau) * (p.k + 1) // 2)
    # gamma = x(lambda+tau) makes the two coincide
    assert e.exact == e.lower_bound


def test_empty_system_gives_complete_graph():
    p = derive_params(3, 1, 2, 2, SMALL)
    g = build_graph(p, system=PolySystem(polys=()))
    assert g.n_edges == p.n_a * p.n_b == 2**9
    check_invariants(g)


@pytest.mark.parametrize("q,seed", [(2, 0), (2, 3), (3, 1)])
def test_fast_path_equals_naive(q, seed):
    p = derive_params(3, 1, 2, q, SMALL)
    fast = build_graph(p, master_seed=seed, chunk_rows=17)
    naive = build_graph(p, master_seed=seed, method="naive")
    assert np.array_equal(fast.indices_a, naive.indices_a)
    assert np.array_equal(fast.indptr_a, naive.indptr_a)
    check_invariants(fast)


def test_build_deterministic_across_chunks_and_threads():
    p = derive_params(3, 1, 2, 3, Reduced(d_eff=6, r_eff=2))
    runs = [build_graph(p, master_seed=11),
            build_graph(p, master_seed=11),
            build_graph(p, master_seed=11, chunk_rows=100),
            build_graph(p, master_seed=11, threads=2, chunk_rows=64)]
    for g in runs[1:]:
        assert np.array_equal(g.indices_a, runs[0].indices_a)
        assert np.array_equal(g.indptr_a, runs[0].indptr_a)


def test_single_run_edge_count_in_band():
    # E|E| = 729; 5 sqrt(729) = 135
    p = derive_params(3, 1, 2, 3, Reduced(d_eff=6, r_eff=2))
    g = build_graph(p, master_seed=1)
    assert abs(g.n_edges - 729) <= 135


def test_mean_edge_count_over_seeds():
    # mean over 40 seeds within 4 standard errors of 729, where one
    # build's variance is at most its mean (pairwise independence)
    p = derive_params(3, 1, 2, 3, Reduced(d_eff=6, r_eff=2))
    counts = [build_graph(p, master_seed=s).n_edges for s in range(40)]
    se = np.sqrt(729 / 40)
    assert abs(np.mean(counts) - 729) <= 4 * se


def test_pair_cap():
    p = derive_params(3, 1, 2, 5)
    with pytest.raises(CapacityError):
        build_graph(p, master_seed=0, pair_cap=1000)


def test_from_edges_validation():
    with pytest.raises(ValueError):
        from_edges(2, 2, [0, 0], [1, 1])  # duplicate
    with pytest.raises(ValueError):
        from_edges(2, 2, [2], [0])  # out of range
    with pytest.raises(ValueError):
        from_edges(2, 2, [0], [1], removed_b=frozenset({1}))


def test_check_invariants_catches_corruption():
    g = complete_bipartite(3, 3)
    bad = from_edges(3, 3, *g.edges())
    bad.indices_a[0] = 2  # break forward/reverse agreement
    bad.indices_a[1] = 2  # and sortedness
    with pytest.raises(ValueError):
        check_invariants(bad)


def test_prune_noop_when_clean():
    g = complete_bipartite(3, 3)
    pruned, report = prune_bad_pairs(g, c=5, k=3)
    assert pruned.n_edges == g.n_edges
    assert report.bad_pairs == () and report.removed_b == ()
    assert report.max_path_count_before == 4


def test_prune_complete_graph_removes_all_of_b():
    # K_{3,3} has 4 length-3 paths per cross pair; at c = 2 every pair
    # is bad, so every B-vertex goes and no edges remain
    g = complete_bipartite(3, 3)
    pruned, report = prune_bad_pairs(g, c=2, k=3)
    assert pruned.n_edges == 0
    assert set(report.removed_b) == {0, 1, 2}
    assert len(report.bad_pairs) == 9
    assert pruned.removed_b == frozenset({0, 1, 2})
    check_invariants(pruned)


def test_prune_seeded_construction_post_scan():
    from thetaforge import scan_bad_pairs
    p = derive_params(3, 1, 2, 5, Reduced(d_eff=6, r_eff=2))
    g = build_graph(p, master_seed=2)
    pruned, report = prune_bad_pairs(g, c=24)
    assert report.max_path_count_after <= 23
    assert not scan_bad_pairs(pruned, 24).bad
    check_invariants(pruned)


def test_prune_idempotent():
    g = complete_bipartite(4, 4)
    once, rep1 = prune_bad_pairs(g, c=8, k=3)
    twice, rep2 = prune_bad_pairs(once, c=8, k=3)
    assert rep2.removed_b == () and rep2.bad_pairs == ()
    assert twice.n_edges == once.n_edges
    assert twice.removed_b == once.removed_b


def test_graph_file_roundtrip(tmp_path):
    p = derive_params(3, 1, 2, 3, Reduced(d_eff=6, r_eff=2))
    g = build_graph(p, master_seed=4)
    pruned, _ = prune_bad_pairs(g, c=24)
    path = tmp_path / "graph.txt"
    write_graph(pruned, path, target_n=1000)
    back, header = read_graph(path)
    assert back.n_a == pruned.n_a and back.n_b == pruned.n_b
    assert np.array_equal(back.indices_a, pruned.indices_a)
    assert back.params == pruned.params
    assert back.removed_b == pruned.removed_b
    assert back.master_seed == 4
    assert header["target_n"] == 1000
    # byte-identical rewrite
    write_graph(back, tmp_path / "again.txt", target_n=1000)
    assert (tmp_path / "again.txt").read_bytes() == path.read_bytes()


def test_graph_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("NOT A GRAPH\n{}\n")
    with pytest.raises(ValueError):
        read_graph(path)


def test_build_validates_system_shape():
    p = derive_params(3, 1, 2, 3, SMALL)
    wrong = PolySystem(polys=(from_terms(4, 2, 3, {}),))
    from thetaforge import DimensionError
    with pytest.raises(DimensionError):
        build_graph(p, system=wrong)
