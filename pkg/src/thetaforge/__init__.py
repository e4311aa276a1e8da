"""thetaforge: random algebraic bipartite graphs with bounded path
multiplicity, plus the exact oracles and experiment harnesses that
validate every step of the construction at desk scale.

Typical use:

>>> import thetaforge as tf
>>> p = tf.derive_params(k=3, tau=1, lam=2, q=5)
>>> g = tf.build_graph(p, master_seed=1)
>>> g2, report = tf.prune_bad_pairs(g, c=24)
"""

__version__ = "0.1.0"

from .errors import (CapacityError, DimensionError, ParityError, RangeError,
                     RigorError, ThetaForgeError, TooSmallError)
from .field import PrimeField
from .params import (Params, Reduced, Rigorous, bertrand_prime, derive_params,
                     theoretical_exponent)
from .mpoly import (Polynomial, PolySystem, enumerate_monomials, evaluate,
                    grid_values, monomial_count, restrict, restrict_back,
                    sample_system, sample_uniform)
from .graphgen import (BipartiteGraph, VertexCodec, build_graph,
                       complete_bipartite, expected_edges, from_edges,
                       prune_bad_pairs, read_graph, write_graph)
from .paths import (PairPathReport, ThetaWitness, classify_degenerate,
                    count_paths, count_walks, dichotomy_histogram, find_theta,
                    scan_bad_pairs)
from .moments import (CollectionStats, check_claim_inequality,
                      enumerate_collections, estimate_moment,
                      final_edge_lower_bound, lambda_expectation_bound,
                      markov_tail, moment_bound, prm_upper_bound,
                      verify_claim_exhaustive)

__all__ = [name for name in dir() if not name.startswith("_")]
