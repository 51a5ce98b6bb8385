"""Bichromatic closest-pair search in the Hamming metric.

Two lists of binary vectors, one pair planted at a known distance, and a
recursive bucketing solver that beats the quadratic scan on the parameter
ranges where theory says it should.  The package splits into:

- ``bitvec``:    packed bit vectors, blocks, permutations, seeded randomness
- ``analysis``:  survival probabilities, runtime exponents, parameter choice
- ``generator``: planted instances and their on-disk format
- ``solver``:    the bucketing solver plus the exhaustive baseline
- ``bench``:     timing harness with CSV output
- ``cli``:       the ``hambucket`` command
"""

from .bitvec import (
    BitVector,
    BlockSpec,
    Permutation,
    apply_permutation,
    block_weight,
    distance,
    make_rng,
    random_permutation,
    random_vector,
    random_weight_vector,
    weight,
    xor,
)
from .analysis import (
    DistributionModel,
    ExponentResult,
    Regime,
    binary_entropy,
    bucket_prob_p,
    choose_params,
    delta_gamma_star,
    enumerate_pq_oracle,
    epsilon_distribution,
    expected_pairs_exponent,
    inverse_entropy,
    log_pair_weight_prob,
    lower_bound_exponent,
    pair_survival_count,
    pair_survival_prob_q,
    strategy_survival_count,
    theta_distribution,
    theta_uniform,
)
from .generator import Instance, gen_instance, read_instance, write_instance
from .solver import (
    AT_MOST,
    EXACT,
    MatchPair,
    SolveReport,
    SolverParams,
    Strategy,
    bucket_accept,
    deviation,
    naive_search,
    partition_in_place,
    solve,
    survival_rate_probe,
)

__version__ = "0.1.0"
