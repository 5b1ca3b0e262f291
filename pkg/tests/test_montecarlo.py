import math

import numpy as np
import pytest

from dfrelay import NetworkConfig, ParameterError, path_bottleneck, sample_trellis
from dfrelay.analytic import exp_scaled_e1, rate_adhoc, rate_block, rate_hop
from dfrelay.montecarlo import (
    BLOCK_TRIALS,
    block_generator,
    effectiveness,
    effectiveness_row,
    estimate_many,
    estimate_rate,
    estimate_sum_rate_multiuser,
    simulate_bottlenecks,
    summarize,
)
from dfrelay.strategies import select


def test_trellis_stream_matches_single_draws():
    cfg = NetworkConfig(4, 2, 3.0)
    rng = block_generator(5, 0)
    singles = [sample_trellis(cfg, rng) for _ in range(6)]
    sims = simulate_bottlenecks(cfg, [("optimal", None), ("hop", None)], 6, seed=5)
    for k, t in enumerate(singles):
        for name in ("optimal", "hop"):
            assert sims[(name, None)][k, 0] == path_bottleneck(t, select(t, name))


@pytest.mark.parametrize("threads", [4, 8])
def test_results_do_not_depend_on_thread_count(threads):
    cfg = NetworkConfig(5, 3, 10.0)
    trials = 3 * BLOCK_TRIALS + 17
    ref = estimate_rate(cfg, "sliding", 2, trials, seed=11, threads=1)
    got = estimate_rate(cfg, "sliding", 2, trials, seed=11, threads=threads)
    assert got == ref
    assert effectiveness_row(cfg, [1, 2, 3], 9000, 4, threads) == effectiveness_row(cfg, [1, 2, 3], 9000, 4, 1)


def test_per_trial_dominance_on_shared_trellises():
    cfg = NetworkConfig(6, 3, 10.0)
    keys = [("optimal", None), ("hop", None), ("adhoc", None), ("block", 2), ("sliding", 2), ("sliding", 3)]
    b = simulate_bottlenecks(cfg, keys, 20_000, seed=2)
    opt = b[("optimal", None)]
    for k in keys[1:]:
        assert np.all(opt >= b[k])
    assert np.all(b[("adhoc", None)] >= b[("hop", None)])
    assert np.array_equal(simulate_bottlenecks(cfg, [("sliding", 6)], 5000, 2)[("sliding", 6)], opt[:5000])


def test_stderr_scales_with_trials():
    cfg = NetworkConfig(4, 2, 10.0)
    small = estimate_rate(cfg, "hop", trials=10_000, seed=1)
    big = estimate_rate(cfg, "hop", trials=40_000, seed=2)
    assert small.stderr / big.stderr == pytest.approx(2.0, rel=0.2)


def test_chain_rate_single_relay():
    cfg = NetworkConfig(3, 1, 1.0)
    est = estimate_rate(cfg, "optimal", trials=100_000, seed=3)
    exact = exp_scaled_e1(3.0) / math.log(2)
    assert abs(est.mean - exact) < 4 * est.stderr


def test_optimal_mean_dominates_hop_mean():
    cfg = NetworkConfig(4, 2, 10.0)
    est = estimate_many(cfg, [("optimal", None), ("hop", None)], 5000, 8)
    assert est[("optimal", None)].mean >= est[("hop", None)].mean
    # separate calls with one seed see the same trellises too
    assert estimate_rate(cfg, "optimal", trials=5000, seed=8) == est[("optimal", None)]


def test_exact_formulas_hold_for_most_seeds():
    """|mean - exact| < 4 SE for at least 95 of 100 seeds, per strategy."""
    cfg = NetworkConfig(4, 2, 10.0)
    exact = {"hop": rate_hop(2, 4, 10.0).rate, "adhoc": rate_adhoc(2, 4, 10.0).rate,
             "block": rate_block(2, 4, 10.0).rate}
    hits = dict.fromkeys(exact, 0)
    for seed in range(100):
        est = estimate_many(cfg, [("hop", None), ("adhoc", None), ("block", 2)], 2000, seed)
        for (name, _), e in est.items():
            hits[name] += abs(e.mean - exact[name]) < 4 * e.stderr
    assert all(h >= 95 for h in hits.values()), hits


def test_effectiveness_endpoints_and_monotonicity():
    cfg = NetworkConfig(6, 2, 10.0)
    row = effectiveness_row(cfg, range(1, 7), trials=5000, seed=3)
    values = [row[w] for w in range(1, 7)]
    assert values[-1] == 100.0
    assert all(a <= b + 0.05 for a, b in zip(values, values[1:]))
    assert effectiveness(cfg, 6, 2000, 1) == 100.0
    with pytest.raises(ParameterError):
        effectiveness(cfg, 7)


def test_multiuser():
    cfg = NetworkConfig(4, 3, 10.0)
    single = estimate_rate(cfg, "adhoc", trials=3000, seed=4)
    one = estimate_sum_rate_multiuser(cfg, 1, "adhoc", trials=3000, seed=4)
    assert one == single
    two = estimate_sum_rate_multiuser(cfg, 2, "adhoc", trials=20_000, seed=4)
    assert abs(two.mean - 2 * rate_adhoc(3, 4, 10.0).rate) < 4 * two.stderr
    with pytest.raises(ParameterError):
        estimate_sum_rate_multiuser(cfg, 4, "hop")


def test_argument_checks():
    cfg = NetworkConfig(3, 2)
    with pytest.raises(ParameterError):
        estimate_rate(cfg, "hop", trials=0)
    with pytest.raises(ParameterError):
        estimate_rate(cfg, "block", 2)  # odd L
    mean, se = summarize(np.array([1.0, 3.0]))
    assert mean == 2.0 and se == pytest.approx(1.0)
