import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chshprob.errors import InvalidConfigError
from chshprob.model import (
    NON_STRICT,
    STRICT,
    ExperimentConfig,
    chsh_correlation,
    exact_violation_probability,
    is_violation,
)
from chshprob.montecarlo import (
    _batch_hits,
    estimate_violation_probability,
    fair_steps,
    simulate_experiment,
    wilson_interval,
)
from chshprob.walks import walk_pmf


class CountingStream:
    """Iterator wrapper that records how many steps were consumed."""

    def __init__(self, values):
        self._it = iter(values)
        self.consumed = 0

    def __iter__(self):
        return self

    def __next__(self):
        value = next(self._it)
        self.consumed += 1
        return value


class TestSimulateExperiment:
    def test_replays_maximal_violation(self):
        config = ExperimentConfig((1, 1, 1, 1))
        counts = simulate_experiment(config, iter([+1, -1, +1, +1]))
        assert counts.m == (1, -1, 1, 1)
        assert chsh_correlation(counts) == 4

    def test_all_heads_lands_on_boundary(self):
        config = ExperimentConfig((2, 3, 4, 5))
        counts = simulate_experiment(config, itertools.repeat(1))
        assert counts.m == config.rounds
        correlation = chsh_correlation(counts)
        assert correlation == 2
        assert not is_violation(correlation, STRICT)
        assert is_violation(correlation, NON_STRICT)

    def test_consumes_exactly_the_round_total_in_order(self):
        config = ExperimentConfig((2, 1, 3, 1))
        stream = CountingStream([+1, +1, -1, +1, -1, +1, -1, +1, +1])
        counts = simulate_experiment(config, stream)
        assert stream.consumed == config.total
        # channel order: first two steps are channel 1, the third channel 2, ...
        assert counts.m == (2, -1, 1, -1)
        assert next(stream) == +1  # later steps untouched

    def test_rejects_bad_step_values(self):
        with pytest.raises(ValueError):
            simulate_experiment(ExperimentConfig((1, 1, 1, 1)), iter([1, 0, 1, 1]))

    def test_rejects_exhausted_stream(self):
        with pytest.raises(ValueError):
            simulate_experiment(ExperimentConfig((2, 2, 2, 2)), iter([1, 1, 1]))

    def test_channel_sums_follow_walk_distribution(self):
        # frequency check of each channel endpoint against the exact pmf
        config = ExperimentConfig((2, 2, 2, 2))
        trials = 20_000
        stream = fair_steps(np.random.default_rng(2024))
        observed = {m: [0, 0, 0, 0] for m in (-2, 0, 2)}
        for _ in range(trials):
            counts = simulate_experiment(config, stream)
            for k, mk in enumerate(counts.m):
                observed[mk][k] += 1
        pmf = walk_pmf(2)
        for m, per_channel in observed.items():
            p = float(pmf.mass[m])
            sigma = math.sqrt(p * (1 - p) / trials)
            for k in range(4):
                assert abs(per_channel[k] / trials - p) <= 3 * sigma, (m, k)


class TestFairSteps:
    def test_values_and_balance(self):
        rng = np.random.default_rng(7)
        draws = list(itertools.islice(fair_steps(rng), 10**6))
        assert set(draws) == {-1, 1}
        assert abs(sum(draws) / 10**6) <= 4 / math.sqrt(10**6)


class TestWilsonInterval:
    def test_zero_hits_pins_lower_bound(self):
        low, high = wilson_interval(0, 100)
        assert low == 0.0
        assert 0.0 < high < 0.05

    def test_all_hits_pins_upper_bound(self):
        low, high = wilson_interval(100, 100)
        assert high == 1.0
        assert 0.95 < low < 1.0

    def test_known_value(self):
        # half the trials hit: interval symmetric around 0.5
        low, high = wilson_interval(50, 100)
        assert low == pytest.approx(1.0 - high, abs=1e-12)
        assert low == pytest.approx(0.40383, abs=5e-5)

    @given(trials=st.integers(min_value=1, max_value=10**6), data=st.data())
    def test_contains_point_estimate(self, trials, data):
        hits = data.draw(st.integers(min_value=0, max_value=trials))
        low, high = wilson_interval(hits, trials)
        assert 0.0 <= low <= hits / trials <= high <= 1.0

    def test_rejects_bad_counts(self):
        with pytest.raises(InvalidConfigError):
            wilson_interval(5, 0)
        with pytest.raises(InvalidConfigError):
            wilson_interval(6, 5)


class TestEstimate:
    def test_single_round_matches_exact_value(self):
        config = ExperimentConfig((1, 1, 1, 1))
        result = estimate_violation_probability(config, 10**6, seed=42, threshold=STRICT)
        sigma = math.sqrt(0.125 * 0.875 / 10**6)
        assert abs(result.estimate - 0.125) <= 3 * sigma
        assert result.ci_low <= 0.125 <= result.ci_high

    def test_two_round_matches_exact_value(self):
        config = ExperimentConfig((2, 2, 2, 2))
        exact = float(exact_violation_probability(config, STRICT).value)
        result = estimate_violation_probability(config, 10**6, seed=11, threshold=STRICT)
        sigma = math.sqrt(exact * (1 - exact) / 10**6)
        assert abs(result.estimate - exact) <= 3 * sigma

    def test_deterministic_for_same_arguments(self):
        config = ExperimentConfig((2, 3, 1, 2))
        a = estimate_violation_probability(config, 200_000, seed=5, threshold=STRICT)
        b = estimate_violation_probability(config, 200_000, seed=5, threshold=STRICT)
        assert a == b

    def test_different_seeds_differ(self):
        config = ExperimentConfig((1, 1, 1, 1))
        a = estimate_violation_probability(config, 200_000, seed=1)
        b = estimate_violation_probability(config, 200_000, seed=2)
        assert a.hits != b.hits

    def test_worker_count_does_not_change_the_result(self):
        config = ExperimentConfig((1, 1, 1, 1))
        sequential = estimate_violation_probability(config, 300_000, seed=3, threshold=STRICT)
        parallel = estimate_violation_probability(
            config, 300_000, seed=3, threshold=STRICT, workers=4
        )
        assert sequential == parallel

    def test_strict_hits_never_exceed_nonstrict(self):
        config = ExperimentConfig((3, 2, 2, 3))
        strict = estimate_violation_probability(config, 100_000, seed=9, threshold=STRICT)
        nonstrict = estimate_violation_probability(config, 100_000, seed=9, threshold=NON_STRICT)
        assert strict.hits <= nonstrict.hits

    def test_single_trial(self):
        config = ExperimentConfig((1, 1, 1, 1))
        result = estimate_violation_probability(config, 1, seed=0)
        assert result.hits in (0, 1)
        assert result.estimate in (0.0, 1.0)

    def test_rejects_zero_trials(self):
        with pytest.raises(InvalidConfigError):
            estimate_violation_probability(ExperimentConfig((1, 1, 1, 1)), 0, seed=1)

    def test_negative_seed_accepted_and_stable(self):
        config = ExperimentConfig((1, 1, 1, 1))
        a = estimate_violation_probability(config, 50_000, seed=-1)
        b = estimate_violation_probability(config, 50_000, seed=-1)
        assert a == b

    def test_bigint_fallback_matches_vectorized_kernel(self):
        rounds = (3, 5, 7, 2)
        for threshold in (STRICT, NON_STRICT):
            fast = _batch_hits(rounds, seed=13, batch_index=0, count=4096, threshold=threshold)
            slow = _batch_hits(
                rounds, seed=13, batch_index=0, count=4096, threshold=threshold,
                force_exact_sum=True,
            )
            assert fast == slow
