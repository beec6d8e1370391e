import numpy as np
import pytest

from scakit import aes
from scakit.cpa import (
    AttackResult,
    CorrelationAccumulator,
    CorrelationEvolution,
    checkpoint_schedule,
    cpa_attack,
    pearson,
    rank_of_guess,
    traces_to_disclosure,
)
from scakit.leakage import Augmentation, LeakageConfig, simulate_campaign
from scakit.traces import TraceSet

KEY = "2041e2770445067328090a7f0c0d0e7b"  # round-10 key byte 0 is 0x33
CORRECT_BYTE0 = 51


def test_pearson_exact_cases():
    assert pearson([0, 1, 2, 3], [0, 2, 4, 6]) == pytest.approx(1.0, abs=1e-12)
    assert pearson([0, 1, 2, 3], [6, 4, 2, 0]) == pytest.approx(-1.0, abs=1e-12)
    assert pearson([1, 2, 3], [5, 5, 5]) == 0.0
    assert pearson([5, 5, 5], [1, 2, 3]) == 0.0


def test_pearson_argument_errors():
    with pytest.raises(ValueError):
        pearson([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        pearson([1], [1])


def two_pass_correlations(hyp, samples):
    """Textbook reference: center, normalize, dot product."""
    x = np.asarray(hyp, np.float64)
    y = np.asarray(samples, np.float64)
    out = np.zeros((x.shape[1], y.shape[1]))
    for g in range(x.shape[1]):
        for s in range(y.shape[1]):
            out[g, s] = pearson(x[:, g], y[:, s])
    return out


def test_accumulator_matches_two_pass():
    rng = np.random.default_rng(0)
    hyp = rng.integers(0, 9, size=(2000, 16)).astype(np.float64)
    samples = rng.normal(0.0, 3.0, size=(2000, 3))
    acc = CorrelationAccumulator(16, 3)
    acc.update(hyp, samples)
    streamed = acc.correlations()
    reference = two_pass_correlations(hyp, samples)
    assert np.max(np.abs(streamed - reference)) < 1e-12
    # spot-check against an independent implementation as well
    assert streamed[3, 1] == pytest.approx(np.corrcoef(hyp[:, 3], samples[:, 1])[0, 1],
                                           abs=1e-12)


def test_accumulator_merge_matches_sequential():
    rng = np.random.default_rng(1)
    hyp = rng.integers(0, 9, size=(5000, 8)).astype(np.float64)
    samples = rng.normal(-60.0, 6.0, size=(5000, 2))
    seq = CorrelationAccumulator(8, 2)
    seq.update(hyp, samples)
    merged = CorrelationAccumulator(8, 2)
    bounds = [0, 700, 1500, 1501, 4000, 5000]
    for lo, hi in zip(bounds, bounds[1:]):
        part = CorrelationAccumulator(8, 2)
        part.update(hyp[lo:hi], samples[lo:hi])
        merged.merge(part)
    assert merged.n == seq.n
    assert np.max(np.abs(merged.correlations() - seq.correlations())) < 1e-12


def test_accumulator_zero_variance_convention():
    acc = CorrelationAccumulator(2, 1)
    acc.update(np.array([[1.0, 4.0], [1.0, 5.0], [1.0, 6.0]]), np.zeros((3, 1)))
    r = acc.correlations()
    assert r[0, 0] == 0.0 and r[1, 0] == 0.0


def test_checkpoint_schedule():
    assert checkpoint_schedule(1000, 100) == list(range(100, 1001, 100))
    assert checkpoint_schedule(1050, 100) == list(range(100, 1001, 100)) + [1050]
    assert checkpoint_schedule(50, 100) == [50]
    with pytest.raises(ValueError):
        checkpoint_schedule(100, 0)


def _evolution(checkpoints, correct_vals, other_vals, correct=51):
    values = np.full((256, len(checkpoints)), other_vals, dtype=float)
    values[correct] = correct_vals
    return CorrelationEvolution(np.array(checkpoints), values)


def test_traces_to_disclosure_always_first():
    evo = _evolution([1000, 2000, 3000], [0.9, 0.9, 0.9], 0.1)
    assert traces_to_disclosure(evo, 51) == 1000


def test_traces_to_disclosure_never_first():
    evo = _evolution([1000, 2000, 3000], [0.05, 0.05, 0.05], 0.1)
    assert traces_to_disclosure(evo, 51) is None


def test_traces_to_disclosure_stabilizes_late():
    evo = _evolution([1000, 2000, 3000, 4000], [0.05, 0.05, 0.9, 0.9], 0.1)
    assert traces_to_disclosure(evo, 51) == 3000
    # a tie is not a strict lead
    evo = _evolution([1000, 2000], [0.1, 0.1], 0.1)
    assert traces_to_disclosure(evo, 51) is None


def test_evolution_validation():
    with pytest.raises(ValueError):
        CorrelationEvolution(np.array([100, 100]), np.zeros((256, 2)))
    with pytest.raises(ValueError):
        CorrelationEvolution(np.array([100, 200]), np.full((256, 2), 1.01))
    with pytest.raises(ValueError):
        CorrelationEvolution(np.array([], dtype=int), np.zeros((256, 0)))


def test_attack_result_ranking_must_be_permutation():
    with pytest.raises(ValueError):
        AttackResult(0, 0, np.zeros(256, dtype=int), np.zeros(256))


def test_noiseless_equal_weight_attack_recovers_all_bytes():
    ts = simulate_campaign(KEY, 512, LeakageConfig.equal_weights(1.0), seed=1)
    k10 = aes.last_round_key(aes.as_block(KEY))
    for j in range(16):
        result, evolution = cpa_attack(ts, j, checkpoint_stride=128)
        correct = aes.correct_last_round_guess(KEY, j)
        assert result.best_guess == correct
        assert result.best_guess == int(k10[aes.SR_FORWARD[j]])
        assert rank_of_guess(result, correct) == 1
        assert np.all(np.abs(evolution.values) <= 1.0 + 1e-9)


def test_rank_of_guess_is_total():
    ts = simulate_campaign(KEY, 256, LeakageConfig.equal_weights(1.0), seed=2)
    result, _ = cpa_attack(ts, 0, checkpoint_stride=256)
    assert rank_of_guess(result, result.best_guess) == 1
    ranks = {rank_of_guess(result, g) for g in range(256)}
    assert ranks == set(range(1, 257))


def test_attack_is_invariant_under_trace_permutation():
    config = LeakageConfig.equal_weights(1.0, noise_sigma=2.0)
    ts = simulate_campaign(KEY, 3000, config, seed=3)
    base, _ = cpa_attack(ts, 0, checkpoint_stride=500)
    perm = np.random.default_rng(4).permutation(len(ts))
    shuffled = TraceSet(ts.samples[perm], ts.plaintexts[perm], ts.ciphertexts[perm],
                        true_key=ts.true_key, seed=ts.seed)
    again, _ = cpa_attack(shuffled, 0, checkpoint_stride=500)
    assert np.array_equal(base.ranking, again.ranking)
    assert np.allclose(base.scores, again.scores, atol=1e-12)


def test_attack_reports_disclosure_for_simulated_sets():
    config = LeakageConfig.equal_weights(1.0, noise_sigma=4.0)
    ts = simulate_campaign(KEY, 3000, config, seed=1)
    result, evolution = cpa_attack(ts, 0)
    assert result.disclosure == traces_to_disclosure(evolution, CORRECT_BYTE0)
    assert result.disclosure is not None


def test_attack_argument_errors():
    empty = TraceSet(np.zeros((0, 1), np.float32), np.zeros((0, 16), np.uint8),
                     np.zeros((0, 16), np.uint8))
    with pytest.raises(ValueError):
        cpa_attack(empty, 0)
    ts = simulate_campaign(KEY, 10, LeakageConfig.equal_weights(1.0), seed=1)
    with pytest.raises(ValueError):
        cpa_attack(ts, 0, checkpoint_stride=0)
    with pytest.raises(ValueError):
        cpa_attack(ts, 16)


def test_max_over_samples_scoring():
    # leakage on sample 1 of 3: score must pick it up regardless of position
    config = LeakageConfig.equal_weights(1.0, noise_sigma=0.5,
                                         samples_per_trace=3, poi_index=1)
    ts = simulate_campaign(KEY, 2000, config, seed=6)
    result, _ = cpa_attack(ts, 0, checkpoint_stride=2000)
    assert result.best_guess == CORRECT_BYTE0


def test_sufficient_offset_defeats_the_attack():
    # above this model's effectiveness threshold the correct key loses
    # its lead and stays dethroned
    aug = Augmentation(0, 2, offset=6.0)
    config = LeakageConfig.equal_weights(1.0, noise_sigma=4.0, augmentation=aug)
    for seed in (1, 2, 3):
        ts = simulate_campaign(KEY, 30_000, config, seed=seed)
        result, _ = cpa_attack(ts, 0)
        assert result.disclosure is None
        assert rank_of_guess(result, CORRECT_BYTE0) > 1
