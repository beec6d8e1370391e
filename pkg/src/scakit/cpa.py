"""Correlation power analysis against the last-round overwrite.

The engine streams a trace set once.  For every one of the 256 guesses
of a round-10 key byte it keeps running sums of the model value, the
trace samples, and their products, from which Pearson r per (guess,
sample) falls out at any trace count.  Guesses are ranked by the
largest |r| across samples; the physical sign convention of the traces
therefore has no effect on attack outcomes.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import aes
from .traces import TraceSet


def pearson(xs, ys) -> float:
    """Pearson correlation coefficient of two equal-length sequences.

    Zero variance on either side yields 0.0 by convention: a constant
    hypothesis carries no information, it is not an error.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"xs and ys must be 1-D and equally long, got {x.shape} vs {y.shape}")
    if len(x) < 2:
        raise ValueError(f"need at least 2 points, got {len(x)}")
    x = x - x.mean()
    y = y - y.mean()
    vx = float(x @ x)
    vy = float(y @ y)
    if vx == 0.0 or vy == 0.0:
        return 0.0
    return float((x @ y) / math.sqrt(vx * vy))


class CorrelationAccumulator:
    """Single-pass sums for Pearson r of every guess against every sample.

    All sums are float64.  Accumulators over disjoint trace ranges can be
    merged; merging is commutative and associative over the sum fields.
    """

    def __init__(self, n_guesses=256, n_samples=1):
        self.n = 0
        self.sum_x = np.zeros(n_guesses)
        self.sum_xx = np.zeros(n_guesses)
        self.sum_y = np.zeros(n_samples)
        self.sum_yy = np.zeros(n_samples)
        self.sum_xy = np.zeros((n_guesses, n_samples))

    def update(self, hypotheses, samples):
        """Fold in a batch: ``hypotheses`` (m, n_guesses) model values,
        ``samples`` (m, n_samples) trace values."""
        x = np.asarray(hypotheses, dtype=np.float64)
        y = np.asarray(samples, dtype=np.float64)
        if x.ndim != 2 or y.ndim != 2 or len(x) != len(y):
            raise ValueError("hypotheses and samples must be 2-D with matching rows")
        if x.shape[1] != len(self.sum_x) or y.shape[1] != len(self.sum_y):
            raise ValueError("batch width does not match accumulator dimensions")
        self.n += len(x)
        self.sum_x += x.sum(axis=0)
        self.sum_xx += (x * x).sum(axis=0)
        self.sum_y += y.sum(axis=0)
        self.sum_yy += (y * y).sum(axis=0)
        self.sum_xy += x.T @ y

    def merge(self, other) -> "CorrelationAccumulator":
        """Absorb another accumulator built over disjoint traces."""
        self.n += other.n
        self.sum_x += other.sum_x
        self.sum_xx += other.sum_xx
        self.sum_y += other.sum_y
        self.sum_yy += other.sum_yy
        self.sum_xy += other.sum_xy
        return self

    def correlations(self) -> np.ndarray:
        """Signed Pearson r as an (n_guesses, n_samples) array; pairs with
        zero variance give 0.0."""
        if self.n < 2:
            return np.zeros_like(self.sum_xy)
        n = float(self.n)
        cov = self.sum_xy - np.outer(self.sum_x, self.sum_y) / n
        var_x = np.maximum(self.sum_xx - self.sum_x ** 2 / n, 0.0)
        var_y = np.maximum(self.sum_yy - self.sum_y ** 2 / n, 0.0)
        denom = np.sqrt(np.outer(var_x, var_y))
        return np.divide(cov, denom, out=np.zeros_like(cov), where=denom > 0)


@dataclass
class CorrelationEvolution:
    """Per-guess correlation at increasing trace counts (the data behind
    correlation-vs-traces convergence plots)."""
    checkpoints: np.ndarray   # (n_checkpoints,) strictly increasing trace counts
    values: np.ndarray        # (n_guesses, n_checkpoints) signed r

    def __post_init__(self):
        self.checkpoints = np.asarray(self.checkpoints, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if len(self.checkpoints) == 0:
            raise ValueError("evolution needs at least one checkpoint")
        if np.any(np.diff(self.checkpoints) <= 0):
            raise ValueError("checkpoints must be strictly increasing")
        if self.values.shape[1] != len(self.checkpoints):
            raise ValueError("values width must match number of checkpoints")
        if np.any(np.abs(self.values) > 1.0 + 1e-9):
            raise ValueError("correlation values outside [-1, 1]")


@dataclass
class AttackResult:
    byte_index: int
    best_guess: int
    ranking: np.ndarray   # all 256 guesses, best first
    scores: np.ndarray    # (256,) max-over-samples |r|, indexed by guess
    disclosure: int | None = None

    def __post_init__(self):
        self.ranking = np.asarray(self.ranking, dtype=np.int64)
        if sorted(self.ranking.tolist()) != list(range(256)):
            raise ValueError("ranking must be a permutation of 0..255")


def checkpoint_schedule(n_traces, stride):
    """Trace counts at which the evolution is recorded: every ``stride``
    traces plus the full count (a stride past ``n_traces`` clamps to a
    single checkpoint at ``n_traces``)."""
    if stride < 1:
        raise ValueError(f"checkpoint stride must be >= 1, got {stride}")
    points = list(range(stride, n_traces + 1, stride))
    if not points or points[-1] != n_traces:
        points.append(n_traces)
    return points


def cpa_attack(traces: TraceSet, byte_index, checkpoint_stride=100):
    """Mount the attack on one key byte.

    Returns ``(AttackResult, CorrelationEvolution)``.  The ranking orders
    guesses by descending max-over-samples |r| at the full trace count,
    ties broken by ascending guess value.  When the trace set carries its
    true key, the result also reports the traces-to-disclosure count.
    """
    if len(traces) == 0:
        raise ValueError("cannot attack an empty trace set")
    hyp = aes.hypothesis_matrix(traces.ciphertexts, byte_index)
    checkpoints = checkpoint_schedule(len(traces), checkpoint_stride)

    acc = CorrelationAccumulator(256, traces.samples_per_trace)
    values = np.empty((256, len(checkpoints)))
    start = 0
    for i, count in enumerate(checkpoints):
        acc.update(hyp[start:count], traces.samples[start:count])
        start = count
        r = acc.correlations()
        best_sample = np.abs(r).argmax(axis=1)
        values[:, i] = r[np.arange(256), best_sample]
    evolution = CorrelationEvolution(np.array(checkpoints), values)

    scores = np.abs(values[:, -1])
    ranking = np.lexsort((np.arange(256), -scores))
    disclosure = None
    if traces.true_key is not None:
        correct = aes.correct_last_round_guess(traces.true_key, byte_index)
        disclosure = traces_to_disclosure(evolution, correct)
    result = AttackResult(byte_index=byte_index, best_guess=int(ranking[0]),
                          ranking=ranking, scores=scores, disclosure=disclosure)
    return result, evolution


def traces_to_disclosure(evolution: CorrelationEvolution, correct_guess) -> int | None:
    """Smallest checkpoint from which the correct guess holds the
    strictly highest |r| at every remaining checkpoint, or None if it
    never stays on top (stable disclosure, not first touch)."""
    aes._check_guess(correct_guess)
    abs_r = np.abs(evolution.values)
    rivals = np.delete(abs_r, correct_guess, axis=0).max(axis=0)
    leads = abs_r[correct_guess] > rivals
    if not leads[-1]:
        return None
    first = len(leads) - 1
    while first > 0 and leads[first - 1]:
        first -= 1
    return int(evolution.checkpoints[first])


def rank_of_guess(result: AttackResult, guess) -> int:
    """1-based position of a guess in the attack ranking."""
    aes._check_guess(guess)
    return int(np.nonzero(result.ranking == guess)[0][0]) + 1
