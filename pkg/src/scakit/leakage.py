"""Synthetic power traces for the AES last-round register overwrite.

The data-dependent part of a trace follows the toggle model of a CMOS
state register: every bit that flips during the final-round overwrite
subtracts its weight from the point of interest, so the value DROPS as
switching activity grows (an AC-coupled voltage-drop signal).  Gaussian
noise stands in for measurement noise and unrelated switching, and an
optional per-bit offset augmentation reproduces a hiding countermeasure
that burns a fixed amount of extra power keyed to one chosen state bit.

The offset is deterministic: it is applied in full whenever its trigger
condition on the chosen bit holds, never drawn at random.  With the
``ON_STATIC`` trigger the extra draw happens when the bit does NOT
toggle, which inverts the usual more-toggles/more-power trend for that
bit; ``ON_TOGGLE`` applies it on toggles instead.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import aes
from .traces import TraceSet, concat_trace_sets

# Fixed generation chunk so that campaigns can be produced in parallel:
# chunk c always covers traces [c*CHUNK, (c+1)*CHUNK) and draws from its
# own substream, making the result independent of how work is split.
CAMPAIGN_CHUNK = 4096


class Trigger(enum.Enum):
    """When the augmentation offset fires for the chosen bit."""
    ON_STATIC = "static"
    ON_TOGGLE = "toggle"


@dataclass
class Augmentation:
    """Fixed extra leakage tied to one state-register bit."""
    byte_index: int
    bit_index: int
    offset: float
    trigger: Trigger = Trigger.ON_STATIC

    def __post_init__(self):
        if not 0 <= self.byte_index <= 15:
            raise ValueError(f"byte_index must be in 0..15, got {self.byte_index}")
        if not 0 <= self.bit_index <= 7:
            raise ValueError(f"bit_index must be in 0..7, got {self.bit_index}")
        if self.offset < 0:
            raise ValueError(f"offset must be >= 0, got {self.offset}")
        self.trigger = Trigger(self.trigger)


@dataclass
class LeakageConfig:
    """Parameters of the simulated leakage.

    ``bit_weights`` holds one weight per state-register bit; bit ``b`` of
    state byte ``j`` is entry ``8*j + b``.  ``poi_index`` is the sample
    that carries the overwrite leakage; every other sample is baseline
    plus noise.
    """
    bit_weights: np.ndarray = field(default_factory=lambda: np.ones(128))
    baseline: float = 0.0
    noise_sigma: float = 0.0
    augmentation: Augmentation | None = None
    samples_per_trace: int = 1
    poi_index: int = 0

    def __post_init__(self):
        self.bit_weights = np.asarray(self.bit_weights, dtype=np.float64)
        if self.bit_weights.shape != (128,):
            raise ValueError(f"bit_weights must have shape (128,), got {self.bit_weights.shape}")
        if np.any(self.bit_weights < 0):
            raise ValueError("bit_weights must be >= 0")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.samples_per_trace < 1:
            raise ValueError(f"samples_per_trace must be >= 1, got {self.samples_per_trace}")
        if not 0 <= self.poi_index < self.samples_per_trace:
            raise ValueError(f"poi_index {self.poi_index} outside 0..{self.samples_per_trace - 1}")

    @classmethod
    def equal_weights(cls, weight=1.0, **kwargs) -> "LeakageConfig":
        """Every state bit contributes the same weight."""
        return cls(bit_weights=np.full(128, float(weight)), **kwargs)

    @classmethod
    def single_byte_weights(cls, byte_index, weight=1.0, **kwargs) -> "LeakageConfig":
        """Only the eight bits of one state byte leak; everything else
        is silent.  Useful for exact-oracle checks of the model chain."""
        weights = np.zeros(128)
        weights[8 * byte_index:8 * byte_index + 8] = float(weight)
        return cls(bit_weights=weights, **kwargs)


def toggle_bits(round9, ciphertext) -> np.ndarray:
    """Per-bit toggle mask of the overwrite as an (n, 128) 0/1 array,
    bit ``b`` of byte ``j`` in column ``8*j + b``."""
    return np.unpackbits(np.asarray(round9) ^ np.asarray(ciphertext), axis=1, bitorder="little")


def _leakage_samples(key, plaintexts, config, noise):
    round9, cts = aes.last_round_states_batch(key, plaintexts)
    bits = toggle_bits(round9, cts)
    samples = noise + config.baseline
    samples[:, config.poi_index] -= bits @ config.bit_weights
    aug = config.augmentation
    if aug is not None:
        bit = bits[:, 8 * aug.byte_index + aug.bit_index].astype(np.float64)
        fires = bit if aug.trigger is Trigger.ON_TOGGLE else 1.0 - bit
        samples[:, config.poi_index] -= aug.offset * fires
    return samples.astype(np.float32), cts


def simulate_trace(key, plaintext, config: LeakageConfig, rng):
    """One synthetic trace for one encryption.

    Returns ``(trace, ciphertext)`` where ``trace`` is a
    ``(samples_per_trace,)`` float32 array.  ``rng`` is a numpy
    ``Generator``; pass a freshly seeded one for reproducibility.
    """
    pt = aes.as_block(plaintext)[None, :]
    noise = rng.normal(0.0, config.noise_sigma, size=(1, config.samples_per_trace))
    samples, cts = _leakage_samples(key, pt, config, noise)
    return samples[0], cts[0]


def simulate_campaign_chunk(key, n, config: LeakageConfig, seed, chunk_index) -> TraceSet:
    """Generate one fixed-size chunk of a campaign.

    Chunk ``c`` covers traces ``[c*CAMPAIGN_CHUNK, min(n, (c+1)*CAMPAIGN_CHUNK))``
    of the campaign defined by ``(key, n, config, seed)`` and depends only
    on its own substream, so chunks can be produced in any order or in
    parallel and concatenated.
    """
    lo = chunk_index * CAMPAIGN_CHUNK
    hi = min(n, lo + CAMPAIGN_CHUNK)
    if not 0 <= lo < hi:
        raise ValueError(f"chunk {chunk_index} is empty for a campaign of {n} traces")
    m = hi - lo
    rng = np.random.default_rng(np.random.SeedSequence((seed, chunk_index)))
    pts = rng.integers(0, 256, size=(m, 16), dtype=np.uint8)
    noise = rng.normal(0.0, config.noise_sigma, size=(m, config.samples_per_trace))
    samples, cts = _leakage_samples(key, pts, config, noise)
    return TraceSet(samples, pts, cts, true_key=aes.as_block(key), seed=seed)


def simulate_campaign(key, n, config: LeakageConfig, seed) -> TraceSet:
    """Simulate ``n`` encryptions of uniform random plaintexts.

    Deterministic in all arguments: the same call always returns a
    byte-identical :class:`TraceSet`.
    """
    if n < 1:
        raise ValueError(f"campaign needs n >= 1 traces, got {n}")
    chunks = [simulate_campaign_chunk(key, n, config, seed, c)
              for c in range(math.ceil(n / CAMPAIGN_CHUNK))]
    return concat_trace_sets(chunks)


def ro_offset_model(n_ro, pulse_fraction, alpha) -> float:
    """Offset contributed by a bank of ring oscillators.

    A linear abstraction: ``n_ro`` enabled oscillators, active for
    ``pulse_fraction`` of the overwrite window, each worth ``alpha``
    volt-equivalent units.
    """
    if n_ro < 0:
        raise ValueError(f"n_ro must be >= 0, got {n_ro}")
    if not 0.0 <= pulse_fraction <= 1.0:
        raise ValueError(f"pulse_fraction must be in [0, 1], got {pulse_fraction}")
    return alpha * n_ro * pulse_fraction
