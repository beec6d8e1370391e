"""Side-channel analysis toolkit for the AES-128 last-round attack.

Simulates data-dependent power leakage of the final-round state-register
overwrite, mounts correlation power analysis against it, and evaluates a
deterministic bit-level offset countermeasure that steers the attack
toward incorrect keys.
"""

from .aes import (
    SR_FORWARD,
    SR_INVERSE,
    as_block,
    block_hex,
    correct_last_round_guess,
    encrypt_batch,
    encrypt_block,
    expand_key,
    hamming_weight,
    hypothesis_matrix,
    hypothetical_power,
    invert_key_schedule,
    last_round_key,
    last_round_states,
    last_round_states_batch,
    last_round_transitions,
)
from .cpa import (
    AttackResult,
    CorrelationAccumulator,
    CorrelationEvolution,
    cpa_attack,
    pearson,
    rank_of_guess,
    traces_to_disclosure,
)
from .hd import (
    HdClassSummary,
    HdFit,
    SignFlipReport,
    fit_for_guess,
    fit_hd_line,
    group_by_hd,
    sign_flip_report,
    wrong_horse_scan,
)
from .leakage import (
    Augmentation,
    LeakageConfig,
    Trigger,
    ro_offset_model,
    simulate_campaign,
    simulate_campaign_chunk,
    simulate_trace,
)
from .traceio import (
    SctrFormatError,
    TraceImportError,
    export_raw,
    import_raw,
    read_sctr,
    write_sctr,
)
from .traces import TraceSet, concat_trace_sets

__version__ = "0.1.0"
