"""Command-line front end for reproducible simulate/attack/analyze runs.

Subcommands
-----------
simulate   generate a campaign and write it as an SCTR file
attack     run CPA on an SCTR file, emit a JSON report and optional
           evolution CSV (columns: checkpoint, guess, r)
fit-hd     per-HD-class means and line fits for chosen guesses
           (points CSV: guess, hd, mean, count; fits CSV: guess, slope,
           intercept, r)
sweep      grid of (bit, offset) augmentations; table of bit, offset,
           disclosure, wrong_horse_count
convert    raw float32 dump + metadata CSV -> SCTR

Every command is deterministic given its arguments; campaign randomness
comes only from ``--seed``.  Errors are written to stderr as a single
JSON object and the exit code is nonzero.

Config file
-----------
``--config FILE`` preloads simulate/sweep parameters from a key=value
file (``#`` starts a comment).  Recognized keys match the long flag
names with underscores: key, n, sigma, weight, baseline, samples, poi,
seed, augment_byte, augment_bit, offset, n_ro, alpha, pulse, trigger.
Explicit flags override file values.

JSON attack report (schema_version 1)
-------------------------------------
Single-byte mode: source, n_traces, samples_per_trace, byte_index,
checkpoint_stride, target_key_position (the round-10 key position the
best guess refers to), best_guess, best_score, ranking (all 256 guesses
best first), scores (indexed by guess), correct_guess / correct_rank /
disclosure (null unless the file records its true key), evolution
{checkpoints, curves[guess][checkpoint]}.

With ``--all-bytes``: per-byte summaries plus the assembled round-10 key
in wire order and the cipher key obtained by inverting the key schedule
(both reported, in their own coordinates); evolution curves are omitted.
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import aes
from .cpa import cpa_attack, rank_of_guess
from .hd import fit_hd_line, group_by_hd, wrong_horse_scan
from .leakage import Augmentation, LeakageConfig, Trigger, ro_offset_model, simulate_campaign
from .traceio import import_raw, read_sctr, write_sctr

_SIM_DEFAULTS = {
    "key": "000102030405060708090a0b0c0d0e0f",
    "n": 1000,
    "sigma": 0.0,
    "weight": 1.0,
    "baseline": 0.0,
    "samples": 1,
    "poi": 0,
    "seed": 1,
    "augment_byte": 0,
    "augment_bit": 2,
    "offset": None,
    "n_ro": None,
    "alpha": None,
    "pulse": 1.0,
    "trigger": "static",
}

_CONFIG_PARSERS = {
    "key": str, "n": int, "sigma": float, "weight": float, "baseline": float,
    "samples": int, "poi": int, "seed": int, "augment_byte": int, "augment_bit": int,
    "offset": float, "n_ro": int, "alpha": float, "pulse": float, "trigger": str,
}


def _load_config_file(path):
    values = {}
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected 'key = value', got {raw.strip()!r}")
            name, _, value = line.partition("=")
            name = name.strip()
            if name not in _CONFIG_PARSERS:
                raise ValueError(f"{path}:{line_no}: unknown config key {name!r}")
            values[name] = _CONFIG_PARSERS[name](value.strip())
    return values


def _add_sim_arguments(parser):
    parser.add_argument("--config", help="key=value file with campaign parameters")
    parser.add_argument("--key", help="cipher key, 32 hex chars")
    parser.add_argument("--n", type=int, help="number of traces")
    parser.add_argument("--sigma", type=float, help="gaussian noise level")
    parser.add_argument("--weight", type=float, help="per-bit leakage weight")
    parser.add_argument("--baseline", type=float, help="trace baseline level")
    parser.add_argument("--samples", type=int, help="samples per trace")
    parser.add_argument("--poi", type=int, help="sample index carrying the leakage")
    parser.add_argument("--seed", type=int, help="campaign seed")
    parser.add_argument("--augment-byte", type=int, dest="augment_byte")
    parser.add_argument("--augment-bit", type=int, dest="augment_bit")
    parser.add_argument("--offset", type=float, help="augmentation offset (volt-equivalent)")
    parser.add_argument("--n-ro", type=int, dest="n_ro",
                        help="derive the offset from a ring-oscillator count")
    parser.add_argument("--alpha", type=float, help="per-oscillator offset contribution")
    parser.add_argument("--pulse", type=float, help="fraction of the window the bank is active")
    parser.add_argument("--trigger", choices=["static", "toggle"],
                        help="apply the offset when the bit is static or when it toggles")


def _resolve_sim_params(args):
    params = dict(_SIM_DEFAULTS)
    if args.config:
        params.update(_load_config_file(args.config))
    for name in _SIM_DEFAULTS:
        value = getattr(args, name, None)
        if value is not None:
            params[name] = value
    if params["offset"] is None and params["n_ro"] is not None:
        if params["alpha"] is None:
            raise ValueError("--n-ro needs --alpha to convert an oscillator count to an offset")
        params["offset"] = ro_offset_model(params["n_ro"], params["pulse"], params["alpha"])
    return params


def _build_leakage_config(params, offset_override=None, bit_override=None):
    offset = params["offset"] if offset_override is None else offset_override
    bit = params["augment_bit"] if bit_override is None else bit_override
    augmentation = None
    if offset is not None:
        augmentation = Augmentation(params["augment_byte"], bit, offset,
                                    Trigger(params["trigger"]))
    return LeakageConfig(
        bit_weights=np.full(128, params["weight"]),
        baseline=params["baseline"],
        noise_sigma=params["sigma"],
        augmentation=augmentation,
        samples_per_trace=params["samples"],
        poi_index=params["poi"],
    )


def _fmt(value):
    return format(value, ".17g")


def cmd_simulate(args) -> int:
    params = _resolve_sim_params(args)
    config = _build_leakage_config(params)
    trace_set = simulate_campaign(params["key"], params["n"], config, params["seed"])
    write_sctr(trace_set, args.output)
    effective = {k: params[k] for k in sorted(params)}
    effective["command"] = "simulate"
    effective["output"] = args.output
    print(json.dumps(effective))
    return 0


def _attack_one(traces, byte_index, stride):
    result, evolution = cpa_attack(traces, byte_index, stride)
    entry = {
        "byte_index": byte_index,
        "target_key_position": int(aes.SR_FORWARD[byte_index]),
        "best_guess": result.best_guess,
        "best_score": float(result.scores[result.best_guess]),
        "correct_guess": None,
        "correct_rank": None,
        "disclosure": result.disclosure,
    }
    if traces.true_key is not None:
        correct = aes.correct_last_round_guess(traces.true_key, byte_index)
        entry["correct_guess"] = correct
        entry["correct_rank"] = rank_of_guess(result, correct)
    return result, evolution, entry


def cmd_attack(args) -> int:
    traces = read_sctr(args.sctr)
    report = {
        "schema_version": 1,
        "mode": "all" if args.all_bytes else "single",
        "source": args.sctr,
        "n_traces": traces.n_traces,
        "samples_per_trace": traces.samples_per_trace,
        "checkpoint_stride": args.stride,
    }
    if args.all_bytes:
        entries = []
        recovered = np.zeros(16, dtype=np.uint8)
        for byte_index in range(16):
            _, _, entry = _attack_one(traces, byte_index, args.stride)
            entries.append(entry)
            recovered[entry["target_key_position"]] = entry["best_guess"]
        report["bytes"] = entries
        report["last_round_key_hex"] = aes.block_hex(recovered)
        report["cipher_key_hex"] = aes.block_hex(aes.invert_key_schedule(recovered))
        report["true_last_round_key_hex"] = None
        report["recovered"] = None
        if traces.true_key is not None:
            true_k10 = aes.last_round_key(traces.true_key)
            report["true_last_round_key_hex"] = aes.block_hex(true_k10)
            report["recovered"] = bool(np.array_equal(recovered, true_k10))
    else:
        result, evolution, entry = _attack_one(traces, args.byte, args.stride)
        report.update(entry)
        report["ranking"] = result.ranking.tolist()
        report["scores"] = result.scores.tolist()
        report["evolution"] = {
            "checkpoints": evolution.checkpoints.tolist(),
            "curves": evolution.values.tolist(),
        }
        if args.evolution_csv:
            with open(args.evolution_csv, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["checkpoint", "guess", "r"])
                for i, count in enumerate(evolution.checkpoints):
                    for guess in range(256):
                        writer.writerow([int(count), guess, _fmt(evolution.values[guess, i])])

    text = json.dumps(report, indent=2)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
        brief = {k: report[k] for k in report
                 if k not in ("ranking", "scores", "evolution", "bytes")}
        print(json.dumps(brief))
    else:
        print(text)
    return 0


def cmd_fit_hd(args) -> int:
    traces = read_sctr(args.sctr)
    guesses = args.guess
    if not guesses:
        if traces.true_key is None:
            raise ValueError("no --guess given and the trace file records no true key")
        guesses = [aes.correct_last_round_guess(traces.true_key, args.byte)]
    summaries = [group_by_hd(traces, g, args.byte, args.sample) for g in guesses]
    fits = [fit_hd_line(s) for s in summaries]

    if args.points:
        with open(args.points, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["guess", "hd", "mean", "count"])
            for summary in summaries:
                for hd in np.nonzero(summary.present)[0]:
                    writer.writerow([summary.key_guess, int(hd),
                                     _fmt(summary.means[hd]), int(summary.counts[hd])])
    if args.fits:
        with open(args.fits, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["guess", "slope", "intercept", "r"])
            for guess, fit in zip(guesses, fits):
                writer.writerow([guess, _fmt(fit.slope), _fmt(fit.intercept), _fmt(fit.r)])
    for guess, fit in zip(guesses, fits):
        print(f"guess {guess:3d}: slope {fit.slope:+.6g} intercept {fit.intercept:+.6g} "
              f"r {fit.r:+.6f} classes {fit.n_classes_used}")
    return 0


def cmd_sweep(args) -> int:
    params = _resolve_sim_params(args)
    offsets = [float(v) for v in args.offsets.split(",")]
    bits = [int(v) for v in args.bits.split(",")]
    rows = []
    for bit in bits:
        for offset in offsets:
            config = _build_leakage_config(params, offset_override=offset, bit_override=bit)
            traces = simulate_campaign(params["key"], params["n"], config, params["seed"])
            result, _ = cpa_attack(traces, args.byte, args.stride)
            correct = aes.correct_last_round_guess(traces.true_key, args.byte)
            horses = wrong_horse_scan(traces, args.byte, correct)
            rows.append([bit, _fmt(offset),
                         "" if result.disclosure is None else result.disclosure,
                         len(horses)])

    def _emit(fh):
        writer = csv.writer(fh)
        writer.writerow(["bit", "offset", "disclosure", "wrong_horse_count"])
        writer.writerows(rows)

    if args.output:
        with open(args.output, "w", newline="") as fh:
            _emit(fh)
    else:
        _emit(sys.stdout)
    return 0


def cmd_convert(args) -> int:
    traces = import_raw(args.samples, args.meta, samples_per_trace=args.samples_per_trace)
    write_sctr(traces, args.output)
    print(json.dumps({"command": "convert", "n_traces": traces.n_traces,
                      "samples_per_trace": traces.samples_per_trace, "output": args.output}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scakit",
                                     description="last-round AES power-analysis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate a campaign into an SCTR file")
    _add_sim_arguments(p_sim)
    p_sim.add_argument("-o", "--output", required=True, help="SCTR file to write")
    p_sim.set_defaults(func=cmd_simulate)

    p_att = sub.add_parser("attack", help="CPA attack on an SCTR file")
    p_att.add_argument("sctr")
    p_att.add_argument("--byte", type=int, default=0, help="state byte index to attack")
    p_att.add_argument("--all-bytes", action="store_true", dest="all_bytes",
                       help="attack all 16 byte positions and assemble the key")
    p_att.add_argument("--stride", type=int, default=100, help="checkpoint stride in traces")
    p_att.add_argument("--report", help="write the JSON report here instead of stdout")
    p_att.add_argument("--evolution-csv", dest="evolution_csv",
                       help="write checkpoint,guess,r rows here (single-byte mode)")
    p_att.set_defaults(func=cmd_attack)

    p_fit = sub.add_parser("fit-hd", help="per-HD-class means and line fits")
    p_fit.add_argument("sctr")
    p_fit.add_argument("--byte", type=int, default=0)
    p_fit.add_argument("--guess", type=int, action="append", default=[],
                       help="key guess to fit (repeatable; default: the correct guess)")
    p_fit.add_argument("--sample", type=int, default=0, help="sample index to analyze")
    p_fit.add_argument("--points", help="CSV of per-class means (guess, hd, mean, count)")
    p_fit.add_argument("--fits", help="CSV of fit lines (guess, slope, intercept, r)")
    p_fit.set_defaults(func=cmd_fit_hd)

    p_sweep = sub.add_parser("sweep", help="offset/bit grid of simulated countermeasures")
    _add_sim_arguments(p_sweep)
    p_sweep.add_argument("--offsets", required=True, help="comma-separated offsets")
    p_sweep.add_argument("--bits", required=True, help="comma-separated bit indices")
    p_sweep.add_argument("--byte", type=int, default=0, help="state byte index to attack")
    p_sweep.add_argument("--stride", type=int, default=100)
    p_sweep.add_argument("-o", "--output", help="table CSV (default stdout)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_conv = sub.add_parser("convert", help="raw float32 + metadata CSV -> SCTR")
    p_conv.add_argument("samples", help="header-less little-endian float32 matrix")
    p_conv.add_argument("meta", help="CSV with plaintext_hex and ciphertext_hex columns")
    p_conv.add_argument("--samples-per-trace", type=int, dest="samples_per_trace",
                        help="expected trace length (checked against the file size)")
    p_conv.add_argument("-o", "--output", required=True, help="SCTR file to write")
    p_conv.set_defaults(func=cmd_convert)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
