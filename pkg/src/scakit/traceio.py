"""Trace-set persistence and interchange.

Two formats are supported:

* SCTR, the native binary container.  Samples and per-trace metadata
  travel in one file so traces and ciphertexts cannot be misaligned.
  Layout (all integers little-endian):

  ===========  ======  ====================================================
  field        bytes   meaning
  ===========  ======  ====================================================
  magic        4       ``b"SCTR"``
  version      2       format version, currently 1
  flags        2       bit 0: a 16-byte true key follows the header
  n_traces     4       number of trace records
  spt          4       samples per trace
  seed         8       campaign seed, 0 meaning "no seed recorded"
  true_key     0/16    present iff flags bit 0 is set
  records      n*(32+4*spt)   per trace: plaintext(16) ciphertext(16)
                              samples (spt x float32)
  ===========  ======  ====================================================

* raw float32 matrix + metadata CSV, the shape external capture tools
  typically export.  The CSV has a header line and one row per trace
  with columns ``plaintext_hex`` and ``ciphertext_hex`` (32 hex chars
  each).  Sample bits survive both directions untouched.
"""

import csv
import os
import struct

import numpy as np

from .traces import TraceSet

SCTR_MAGIC = b"SCTR"
SCTR_VERSION = 1
_HEADER = struct.Struct("<4sHHIIQ")
_FLAG_TRUE_KEY = 0x0001


class SctrFormatError(ValueError):
    """A file violated the SCTR container format."""


class TraceImportError(ValueError):
    """Raw-trace import failed: inconsistent or malformed inputs."""


def _record_dtype(samples_per_trace):
    return np.dtype([("plaintext", np.uint8, 16),
                     ("ciphertext", np.uint8, 16),
                     ("samples", "<f4", (samples_per_trace,))])


def write_sctr(trace_set: TraceSet, destination) -> None:
    """Serialize a trace set to ``destination`` (path or binary file)."""
    flags = _FLAG_TRUE_KEY if trace_set.true_key is not None else 0
    seed = trace_set.seed if trace_set.seed is not None else 0
    header = _HEADER.pack(SCTR_MAGIC, SCTR_VERSION, flags,
                          trace_set.n_traces, trace_set.samples_per_trace, seed)
    records = np.empty(trace_set.n_traces, dtype=_record_dtype(trace_set.samples_per_trace))
    records["plaintext"] = trace_set.plaintexts
    records["ciphertext"] = trace_set.ciphertexts
    records["samples"] = trace_set.samples.reshape(trace_set.n_traces, -1)

    def _dump(fh):
        fh.write(header)
        if flags & _FLAG_TRUE_KEY:
            fh.write(bytes(trace_set.true_key))
        fh.write(records.tobytes())

    if hasattr(destination, "write"):
        _dump(destination)
    else:
        try:
            with open(destination, "wb") as fh:
                _dump(fh)
        except OSError as exc:
            raise OSError(f"cannot write trace file {destination!r}: {exc}") from exc


def read_sctr(source) -> TraceSet:
    """Parse and validate an SCTR file (path or binary file)."""
    if hasattr(source, "read"):
        data = source.read()
        name = getattr(source, "name", "<stream>")
    else:
        name = source
        try:
            with open(source, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise OSError(f"cannot read trace file {source!r}: {exc}") from exc

    if len(data) < _HEADER.size:
        raise SctrFormatError(
            f"{name}: truncated header, need {_HEADER.size} bytes but file has {len(data)}")
    magic, version, flags, n_traces, spt, seed = _HEADER.unpack_from(data)
    if magic != SCTR_MAGIC:
        raise SctrFormatError(f"{name}: bad magic {magic!r}, expected {SCTR_MAGIC!r}")
    if version != SCTR_VERSION:
        raise SctrFormatError(f"{name}: unsupported version {version}, expected {SCTR_VERSION}")
    if spt < 1:
        raise SctrFormatError(f"{name}: samples_per_trace must be >= 1, header says {spt}")

    key_len = 16 if flags & _FLAG_TRUE_KEY else 0
    expected = _HEADER.size + key_len + n_traces * (32 + 4 * spt)
    if len(data) != expected:
        raise SctrFormatError(
            f"{name}: size mismatch, header declares {expected} bytes but file has {len(data)}")

    offset = _HEADER.size
    true_key = None
    if key_len:
        true_key = np.frombuffer(data, dtype=np.uint8, count=16, offset=offset).copy()
        offset += 16
    records = np.frombuffer(data, dtype=_record_dtype(spt), count=n_traces, offset=offset)
    return TraceSet(
        samples=records["samples"].reshape(n_traces, spt).copy(),
        plaintexts=records["plaintext"].copy(),
        ciphertexts=records["ciphertext"].copy(),
        true_key=true_key,
        seed=int(seed) if seed != 0 else None,
    )


def export_raw(trace_set: TraceSet, samples_path, meta_path) -> None:
    """Dump samples as a header-less little-endian float32 matrix plus a
    metadata CSV.  The true key, if any, is not exported."""
    with open(samples_path, "wb") as fh:
        fh.write(np.ascontiguousarray(trace_set.samples, dtype="<f4").tobytes())
    with open(meta_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["plaintext_hex", "ciphertext_hex"])
        for pt, ct in zip(trace_set.plaintexts, trace_set.ciphertexts):
            writer.writerow([bytes(pt).hex(), bytes(ct).hex()])


def _parse_hex_field(value, row, column):
    value = value.strip()
    try:
        raw = bytes.fromhex(value)
    except ValueError as exc:
        raise TraceImportError(f"{column} in row {row}: not valid hex: {value!r}") from exc
    if len(raw) != 16:
        raise TraceImportError(
            f"{column} in row {row}: expected 32 hex chars, got {len(value)}")
    return np.frombuffer(raw, dtype=np.uint8)


def import_raw(samples_path, meta_path, samples_per_trace=None) -> TraceSet:
    """Load externally captured traces from a raw float32 dump and its
    metadata CSV.

    When ``samples_per_trace`` is given the sample file length is checked
    against it; otherwise the trace length is inferred from the file size
    and the CSV row count.  Any inconsistency is an error, never a silent
    truncation.  Rows are counted from 1 (the header line is row 0).
    """
    with open(meta_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceImportError(f"{meta_path}: metadata CSV is empty") from None
        header = [h.strip() for h in header]
        try:
            pt_col = header.index("plaintext_hex")
            ct_col = header.index("ciphertext_hex")
        except ValueError:
            raise TraceImportError(
                f"{meta_path}: header must name plaintext_hex and ciphertext_hex, "
                f"got {header}") from None
        plaintexts, ciphertexts = [], []
        for row_no, row in enumerate(reader, start=1):
            if len(row) <= max(pt_col, ct_col):
                raise TraceImportError(f"{meta_path}: row {row_no} has only {len(row)} fields")
            plaintexts.append(_parse_hex_field(row[pt_col], row_no, "plaintext_hex"))
            ciphertexts.append(_parse_hex_field(row[ct_col], row_no, "ciphertext_hex"))
    n = len(plaintexts)
    if n == 0:
        raise TraceImportError(f"{meta_path}: no metadata rows")

    size = os.path.getsize(samples_path)
    if size % 4 != 0:
        raise TraceImportError(
            f"{samples_path}: size {size} is not a whole number of float32 samples")
    n_floats = size // 4
    if samples_per_trace is not None:
        if n_floats != n * samples_per_trace:
            raise TraceImportError(
                f"row-count mismatch: {meta_path} has {n} rows but {samples_path} holds "
                f"{n_floats} samples, not {n} x {samples_per_trace}")
        spt = samples_per_trace
    else:
        if n_floats % n != 0:
            raise TraceImportError(
                f"row-count mismatch: {samples_path} holds {n_floats} samples, "
                f"not divisible by the {n} metadata rows in {meta_path}")
        spt = n_floats // n
    if spt == 0:
        raise TraceImportError(f"{samples_path}: traces would have zero samples")

    samples = np.fromfile(samples_path, dtype="<f4").reshape(n, spt)
    return TraceSet(samples=samples, plaintexts=np.vstack(plaintexts),
                    ciphertexts=np.vstack(ciphertexts))
