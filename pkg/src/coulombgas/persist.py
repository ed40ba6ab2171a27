"""On-disk formats: checkpoint binaries and delimited tables.

Checkpoint layout (little-endian throughout):

    bytes 0-4   magic "CLGV1"
    int32       N
    int32       d
    float64[N*d]  q, row-major
    float64[N*d]  p, row-major
    uint32      length of the RNG state blob
    bytes       RNG state blob

Trajectory CSV columns, in order: t, H, logW, minDist, kinetic, then the
flattened positions q0_0 .. q{N-1}_{d-1}, then the flattened momenta.  One
row per state snapshot.  Floats are written with repr-level precision so
deterministic reruns are byte-identical.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError, TruncationError
from .system import ParticleState

MAGIC_PREFIX = b"CLGV"
MAGIC = MAGIC_PREFIX + b"1"


def write_checkpoint(path, state: ParticleState, rng_blob: bytes = b"") -> None:
    n, d = state.q.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<ii", n, d))
        fh.write(np.ascontiguousarray(state.q, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(state.p, dtype="<f8").tobytes())
        fh.write(struct.pack("<I", len(rng_blob)))
        fh.write(rng_blob)


def read_checkpoint(path) -> tuple[ParticleState, bytes]:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC):
        raise TruncationError("checkpoint shorter than its magic")
    magic = data[: len(MAGIC)]
    if magic != MAGIC:
        if magic[: len(MAGIC_PREFIX)] == MAGIC_PREFIX:
            raise FormatError(
                f"checkpoint version mismatch: expected {MAGIC.decode()}, "
                f"found {magic.decode(errors='replace')}")
        raise FormatError("not a checkpoint file (bad magic)")
    off = len(MAGIC)
    if len(data) < off + 8:
        raise TruncationError("checkpoint header truncated")
    n, d = struct.unpack_from("<ii", data, off)
    off += 8
    if n < 1 or d < 1:
        raise FormatError(f"implausible header: N={n}, d={d}")
    need = 2 * n * d * 8
    if len(data) < off + need + 4:
        raise TruncationError("checkpoint state payload truncated")
    q = np.frombuffer(data, dtype="<f8", count=n * d, offset=off).reshape(n, d)
    off += n * d * 8
    p = np.frombuffer(data, dtype="<f8", count=n * d, offset=off).reshape(n, d)
    off += n * d * 8
    (blob_len,) = struct.unpack_from("<I", data, off)
    off += 4
    if len(data) < off + blob_len:
        raise TruncationError("checkpoint RNG state truncated")
    blob = data[off: off + blob_len]
    return ParticleState(q.copy(), p.copy()), blob


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def state_columns(n: int, d: int) -> list[str]:
    return [f"q{i}_{k}" for i in range(n) for k in range(d)] + \
           [f"p{i}_{k}" for i in range(n) for k in range(d)]


def write_trajectory_csv(path, record) -> None:
    state0 = record.snapshots[0]
    n, d = state0.q.shape
    header = ["t", "H", "logW", "minDist", "kinetic"] + state_columns(n, d)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for snap_t, idx, state in zip(record.snapshot_times,
                                      record.snapshot_indices,
                                      record.snapshots):
            row = [fmt(snap_t), fmt(record.energy[idx]),
                   fmt(record.log_w[idx]), fmt(record.min_dist[idx]),
                   fmt(record.kinetic[idx])]
            row += [fmt(v) for v in state.q.ravel()]
            row += [fmt(v) for v in state.p.ravel()]
            fh.write(",".join(row) + "\n")


def write_hmc_csv(path, result) -> None:
    n, d = result.positions.shape[1:]
    header = ["iteration", "H", "accept"] + \
        [f"q{i}_{k}" for i in range(n) for k in range(d)]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for it in range(len(result.positions)):
            row = [str(it), fmt(result.energies[it]),
                   str(int(result.accepts[it]))]
            row += [fmt(v) for v in result.positions[it].ravel()]
            fh.write(",".join(row) + "\n")


def write_lemma_csv(path, rows) -> None:
    header = ["sample", "N", "d", "exponent", "j_value", "rhs", "slack",
              "rel_slack"]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for k, row in enumerate(rows):
            fh.write(",".join([str(k), str(row["N"]), str(row["d"]),
                               fmt(row["exponent"]), fmt(row["j_value"]),
                               fmt(row["rhs"]), fmt(row["slack"]),
                               fmt(row["rel_slack"])]) + "\n")


def read_table_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV with a header line into (columns, 2-D array)."""
    with open(path, "r", newline="") as fh:
        header = fh.readline().strip()
        if not header:
            raise FormatError(f"{path}: empty table")
        columns = header.split(",")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from None
    if data.size and data.shape[1] != len(columns):
        raise FormatError(f"{path}: row width does not match header")
    return columns, data


def write_histogram_csv(path, edges: np.ndarray, counts: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("bin_left,bin_right,count\n")
        for left, right, count in zip(edges[:-1], edges[1:], counts):
            fh.write(f"{fmt(left)},{fmt(right)},{fmt(count)}\n")
