"""Deterministic, splittable random streams.

All randomness derives from a single 64-bit seed.  Streams are counter-based
(Philox) and keyed by (seed, stream index), so per-replica generators are
reproducible independently of scheduling or evaluation order.  Stream indices
are assigned per role below; ensemble replicas use ``REPLICA_BASE + index``.
"""

from __future__ import annotations

import json

import numpy as np

STREAM_INITIAL = 0
STREAM_SIMULATE = 1
STREAM_HMC = 2
STREAM_OVERDAMPED = 3
STREAM_VERIFY = 4
STREAM_BOOTSTRAP = 5
REPLICA_BASE = 1000


def make_generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator for the given (seed, stream) pair."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1),
                                spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def generator_state_bytes(gen: np.random.Generator) -> bytes:
    """Serialize the full bit-generator state (JSON, integers only)."""
    state = gen.bit_generator.state

    def plain(obj):
        if isinstance(obj, dict):
            return {k: plain(v) for k, v in obj.items()}
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (np.integer,)):
            return int(obj)
        return obj

    return json.dumps(plain(state), sort_keys=True).encode("utf-8")


def restore_generator(blob: bytes) -> np.random.Generator:
    """Rebuild a generator from :func:`generator_state_bytes` output."""
    state = json.loads(blob.decode("utf-8"))
    name = state.get("bit_generator", "Philox")
    bitgen = getattr(np.random, name)()
    inner = state.get("state", {})
    for key in ("counter", "key"):
        if key in inner:
            inner[key] = np.array(inner[key], dtype=np.uint64)
    if "buffer" in state:
        state["buffer"] = np.array(state["buffer"], dtype=np.uint64)
    bitgen.state = state
    return np.random.Generator(bitgen)
