"""Path-keyed random streams.

Every random stream in a run hangs off one master seed and a label path::

    root
    └── rep/<i>
        ├── market
        ├── hints/<p>
        └── strategy/<kind>

``split_stream(seed, ["rep", 3, "hints", "0.05"])`` always yields the same
generator, and different paths yield statistically independent generators.
Nothing depends on the order in which streams are created, so repetitions can
run on any worker in any order.
"""
from __future__ import annotations

import hashlib
from typing import Iterable, Union

import numpy as np

Label = Union[str, int]

SEED_MASK = (1 << 64) - 1


def _encode(labels: Iterable[Label]) -> bytes:
    parts = []
    for label in labels:
        if isinstance(label, bool) or not isinstance(label, (str, int)):
            raise TypeError(f"stream labels must be str or int, got {label!r}")
        tag = "i" if isinstance(label, int) else "s"
        parts.append(f"{tag}:{label}")
    # length-prefix each part so ("ab", "c") and ("a", "bc") never collide
    return b"".join(len(p).to_bytes(4, "big") + p.encode() for p in parts)


def stream_key(master_seed: int, labels: Iterable[Label]) -> list[int]:
    """Entropy words for the stream at ``labels`` below ``master_seed``."""
    labels = list(labels)
    if not labels:
        raise ValueError("stream label path must be non-empty")
    digest = hashlib.sha256(_encode(labels)).digest()
    words = [int.from_bytes(digest[k:k + 4], "little") for k in range(0, 32, 4)]
    return [int(master_seed) & SEED_MASK, *words]


def split_stream(master_seed: int, labels: Iterable[Label]) -> np.random.Generator:
    """Return the deterministic generator for a label path."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(stream_key(master_seed, labels))))
