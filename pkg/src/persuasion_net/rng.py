"""Reproducible random streams.

Every stochastic component draws from its own generator, derived from a
single base seed plus a purpose tag and optional integer indices (replica
number, bucket pair, chunk, ...).  Identical ``RngSpec`` and tags always
yield bit-identical draws, no matter how work is scheduled across threads.

The generator algorithm is named in run configs so results can be pinned.
Philox (counter based, arbitrarily splittable) is the default.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

_ALGORITHMS = {
    "philox": np.random.Philox,
    "pcg64": np.random.PCG64,
}

_MASK64 = (1 << 64) - 1


def _tag_word(tag) -> int:
    if isinstance(tag, str):
        return zlib.crc32(tag.encode("utf-8"))
    if isinstance(tag, (int, np.integer)):
        return int(tag) & _MASK64
    raise TypeError(f"stream tag must be str or int, got {type(tag).__name__}")


@dataclass(frozen=True)
class RngSpec:
    """Base seed plus the stream-derivation rule."""

    base_seed: int
    algorithm: str = "philox"

    def __post_init__(self):
        if self.algorithm not in _ALGORITHMS:
            raise ValueError(
                f"unknown rng algorithm {self.algorithm!r}; "
                f"expected one of {sorted(_ALGORITHMS)}"
            )

    def stream(self, *tags) -> np.random.Generator:
        """Derive an independent generator for (purpose, index, ...) tags."""
        words = [int(self.base_seed) & _MASK64] + [_tag_word(t) for t in tags]
        ss = np.random.SeedSequence(words)
        return np.random.Generator(_ALGORITHMS[self.algorithm](ss))

    def child(self, *tags) -> "RngSpec":
        """A derived spec whose streams are independent of the parent's."""
        words = [int(self.base_seed) & _MASK64] + [_tag_word(t) for t in tags]
        state = np.random.SeedSequence(words).generate_state(2, dtype=np.uint64)
        return RngSpec(base_seed=int(state[0] ^ (state[1] << 1) & _MASK64),
                       algorithm=self.algorithm)

    def to_dict(self) -> dict:
        return {"base_seed": int(self.base_seed), "algorithm": self.algorithm}

    @classmethod
    def from_dict(cls, d: dict) -> "RngSpec":
        return cls(base_seed=int(d["base_seed"]), algorithm=d.get("algorithm", "philox"))
