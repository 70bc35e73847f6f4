"""
Seeded, splittable random streams.

A stream is identified by a master seed and a path of (tag, index) steps.
Each stream maps to its own ``numpy.random.SeedSequence`` spawn key, so the
values drawn for kernel 17 do not depend on how many kernels came before it
or on which thread draws them.
"""
import zlib
from dataclasses import dataclass
from typing import Tuple

import numpy as np

MAX_SEED = 2 ** 64 - 1


def _tag_key(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


@dataclass(frozen=True)
class RandomStream:
    """Immutable handle on a deterministic random stream."""

    master_seed: int
    path: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.master_seed) <= MAX_SEED:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.master_seed}")

    def derive(self, tag: str, index: int) -> "RandomStream":
        """
        Derive a child stream for (tag, index).

        Args:
            tag: Purpose tag such as "kernel" or "proto"
            index: Index within that purpose

        Returns:
            Child stream
        """
        return RandomStream(self.master_seed, self.path + ((_tag_key(tag), int(index)),))

    def seed_sequence(self) -> np.random.SeedSequence:
        spawn_key = tuple(v for step in self.path for v in step)
        return np.random.SeedSequence(entropy=int(self.master_seed), spawn_key=spawn_key)

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))


def derive_stream(master: RandomStream, tag: str, index: int) -> RandomStream:
    return master.derive(tag, index)
