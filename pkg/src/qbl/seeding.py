"""Counter-based seeding for reproducible, scheduling-independent sampling.

Every sampler in the library takes a SeedSpec: a (root_seed, stream_id)
pair mapped injectively onto an independent Philox stream.  Trial i of an
experiment uses stream_id=i, so the multiset of samples drawn for a fixed
root_seed does not depend on evaluation order or worker count.

Gaussians come from numpy's ziggurat implementation; the bit-exact stream
is therefore stable for a fixed numpy version, and statistical tests (not
golden values) are the cross-version contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = 2**64


@dataclass(frozen=True)
class SeedSpec:
    """Root seed plus stream index, both 64-bit unsigned."""

    root_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= self.root_seed < _U64):
            raise ValueError(f"root_seed out of u64 range: {self.root_seed}")
        if not (0 <= self.stream_id < _U64):
            raise ValueError(f"stream_id out of u64 range: {self.stream_id}")

    def stream(self, stream_id: int) -> "SeedSpec":
        """Same root, different stream."""
        return SeedSpec(self.root_seed, stream_id)

    def child(self, salt: int) -> "SeedSpec":
        """Derived spec for internal sub-sampling (e.g. per-line seeds)."""
        return SeedSpec(self.root_seed, (self.stream_id * 0x9E3779B97F4A7C15 + salt) % _U64)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.root_seed,
                                    spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))


def as_seed(seed) -> SeedSpec:
    """Coerce an int or SeedSpec to a SeedSpec."""
    if isinstance(seed, SeedSpec):
        return seed
    return SeedSpec(int(seed))
