"""Reproducible random streams.

Every walker gets its own stream, keyed by ``(seed, stream_id)``.  The stream is a
PCG64 generator seeded from a ``SeedSequence`` whose spawn key is the stream id, so
streams are statistically independent and replay bit-for-bit regardless of how
walkers are scheduled across threads.
"""
from dataclasses import dataclass, field

import numpy as np

__all__ = ["RngStream"]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A named, replayable random stream.

    Parameters
    ----------
    seed : int
        Root seed shared by all streams of one experiment (64-bit).
    stream_id : int
        Index of the stream; walker ``w`` uses ``stream_id = w``.
    """

    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (0 <= self.seed <= _MASK64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not (0 <= self.stream_id <= _MASK64):
            raise ValueError(f"stream_id must be a 64-bit unsigned integer, got {self.stream_id}")
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        object.__setattr__(self, "generator", np.random.Generator(np.random.PCG64(ss)))

    def child(self, stream_id):
        """Fresh stream with the same root seed and a different id."""
        return RngStream(self.seed, stream_id)

    def fresh(self):
        """Rewound copy of this stream (restarts the draw sequence)."""
        return RngStream(self.seed, self.stream_id)

    # Thin pass-throughs; keeping them here means callers never touch bit generators.
    def standard_normal(self, size):
        return self.generator.standard_normal(size)

    def random(self, size=None):
        return self.generator.random(size)
