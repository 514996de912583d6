"""Randomness sources.

Every randomized operation in the package takes an explicit RandomSource.
Two modes exist:

* ``RandomSource.secure()`` draws key material from ``os.urandom`` and seeds
  its statistical generator from fresh OS entropy.  Use this for real runs.
* ``RandomSource.seeded(seed)`` is fully deterministic, including the bytes
  used for secret keys.  Use this for tests, replays, and benchmarks that
  must be reproducible byte for byte.

A source can ``spawn`` independent child streams, so that the two protocol
parties in a local run consume randomness exactly the way two remote
processes would (each from its own stream).
"""

from __future__ import annotations

import os

import numpy as np


class RandomSource:
    def __init__(self, seed_seq: np.random.SeedSequence, secure: bool):
        self._seed_seq = seed_seq
        self._secure = secure
        self.generator = np.random.Generator(np.random.PCG64(seed_seq))

    @classmethod
    def secure(cls) -> "RandomSource":
        return cls(np.random.SeedSequence(), secure=True)

    @classmethod
    def seeded(cls, seed: int) -> "RandomSource":
        if seed < 0:
            raise ValueError("seed must be non-negative")
        return cls(np.random.SeedSequence(seed), secure=False)

    @property
    def is_secure(self) -> bool:
        return self._secure

    def spawn(self, n: int) -> list["RandomSource"]:
        """Return n independent child sources.

        Children of a secure source are secure (they reseed from the OS);
        children of a seeded source are deterministic functions of the seed.
        """
        if self._secure:
            return [RandomSource.secure() for _ in range(n)]
        return [RandomSource(child, secure=False) for child in self._seed_seq.spawn(n)]

    def token_bytes(self, n: int) -> bytes:
        """n random bytes; OS entropy in secure mode."""
        if self._secure:
            return os.urandom(n)
        return self.generator.bytes(n)

    def __repr__(self) -> str:  # never expose state
        return f"RandomSource(secure={self._secure})"
