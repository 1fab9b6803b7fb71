"""Seeded random streams shared by every sampler."""
import logging

import numpy as np

from src.exceptions import InvalidInputError

logger = logging.getLogger(__name__)

SEED_BITS = 64


class SeededGenerator:
    """
    Single-owner wrapper around a PCG64 ``numpy.random.Generator``.

    Not safe for concurrent use; hand a generator to one thread at a time, or
    split independent children with ``spawn``.
    """

    def __init__(self, seed: int):
        if not 0 <= seed < 2**SEED_BITS:
            raise InvalidInputError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self._seed = seed
        self._sequence = np.random.SeedSequence(seed)
        self._rng = np.random.default_rng(self._sequence)

    @classmethod
    def _from_sequence(cls, seed: int, sequence: np.random.SeedSequence) -> "SeededGenerator":
        child = cls.__new__(cls)
        child._seed = seed
        child._sequence = sequence
        child._rng = np.random.default_rng(sequence)
        return child

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def numpy(self) -> np.random.Generator:
        return self._rng

    def uniform(self) -> float:
        """One draw, uniform on [-1, 1]."""
        return float(self._rng.uniform(-1.0, 1.0))

    def uniforms(self, shape) -> np.ndarray:
        return self._rng.uniform(-1.0, 1.0, size=shape)

    def unit_uniforms(self, shape) -> np.ndarray:
        """Draws uniform on [0, 1)."""
        return self._rng.random(shape)

    def sign(self) -> int:
        return int(self.signs(1)[0])

    def signs(self, shape) -> np.ndarray:
        """Fair signs in {-1.0, 1.0}."""
        return np.where(self._rng.random(shape) < 0.5, -1.0, 1.0)

    def permutation(self, n: int) -> list[int]:
        """Uniform permutation of range(n) (Fisher-Yates shuffle)."""
        return [int(i) for i in self._rng.permutation(n)]

    def permute_rows(self, rows: np.ndarray) -> np.ndarray:
        """Shuffle each row independently."""
        return self._rng.permuted(rows, axis=1)

    def spawn(self, count: int) -> list["SeededGenerator"]:
        """Independent child streams, reproducible from this generator's seed."""
        children = self._sequence.spawn(count)
        logger.debug(f"Spawned {count} child streams from seed {self._seed}")
        return [SeededGenerator._from_sequence(self._seed, c) for c in children]
