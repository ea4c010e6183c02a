"""Named deterministic random streams, one per module per replication."""

import zlib
from typing import Sequence, TypeVar

import numpy as np

STREAMS = ("macro", "finance", "energy", "climate", "damages", "policy", "world")

T = TypeVar("T")


class RngStream:
    """Wrapper around a PCG64 generator keyed by (seed, stream_id).

    The stream label is hashed with crc32 into the seed sequence spawn key, so
    the same pair yields bit-identical draws on every platform and the order
    in which streams are created does not matter.
    """

    def __init__(self, seed: int, stream_id: str):
        self._seed = int(seed)
        self._stream_id = stream_id
        sequence = np.random.SeedSequence(
            entropy=self._seed & 0xFFFFFFFFFFFFFFFF,
            spawn_key=(zlib.crc32(stream_id.encode("utf-8")),),
        )
        self._gen = np.random.Generator(np.random.PCG64(sequence))

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def stream_id(self) -> str:
        return self._stream_id

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def random(self) -> float:
        return float(self._gen.random())

    def uniform(self, low: float, high: float) -> float:
        return float(self._gen.uniform(low, high))

    def normal(self, loc: float = 0.0, scale: float = 1.0) -> float:
        return float(self._gen.normal(loc, scale))

    def beta(self, a: float, b: float) -> float:
        return float(self._gen.beta(a, b))

    def poisson(self, lam: float) -> int:
        return int(self._gen.poisson(lam))

    def integers(self, low: int, high: int) -> int:
        return int(self._gen.integers(low, high))

    def choice_index(self, weights: Sequence[float]) -> int:
        """Index drawn with probability proportional to `weights`."""
        p = np.asarray(weights, dtype=float)
        total = p.sum()
        if total <= 0:
            return self.integers(0, len(p))
        cumulative = np.cumsum(p / total)
        return int(min(np.searchsorted(cumulative, self._gen.random(), side="right"), len(p) - 1))

    def shuffled(self, items: Sequence[T]) -> list[T]:
        order = self._gen.permutation(len(items))
        return [items[i] for i in order]


def make_streams(seed: int) -> dict[str, RngStream]:
    return {name: RngStream(seed, name) for name in STREAMS}
