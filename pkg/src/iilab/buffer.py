"""Replay buffer of observed corrections."""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError


class ReplayBuffer:
    """Append-only store; a finite capacity turns it into a ring.

    Sampling is uniform without replacement within a batch; when fewer
    records exist than requested, all of them are returned (shuffled).
    """

    def __init__(self, capacity: int | None = None):
        if capacity is not None and capacity < 1:
            raise ConfigurationError("capacity must be positive when set")
        self.capacity = capacity
        self._records = []

    def append(self, correction) -> None:
        self._records.append(correction)
        if self.capacity is not None and len(self._records) > self.capacity:
            self._records.pop(0)  # evict oldest

    def sample(self, batch_size: int, rng) -> list:
        if batch_size < 1:
            raise ConfigurationError("batch_size must be positive")
        n = len(self._records)
        if n == 0:
            raise ConfigurationError("cannot sample from an empty buffer")
        k = min(batch_size, n)
        idx = rng.choice(n, size=k, replace=False)
        return [self._records[i] for i in idx]

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)
