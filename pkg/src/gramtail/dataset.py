"""Container for size observations under analysis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(eq=False)
class SizeDataset:
    """A multiset of positive size observations, kept sorted ascending.

    Corpus-derived instances hold positive integers (family sizes,
    profile sizes); model-generated samples may be real-valued.
    """

    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        arr = np.sort(np.asarray(self.values, dtype=float).ravel())
        if arr.size == 0:
            raise DomainError("SizeDataset may not be empty")
        if not np.all(np.isfinite(arr)) or arr[0] <= 0.0:
            raise DomainError("SizeDataset values must be finite and > 0")
        self.values = arr

    @property
    def n(self) -> int:
        return int(self.values.size)

    def tail(self, x_min: float) -> np.ndarray:
        """Observations >= x_min (sorted ascending)."""
        return self.values[self.values >= x_min]

    def distinct(self) -> np.ndarray:
        return np.unique(self.values)

    def __len__(self) -> int:
        return self.n


def as_values(data) -> np.ndarray:
    """Accept a SizeDataset or an array-like; return sorted float values."""
    if isinstance(data, SizeDataset):
        return data.values
    arr = np.sort(np.asarray(data, dtype=float).ravel())
    if arr.size and (not np.all(np.isfinite(arr)) or arr[0] <= 0.0):
        raise DomainError("values must be finite and > 0")
    return arr
