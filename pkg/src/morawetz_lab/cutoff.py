"""Dyadic cutoff for Littlewood-Paley projections.

The bump ``eta(t) = exp(-1/((t-1/2)(2-t)))`` on (1/2, 2) is normalized by its
own dyadic sum, ``phi(t) = eta(t) / sum_j eta(2^j t)``.  The denominator is
invariant under t -> 2t, so ``sum_k phi(2^k t) = 1`` holds identically for
every t > 0; at most two terms of the sum are nonzero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["DyadicCutoff", "default_cutoff"]


def _eta(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    inside = (t > 0.5) & (t < 2.0)
    ti = t[inside]
    out[inside] = np.exp(-1.0 / ((ti - 0.5) * (2.0 - ti)))
    return out


@dataclass(frozen=True)
class DyadicCutoff:
    """Smooth phi supported in (support_lo, support_hi) = (1/2, 2), values in [0, 1]."""

    support_lo: float = 0.5
    support_hi: float = 2.0

    def __post_init__(self) -> None:
        if (self.support_lo, self.support_hi) != (0.5, 2.0):
            raise DomainError("the dyadic cutoff is fixed to the band (1/2, 2)")

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros_like(t)
        pos = t > 0
        tp = t[pos]
        if tp.size:
            # only j with 2^j t in (1/2,2) contribute; they lie in a 3-window
            j0 = np.floor(-np.log2(tp))
            den = np.zeros_like(tp)
            for dj in (-1.0, 0.0, 1.0):
                den += _eta(tp * 2.0 ** (j0 + dj))
            out[pos] = _eta(tp) / den
        return out[0] if scalar else out

    def partition_deviation(self, t) -> np.ndarray:
        """|sum_k phi(2^k t) - 1| evaluated with the (at most two) active terms."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        total = np.zeros_like(t)
        j0 = np.floor(-np.log2(t))
        for dj in (-1.0, 0.0, 1.0):
            total += self(t * 2.0 ** (j0 + dj))
        return np.abs(total - 1.0)


def default_cutoff() -> DyadicCutoff:
    return DyadicCutoff()
