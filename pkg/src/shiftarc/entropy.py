"""Entropy-rate estimates from finite windows (natural logarithms throughout)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .sequence import Window
from .transport import BlockDistribution, block_counts

GUARD_FACTOR = 100
LZ_MIN_LENGTH = 10 ** 4


@dataclass(frozen=True)
class EntropyProfile:
    """Block entropies ``H(j)`` and conditional entropies ``h_j = H(j) - H(j-1)``."""

    k_values: tuple
    block_entropies: tuple
    conditional: tuple
    chosen_estimate: float
    method: str = "conditional-plugin"
    guard_factor: int = GUARD_FACTOR
    window_length: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_csv(self) -> str:
        rows = ["k,H_k,h_k"]
        rows += [f"{k},{H:.12g},{h:.12g}"
                 for k, H, h in zip(self.k_values, self.block_entropies, self.conditional)]
        return "\n".join(rows) + "\n"


def _entropy_from_counts(counts: np.ndarray) -> float:
    # -sum p log p is exactly 0 for a single block, unlike log N - sum c log c / N
    p = counts[counts > 0] / counts.sum()
    return max(0.0, float(-np.dot(p, np.log(p))))


def block_entropy(p: BlockDistribution) -> float:
    """Shannon entropy ``-sum w log w`` of a block distribution, in nats."""
    return max(0.0, -math.fsum(float(w) * math.log(w) for w in p.weights.values()))


def entropy_estimate(w: Window, k: int, guard_factor: int = GUARD_FACTOR) -> EntropyProfile:
    """Plug-in block entropies ``H(1..k)`` and the conditional estimate ``h_k``.

    Raises
    ------
    ValueError
        If the window is shorter than ``guard_factor * n**k``.
    """
    if k < 1:
        raise ValueError("k must be positive")
    need = guard_factor * w.n ** k
    if len(w) < need:
        raise ValueError(f"window of length {len(w)} too short for k={k}: need at least {need}")
    H = [_entropy_from_counts(block_counts(w, j)[1]) for j in range(1, k + 1)]
    h = [H[0]] + [max(0.0, b - a) for a, b in zip(H, H[1:])]
    return EntropyProfile(tuple(range(1, k + 1)), tuple(H), tuple(h), h[-1],
                          guard_factor=guard_factor, window_length=len(w))


def lz_entropy_estimate(w: Window, min_length: int = LZ_MIN_LENGTH) -> float:
    """Incremental-parsing (LZ78) estimate ``c log c / N`` in nats.

    ``c`` is the number of phrases in the parse of the window into
    shortest not-yet-seen phrases.  Meant as a cross-check only.
    """
    N = len(w)
    if N < min_length:
        raise ValueError(f"window of length {N} too short for LZ estimate: need {min_length}")
    trie = {}
    node = 0
    phrases = 0
    next_id = 1
    for s in w.symbols.tolist():
        key = (node, s)
        child = trie.get(key)
        if child is None:
            trie[key] = next_id
            next_id += 1
            phrases += 1
            node = 0
        else:
            node = child
    if node:
        phrases += 1  # unfinished last phrase
    return phrases * math.log(phrases) / N


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def fano_bound(delta: float, n: int) -> float:
    """``H_b(delta) + delta * log(n - 1)``: entropy change allowed by a
    symbol-disagreement rate ``delta``."""
    delta = float(delta)
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0, 1]")
    extra = delta * math.log(n - 1) if n > 2 else 0.0
    return binary_entropy(delta) + extra
