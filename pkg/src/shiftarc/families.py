"""Shift-family descriptions, admissibility, and word-level structure checks.

Every family exposes ``admits(word)`` on plain tuples of symbols; the module
functions add alphabet validation and work on :class:`~shiftarc.sequence.Window`.
Word-level checks (heredity, safe symbols, word counts) enumerate the
admissible language by extending admissible prefixes only, which is valid
because every supported language is closed under taking subwords.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, NamedTuple

import numpy as np

from .beta import BetaNumber
from .sequence import Window

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 1 << 22
BFREE_PERIOD_BUDGET = 10 ** 7


class BudgetExceeded(ValueError):
    """An enumeration would exceed its configured size bound."""


def _bytes(word) -> bytes:
    return bytes(int(s) for s in word)


# --------------------------------------------------------------------------
# family specs


@dataclass(frozen=True)
class Spacing:
    """Spacing shift: two 1s at distance ``d`` require ``d`` in P.

    ``rule`` is one of ``explicit``, ``evens``, ``odds``, ``all``, ``none``.
    For ``explicit`` the set is ``members``; if ``above`` is given, every gap
    larger than ``above`` also belongs to P.
    """

    rule: str = "explicit"
    members: frozenset = frozenset()
    above: int | None = None
    family = "spacing"
    alphabet_size = 2

    def __post_init__(self):
        if self.rule not in ("explicit", "evens", "odds", "all", "none"):
            raise ValueError(f"unknown spacing rule {self.rule!r}")
        members = frozenset(int(p) for p in self.members)
        if any(p < 1 for p in members):
            raise ValueError("spacing set P must contain positive integers")
        object.__setattr__(self, "members", members)

    def contains(self, d: int) -> bool:
        if self.rule == "all":
            return True
        if self.rule == "none":
            return False
        if self.rule == "evens":
            return d % 2 == 0
        if self.rule == "odds":
            return d % 2 == 1
        return d in self.members or (self.above is not None and d > self.above)

    def admits(self, word) -> bool:
        ones = np.flatnonzero(np.asarray(word, dtype=np.int64))
        if ones.size < 2:
            return True
        gaps = np.unique((ones[None, :] - ones[:, None])[np.triu_indices(ones.size, 1)])
        return all(self.contains(int(d)) for d in gaps)


@dataclass(frozen=True)
class BoundedDensity:
    """Every length-p subword has symbol sum at most ``f[p-1]`` (for p <= len(f))."""

    f: tuple
    family = "bounded_density"
    alphabet_size = 2

    def __post_init__(self):
        f = tuple(Fraction(v) if not isinstance(v, float) else Fraction(repr(v)) for v in self.f)
        if not f:
            raise ValueError("bounded-density table needs at least f(1)")
        if any(v < 0 for v in f):
            raise ValueError("bounded-density values must be nonnegative")
        object.__setattr__(self, "f", f)

    def admits(self, word) -> bool:
        arr = np.asarray(word, dtype=np.int64)
        csum = np.concatenate(([0], np.cumsum(arr)))
        for p in range(1, min(len(arr), len(self.f)) + 1):
            if int((csum[p:] - csum[:-p]).max()) > self.f[p - 1]:
                return False
        return True


@dataclass(frozen=True)
class Beta:
    """Beta shift, checked with Parry's lexicographic criterion."""

    beta: str
    digits_budget: int = 64
    family = "beta"

    @cached_property
    def number(self) -> BetaNumber:
        return BetaNumber(self.beta, self.digits_budget)

    def __post_init__(self):
        object.__setattr__(self, "beta", str(self.beta))
        self.number  # validate eagerly

    @property
    def alphabet_size(self) -> int:
        return self.number.alphabet_size

    def admits(self, word) -> bool:
        return self.number.admits(word)


def _check_moduli(B) -> tuple:
    B = tuple(int(b) for b in B)
    if any(b < 2 for b in B):
        raise ValueError("every b in B must be >= 2")
    return B


@dataclass(frozen=True)
class BFree:
    """Orbit closure of the characteristic sequence of B-free integers (finite B)."""

    B: tuple
    family = "bfree"
    alphabet_size = 2

    def __post_init__(self):
        object.__setattr__(self, "B", _check_moduli(self.B))

    @cached_property
    def period(self) -> int:
        return reduce(math.lcm, self.B, 1)

    def admits(self, word) -> bool:
        word = tuple(word)
        if self.period > BFREE_PERIOD_BUDGET:
            raise BudgetExceeded(
                f"B-free period lcm(B)={self.period} exceeds {BFREE_PERIOD_BUDGET}")
        # the characteristic sequence is periodic with period lcm(B)
        ref = bfree_characteristic(self.B, 0, self.period + len(word))
        return ref.symbols.tobytes().find(_bytes(word)) >= 0


@dataclass(frozen=True)
class BAdmissible:
    """Support misses some residue class mod b, for every b in B."""

    B: tuple
    family = "badmissible"
    alphabet_size = 2

    def __post_init__(self):
        object.__setattr__(self, "B", _check_moduli(self.B))

    def admits(self, word) -> bool:
        ones = np.flatnonzero(np.asarray(word, dtype=np.int64))
        return all(np.unique(ones % b).size < b for b in self.B)


@dataclass(frozen=True)
class SFT:
    """Shift of finite type given by a finite set of forbidden words."""

    n: int
    forbidden: tuple
    family = "sft"

    def __post_init__(self):
        words = []
        for w in self.forbidden:
            w = tuple(int(c) for c in w)
            if not w or any(not 0 <= s < self.n for s in w):
                raise ValueError(f"forbidden word {w} is empty or leaves the alphabet")
            words.append(w)
        object.__setattr__(self, "forbidden", tuple(sorted(set(words))))

    @property
    def alphabet_size(self) -> int:
        return self.n

    @cached_property
    def _patterns(self):
        return [_bytes(w) for w in self.forbidden]

    def admits(self, word) -> bool:
        data = _bytes(word)
        return not any(p in data for p in self._patterns)


@dataclass(frozen=True)
class Full:
    n: int = 2
    family = "full"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("alphabet size must be >= 2")

    @property
    def alphabet_size(self) -> int:
        return self.n

    def admits(self, word) -> bool:
        return True


FAMILIES = {cls.family: cls for cls in (Spacing, BoundedDensity, Beta, BFree, BAdmissible, SFT, Full)}


# --------------------------------------------------------------------------
# spec files


def _word_from_json(item, n):
    if isinstance(item, str):
        return tuple(int(c) for c in item) if n <= 10 else tuple(int(t) for t in item.split())
    return tuple(int(s) for s in item)


def spec_from_dict(d: dict):
    """Build a family spec from its JSON form (``family`` tag plus fields)."""
    family = d.get("family")
    if family == "spacing":
        P = d.get("P", [])
        if isinstance(P, str):
            return Spacing(rule=P)
        return Spacing(members=frozenset(P), above=d.get("max"))
    if family == "bounded_density":
        return BoundedDensity(tuple(Fraction(str(v)) for v in d["f"]))
    if family == "beta":
        return Beta(str(d["beta"]), int(d.get("digits_budget", 64)))
    if family == "bfree":
        return BFree(tuple(d["B"]))
    if family == "badmissible":
        return BAdmissible(tuple(d["B"]))
    if family == "sft":
        n = int(d.get("n", 2))
        return SFT(n, tuple(_word_from_json(w, n) for w in d["forbidden"]))
    if family == "full":
        return Full(int(d.get("n", 2)))
    raise ValueError(f"unknown family {family!r}")


def spec_to_dict(spec) -> dict:
    if isinstance(spec, Spacing):
        if spec.rule != "explicit":
            return {"family": "spacing", "P": spec.rule}
        out = {"family": "spacing", "P": sorted(spec.members)}
        if spec.above is not None:
            out["max"] = spec.above
        return out
    if isinstance(spec, BoundedDensity):
        return {"family": "bounded_density", "f": [str(v) for v in spec.f]}
    if isinstance(spec, Beta):
        return {"family": "beta", "beta": spec.beta, "digits_budget": spec.digits_budget}
    if isinstance(spec, (BFree, BAdmissible)):
        return {"family": spec.family, "B": list(spec.B)}
    if isinstance(spec, SFT):
        sep = "" if spec.n <= 10 else " "
        return {"family": "sft", "n": spec.n,
                "forbidden": [sep.join(map(str, w)) for w in spec.forbidden]}
    if isinstance(spec, Full):
        return {"family": "full", "n": spec.n}
    raise TypeError(f"not a family spec: {spec!r}")


def load_spec(path):
    with open(path) as fh:
        return spec_from_dict(json.load(fh))


# --------------------------------------------------------------------------
# admissibility


def is_admissible(spec, w: Window) -> bool:
    """True iff ``w`` occurs in some point of the shift described by ``spec``."""
    if w.n != spec.alphabet_size:
        raise ValueError(
            f"alphabet mismatch: window over {w.n} symbols, {spec.family} shift over {spec.alphabet_size}")
    return spec.admits(w.symbols)


def bfree_characteristic(B, j_lo: int, j_hi: int) -> Window:
    """Indicator of B-free integers on ``[j_lo, j_hi]`` (inclusive).

    Entry ``j`` is 1 iff no ``b`` in B divides ``|j|``; in particular entry 0
    is 0 whenever B is nonempty.
    """
    if j_lo > j_hi:
        raise ValueError("empty range: j_lo > j_hi")
    B = _check_moduli(B)
    arr = np.ones(j_hi - j_lo + 1, dtype=np.uint8)
    if not B:
        log.warning("empty B: every integer is B-free")
    for b in B:
        first = -(-j_lo // b) * b
        arr[first - j_lo::b] = 0
    return Window._trusted(arr, 2, j_lo)


# --------------------------------------------------------------------------
# language enumeration


def _guard(n: int, max_len: int, budget: int) -> None:
    if n ** max_len > budget:
        raise BudgetExceeded(f"enumeration bound n**max_len = {n}**{max_len} exceeds budget {budget}")


def language_levels(spec, max_len: int, budget: int = DEFAULT_BUDGET):
    """Admissible words of lengths ``1..max_len``, each level in lexicographic order.

    ``budget`` bounds the total number of admissible words generated.
    """
    n = spec.alphabet_size
    level = [(a,) for a in range(n) if spec.admits((a,))]
    total = len(level)
    levels = [level]
    for _ in range(1, max_len):
        nxt = []
        for w in level:
            for a in range(n):
                cand = w + (a,)
                if spec.admits(cand):
                    nxt.append(cand)
        total += len(nxt)
        if total > budget:
            raise BudgetExceeded(f"more than {budget} admissible words up to length {len(levels) + 1}")
        levels.append(nxt)
        level = nxt
    return levels


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: tuple | None = None
    max_len: int = 0
    mode: str = "hereditary"

    def __post_init__(self):
        if not self.holds and self.witness is None:
            raise ValueError("a failing verdict needs a witness")

    def to_dict(self) -> dict:
        out = {"holds": self.holds, "mode": self.mode, "max_len": self.max_len}
        if self.witness is not None:
            out["witness"] = [w.to_string() for w in self.witness]
        return out


def _first_failure(level, admissible, variants):
    # largest admissible word first, smallest offending variant first
    for w in reversed(level):
        for v in variants(w):
            if v not in admissible:
                return w, v
    raise AssertionError("single-step failure without a witness")


def _structure_check(spec, max_len, budget, step, variants, mode) -> Verdict:
    n = spec.alphabet_size
    _guard(n, max_len, budget)
    for level in language_levels(spec, max_len, budget):
        admissible = set(level)
        # one-coordinate moves suffice: any target is reached by a chain of
        # single moves through admissible words, so the first bad move is a
        # counterexample as well
        if all(v in admissible for w in level for v in step(w)):
            continue
        w, v = _first_failure(level, admissible, variants)
        return Verdict(False, (Window(w, n), Window(v, n)), max_len, mode)
    return Verdict(True, None, max_len, mode)


def heredity_check(spec, max_len: int, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Is every word below an admissible word admissible (lengths <= max_len)?

    ``holds=True`` means no counterexample up to ``max_len``.  The witness
    is ``(w, w')`` with ``w`` the lexicographically largest admissible word of
    the shortest failing length and ``w'`` the smallest inadmissible word
    below it.
    """
    def step(w):
        for i, s in enumerate(w):
            if s > 0:
                yield w[:i] + (s - 1,) + w[i + 1:]

    def variants(w):
        return itertools.product(*(range(s + 1) for s in w))

    return _structure_check(spec, max_len, budget, step, variants, "hereditary")


def safe_symbol_check(spec, a: int, max_len: int, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Does overwriting any positions of an admissible word by ``a`` stay admissible?"""
    if not 0 <= a < spec.alphabet_size:
        raise ValueError(f"symbol {a} not in alphabet of size {spec.alphabet_size}")

    def step(w):
        for i, s in enumerate(w):
            if s != a:
                yield w[:i] + (a,) + w[i + 1:]

    def variants(w):
        return itertools.product(*(sorted({s, a}) for s in w))

    return _structure_check(spec, max_len, budget, step, variants, f"safe:{a}")


def hereditary_closure(words: Iterable[Window]) -> set:
    """All windows lying coordinatewise below some input window."""
    words = list(words)
    if not words:
        return set()
    n = words[0].n
    if any(w.n != n for w in words):
        raise ValueError("words must share an alphabet")
    out = set()
    for w in words:
        for v in itertools.product(*(range(int(s) + 1) for s in w.symbols)):
            out.add(Window(v, n, w.base))
    return out


# --------------------------------------------------------------------------
# word counts and topological entropy


def _sft_count(spec: SFT, length: int, budget: int) -> int:
    n = spec.n
    span = max(len(w) for w in spec.forbidden) - 1 if spec.forbidden else 0
    if span == 0:
        banned = {w[0] for w in spec.forbidden}
        return (n - len(banned)) ** length
    if length <= span:
        return len(language_levels(spec, length, budget)[-1])
    if n ** span > budget:
        raise BudgetExceeded(f"transfer matrix with {n}**{span} states exceeds budget {budget}")
    states = language_levels(spec, span, budget)[-1]
    index = {s: i for i, s in enumerate(states)}
    succ = [[] for _ in states]
    for s, i in index.items():
        for a in range(n):
            nxt = s[1:] + (a,)
            if nxt in index and spec.admits(s + (a,)):
                succ[i].append(index[nxt])
    counts = [1] * len(states)
    for _ in range(length - span):
        new = [0] * len(states)
        for i, c in enumerate(counts):
            if c:
                for j in succ[i]:
                    new[j] += c
        counts = new
    return sum(counts)


def count_words(spec, length: int, budget: int = DEFAULT_BUDGET) -> int:
    """Number of admissible words of exactly ``length`` symbols."""
    if length < 1:
        raise ValueError("length must be positive")
    if isinstance(spec, Full):
        return spec.n ** length
    if isinstance(spec, SFT):
        return _sft_count(spec, length, budget)
    return len(language_levels(spec, length, budget)[-1])


def _log_count(count: int, length: int) -> float:
    # exact L-th powers give exactly log(root), e.g. log 2 for the full 2-shift
    root = round(count ** (1.0 / length))
    for r in (root - 1, root, root + 1):
        if r > 0 and r ** length == count:
            return math.log(r)
    return math.log(count) / length


class EntropyEstimate(NamedTuple):
    value: float
    by_length: list  # (L, count, log(count)/L)


def topological_entropy_estimate(spec, max_len: int, budget: int = DEFAULT_BUDGET) -> EntropyEstimate:
    """``log(count_words(L)) / L`` at ``L = max_len``, with the whole sequence."""
    if isinstance(spec, (Full, SFT)):
        counts = [count_words(spec, L, budget) for L in range(1, max_len + 1)]
    else:
        counts = [len(level) for level in language_levels(spec, max_len, budget)]
    seq = [(L, c, _log_count(c, L) if c else float("-inf")) for L, c in enumerate(counts, start=1)]
    return EntropyEstimate(seq[-1][2], seq)
