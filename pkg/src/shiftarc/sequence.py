"""Finite windows of two-sided sequences and rotation codings.

A :class:`Window` is a finite block ``x[base], ..., x[base + len - 1]`` of a
point of ``{0, ..., n-1}^Z``.  Rotation codings are generated with exact
fixed-point arithmetic so that ``j * alpha mod 1`` never drifts, no matter
how long the window is.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Iterable, Sequence

import numpy as np

DEFAULT_PRECISION = 128
MIN_PRECISION = 96

_HEADER = re.compile(r"^#base=(-?\d+) n=(\d+)\s*$")
_U64 = np.uint64
_MASK32 = _U64(0xFFFFFFFF)


def as_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction, Decimal, decimal string or float.

    Floats go through their shortest repr, so ``0.3`` becomes ``3/10``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class Alphabet:
    size: int

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 2:
            raise ValueError(f"alphabet size must be an integer >= 2, got {self.size}")

    def __contains__(self, symbol) -> bool:
        return 0 <= symbol < self.size

    def __iter__(self):
        return iter(range(self.size))


class Window:
    """Immutable block of symbols anchored at an absolute coordinate.

    Parameters
    ----------
    symbols : sequence of int or ndarray
        Entries ``x[base], x[base+1], ...``.
    n : int
        Alphabet size; symbols must lie in ``0..n-1``.
    base : int
        Absolute coordinate of the first entry.
    """

    __slots__ = ("symbols", "n", "base", "_hash")

    def __init__(self, symbols, n: int = 2, base: int = 0):
        raw = np.asarray(symbols, dtype=np.int64)
        if raw.ndim != 1 or raw.size == 0:
            raise ValueError("a window needs at least one symbol")
        Alphabet(n)
        if raw.min() < 0 or raw.max() >= n:
            raise ValueError(f"symbol outside alphabet {{0..{n - 1}}}")
        arr = raw.astype(np.uint8) if n <= 256 else raw.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "symbols", arr)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "base", int(base))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Window is immutable")

    @classmethod
    def from_string(cls, text: str, n: int = 2, base: int = 0) -> "Window":
        """Build a window from a digit string such as ``"2101"``."""
        return cls([int(c) for c in text], n=n, base=base)

    @classmethod
    def _trusted(cls, arr: np.ndarray, n: int, base: int) -> "Window":
        # internal fast path: arr already validated and owned by the caller
        w = object.__new__(cls)
        arr.flags.writeable = False
        object.__setattr__(w, "symbols", arr)
        object.__setattr__(w, "n", int(n))
        object.__setattr__(w, "base", int(base))
        object.__setattr__(w, "_hash", None)
        return w

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.n)

    @property
    def stop(self) -> int:
        """One past the last absolute coordinate."""
        return self.base + len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __getitem__(self, j: int) -> int:
        """Entry at *absolute* coordinate ``j``."""
        if not self.base <= j < self.stop:
            raise IndexError(f"coordinate {j} outside [{self.base}, {self.stop})")
        return int(self.symbols[j - self.base])

    def word(self) -> tuple:
        return tuple(int(s) for s in self.symbols)

    def to_string(self) -> str:
        if self.n <= 10:
            return self.symbols.astype(np.uint8).__add__(48).tobytes().decode("ascii")
        return " ".join(str(int(s)) for s in self.symbols)

    def slice(self, start: int, stop: int) -> "Window":
        """Sub-window on absolute coordinates ``[start, stop)``."""
        if not (self.base <= start < stop <= self.stop):
            raise IndexError(f"[{start}, {stop}) not inside [{self.base}, {self.stop})")
        arr = self.symbols[start - self.base:stop - self.base].copy()
        return Window._trusted(arr, self.n, start)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Window):
            return NotImplemented
        return (self.n == other.n and self.base == other.base
                and np.array_equal(self.symbols, other.symbols))

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.n, self.base, self.symbols.tobytes())))
        return self._hash

    def __repr__(self) -> str:
        body = self.to_string()
        if len(body) > 40:
            body = body[:37] + "..."
        return f"Window({body!r}, n={self.n}, base={self.base})"


def overlap(x: Window, y: Window) -> tuple[int, int]:
    """Common absolute range ``[lo, hi)`` of two windows."""
    lo, hi = max(x.base, y.base), min(x.stop, y.stop)
    if lo >= hi:
        raise ValueError("disjoint windows")
    return lo, hi


def _aligned(x: Window, y: Window):
    lo, hi = overlap(x, y)
    return (lo, x.symbols[lo - x.base:hi - x.base], y.symbols[lo - y.base:hi - y.base])


# --------------------------------------------------------------------------
# fixed-point rotation numbers


@dataclass(frozen=True, order=True)
class FixedFraction:
    """Number ``bits / 2**precision`` in ``[0, 1)``; addition wraps mod 1 exactly."""

    bits: int
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        if self.precision < MIN_PRECISION:
            raise ValueError(f"precision must be at least {MIN_PRECISION} bits")
        if not 0 <= self.bits < (1 << self.precision):
            raise ValueError("fixed-point value must lie in [0, 1)")

    @classmethod
    def from_value(cls, value, precision: int = DEFAULT_PRECISION) -> "FixedFraction":
        """Truncate an exact rational (or decimal string) onto the lattice."""
        q = as_fraction(value)
        if not 0 <= q < 1:
            raise ValueError("fixed-point value must lie in [0, 1)")
        return cls((q.numerator << precision) // q.denominator, precision)

    @classmethod
    def golden(cls, precision: int = DEFAULT_PRECISION) -> "FixedFraction":
        """Truncation of (sqrt(5) - 1) / 2."""
        root5 = isqrt(5 << (2 * precision))
        return cls((root5 - (1 << precision)) // 2, precision)

    def __add__(self, other: "FixedFraction") -> "FixedFraction":
        if self.precision != other.precision:
            raise ValueError("precision mismatch")
        return FixedFraction((self.bits + other.bits) & ((1 << self.precision) - 1), self.precision)

    def times(self, j: int) -> "FixedFraction":
        """``j * self mod 1`` for any integer ``j`` (negative allowed)."""
        return FixedFraction((j * self.bits) % (1 << self.precision), self.precision)

    def as_fraction(self) -> Fraction:
        return Fraction(self.bits, 1 << self.precision)

    def __float__(self) -> float:
        return self.bits / (1 << self.precision)

    def hex(self) -> str:
        digits = (self.precision + 3) // 4
        return f"0x{self.bits:0{digits}x}/2^{self.precision}"

    @classmethod
    def from_hex(cls, text: str) -> "FixedFraction":
        num, _, prec = text.partition("/2^")
        return cls(int(num, 16), int(prec) if prec else DEFAULT_PRECISION)

    def lattice_denominator(self) -> int:
        """Denominator of ``bits / 2**precision`` in lowest terms."""
        if self.bits == 0:
            return 1
        tz = (self.bits & -self.bits).bit_length() - 1
        return 1 << (self.precision - tz)


@dataclass(frozen=True)
class RotationCoding:
    """Parameters of the coding ``y[j] = 1 iff (j * alpha mod 1) in [0, beta)``."""

    alpha: FixedFraction
    beta: Fraction

    def __post_init__(self):
        b = as_fraction(self.beta)
        if not 0 <= b <= 1:
            raise ValueError(f"beta must lie in [0, 1], got {b}")
        object.__setattr__(self, "beta", b)

    def threshold(self) -> int:
        """Smallest lattice integer ``T`` with ``v / 2**P < beta  <=>  v < T``."""
        b = self.beta
        num = b.numerator << self.alpha.precision
        return -(-num // b.denominator)


def _mulhi64(a: np.ndarray, b: int) -> np.ndarray:
    """High 64 bits of the 128-bit products ``a * b`` (elementwise, uint64)."""
    b = _U64(b)
    a_lo, a_hi = a & _MASK32, a >> _U64(32)
    b_lo, b_hi = b & _MASK32, b >> _U64(32)
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    hh = a_hi * b_hi
    mid = (ll >> _U64(32)) + (lh & _MASK32) + (hl & _MASK32)
    return hh + (lh >> _U64(32)) + (hl >> _U64(32)) + (mid >> _U64(32))


def _phases128(bits: int, base: int, length: int):
    """Limbs (hi, lo) of ``(base + i) * alpha mod 2**128`` for ``i < length``."""
    m64 = (1 << 64) - 1
    a_hi, a_lo = bits >> 64, bits & m64
    v0 = (base * bits) % (1 << 128)
    i = np.arange(length, dtype=_U64)
    with np.errstate(over="ignore"):
        s_lo = i * _U64(a_lo)
        s_hi = _mulhi64(i, a_lo) + i * _U64(a_hi)
        lo = s_lo + _U64(v0 & m64)
        carry = (lo < s_lo).astype(_U64)
        hi = s_hi + _U64(v0 >> 64) + carry
    return hi, lo


def _phases_generic(bits: int, precision: int, base: int, length: int) -> list:
    mask = (1 << precision) - 1
    v = (base * bits) % (1 << precision)
    out = []
    append = out.append
    for _ in range(length):
        append(v)
        v = (v + bits) & mask
    return out


@lru_cache(maxsize=8)
def _phase_table(bits: int, precision: int, base: int, length: int):
    if precision == 128:
        return _phases128(bits, base, length)
    return _phases_generic(bits, precision, base, length)


def sturmian_window(coding: RotationCoding, base: int, length: int) -> Window:
    """Binary window of ``y[j] = 1 iff (j * alpha mod 1) < beta`` on ``[base, base+length)``.

    The orbit ``j * alpha mod 1`` is computed exactly on the fixed-point
    lattice of ``coding.alpha``; negative ``j`` use exact modular arithmetic.
    """
    if length < 1:
        raise ValueError("length must be positive")
    if coding.beta == 0:
        return Window._trusted(np.zeros(length, dtype=np.uint8), 2, base)
    if coding.beta == 1:
        return Window._trusted(np.ones(length, dtype=np.uint8), 2, base)
    alpha = coding.alpha
    t = coding.threshold()
    table = _phase_table(alpha.bits, alpha.precision, base, length)
    if alpha.precision == 128:
        hi, lo = table
        t_hi, t_lo = _U64(t >> 64), _U64(t & ((1 << 64) - 1))
        mask = (hi < t_hi) | ((hi == t_hi) & (lo < t_lo))
        arr = mask.astype(np.uint8)
    else:
        arr = np.fromiter((v < t for v in table), dtype=np.uint8, count=length)
    return Window._trusted(arr, 2, base)


def star_product(x: Window, y: Window) -> Window:
    """Coordinatewise product of ``x`` with a binary mask ``y`` on their overlap."""
    if y.n != 2:
        raise ValueError("mask must be a binary window")
    lo, xs, ys = _aligned(x, y)
    return Window._trusted(xs * ys, x.n, lo)


def disagreement_density(x: Window, y: Window) -> Fraction:
    """Fraction of overlap coordinates where ``x`` and ``y`` differ (exact)."""
    _, xs, ys = _aligned(x, y)
    return Fraction(int(np.count_nonzero(xs != ys)), len(xs))


def nonzero_density(x: Window) -> Fraction:
    return Fraction(int(np.count_nonzero(x.symbols)), len(x))


def running_density(flags: Iterable[bool]) -> list[Fraction]:
    """Partial densities ``#{true among first m} / m`` for ``m = 1, 2, ...``."""
    counts = np.cumsum(np.asarray(list(flags), dtype=bool), dtype=np.int64)
    if counts.size == 0:
        raise ValueError("running_density needs at least one flag")
    return [Fraction(int(c), m) for m, c in enumerate(counts, start=1)]


# --------------------------------------------------------------------------
# text format


def format_window(w: Window, comments: Sequence[str] = ()) -> str:
    lines = [f"#{c}" for c in comments]
    lines.append(f"#base={w.base} n={w.n}")
    lines.append(w.to_string())
    return "\n".join(lines) + "\n"


def parse_windows(text: str) -> list[Window]:
    """Parse every window record in ``text``.

    A record is a ``#base=<int> n=<int>`` header followed by its symbols:
    contiguous digits when ``n <= 10``, whitespace-separated integers
    otherwise.  Other ``#`` lines are comments.
    """
    records = []
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _HEADER.match(line)
            if m:
                current = [int(m.group(1)), int(m.group(2)), []]
                records.append(current)
            continue
        if current is None:
            raise ValueError("symbols before any '#base=... n=...' header")
        current[2].append(line)
    windows = []
    for base, n, chunks in records:
        if n <= 10:
            body = "".join("".join(c.split()) for c in chunks)
            if not body.isdigit():
                raise ValueError("non-digit character in window body")
            arr = np.frombuffer(body.encode("ascii"), dtype=np.uint8) - 48
        else:
            arr = np.array([int(t) for c in chunks for t in c.split()], dtype=np.int64)
        windows.append(Window(arr, n=n, base=base))
    return windows


def read_window(path) -> Window:
    with open(path, encoding="ascii") as fh:
        windows = parse_windows(fh.read())
    if len(windows) != 1:
        raise ValueError(f"{path}: expected one window record, found {len(windows)}")
    return windows[0]


def write_window(path, w: Window, comments: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_window(w, comments))
