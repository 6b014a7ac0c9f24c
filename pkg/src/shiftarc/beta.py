"""Greedy beta-expansions of 1 and Parry's admissibility criterion.

The orbit ``t -> beta*t mod 1`` started at ``t = 1`` is followed exactly
whenever that is possible:

* decimal or ``p/q`` input is a rational and handled with ``Fraction``;
* algebraic input such as ``(1+sqrt(5))/2`` is represented in the number
  field ``Q(beta)`` (coefficient vectors modulo the minimal polynomial), so
  termination and periodicity are detected exactly;
* anything else (e.g. ``pi``) falls back to mpmath floats.

Digits are read off by numerical evaluation with guard digits.  When a
value sits within the guard radius of an integer and cannot be shown to
equal it exactly, :class:`PrecisionError` is raised instead of guessing.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import sympy

ALIASES = {"golden": "(1+sqrt(5))/2", "phi": "(1+sqrt(5))/2"}
GUARD_DIGITS = 16
RADIUS = mpmath.mpf(10) ** -12


class PrecisionError(ArithmeticError):
    """Raised when the available precision cannot decide a digit."""


def _parse_rational(text: str):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        return None


class BetaNumber:
    """A real ``beta > 1`` together with its greedy expansion of 1.

    Parameters
    ----------
    text : str
        Decimal string, ``p/q``, a sympy expression (``"(1+sqrt(5))/2"``),
        or one of the aliases ``golden``/``phi``.
    digits_budget : int
        Maximum number of expansion digits computed.
    """

    def __init__(self, text, digits_budget: int = 64):
        self.text = str(text).strip()
        self.digits_budget = int(digits_budget)
        if self.digits_budget < 1:
            raise ValueError("digits_budget must be positive")
        expr_text = ALIASES.get(self.text.lower(), self.text)
        rational = _parse_rational(expr_text)
        self._rational = rational
        self._minpoly = None
        if rational is None:
            expr = sympy.sympify(expr_text)
            approx = sympy.N(expr, 30)
            if not approx.is_real:
                raise ValueError(f"beta must be real, got {self.text}")
            self._expr = expr
            x = sympy.Symbol("x")
            try:
                poly = sympy.Poly(sympy.minimal_polynomial(expr, x), x)
            except (sympy.polys.polyerrors.NotAlgebraic, NotImplementedError):
                poly = None
            if poly is not None:
                lead = poly.LC()
                # monic coefficients m_0..m_{d-1} of x^d + sum m_i x^i
                coeffs = [Fraction(str(sympy.Rational(c / lead))) for c in reversed(poly.all_coeffs())]
                self._minpoly = coeffs[:-1]
            self.value_float = float(approx)
        else:
            self.value_float = float(rational)
        if not self.value_float > 1:
            raise ValueError(f"beta must exceed 1, got {self.text}")
        self.dps = self.digits_budget * (1 + math.ceil(math.log10(self.value_float))) + GUARD_DIGITS
        self._expansion = None

    # -- exact field arithmetic --------------------------------------------

    @property
    def degree(self):
        if self._rational is not None:
            return 1
        return None if self._minpoly is None else len(self._minpoly)

    @property
    def alphabet_size(self) -> int:
        """Digits of greedy expansions lie in ``0..ceil(beta)-1``."""
        if self._rational is not None:
            return math.ceil(self._rational)
        with mpmath.workdps(self.dps):
            v = self._numeric_beta()
            r = mpmath.nint(v)
            if abs(v - r) < RADIUS:
                raise PrecisionError("beta is numerically an integer but not exactly")
            return int(mpmath.ceil(v))

    def _numeric_beta(self):
        return mpmath.mpf(str(sympy.N(self._expr, mpmath.mp.dps + 5)))

    def _times_beta(self, t):
        top = t[-1]
        shifted = (Fraction(0),) + t[:-1]
        return tuple(s - top * m for s, m in zip(shifted, self._minpoly))

    def _floor_field(self, u, beta_num) -> int:
        value = mpmath.mpf(0)
        power = mpmath.mpf(1)
        for c in u:
            value += mpmath.mpf(c.numerator) / c.denominator * power
            power *= beta_num
        r = mpmath.nint(value)
        if abs(value - r) < RADIUS:
            if u[0] == r and all(c == 0 for c in u[1:]):
                return int(r)
            raise PrecisionError(
                f"greedy orbit of beta={self.text} is within 1e-12 of a digit boundary")
        return int(mpmath.floor(value))

    # -- expansion ----------------------------------------------------------

    def greedy_expansion(self):
        """Greedy expansion of 1.

        Returns
        -------
        digits : list of int
            Digits ``d_1, d_2, ...`` computed so far.
        kind : str
            ``"finite"`` (expansion is ``digits 0^inf``), ``"periodic"``
            (digits from ``period_start`` repeat forever) or
            ``"truncated"`` (budget exhausted, tail unknown).
        period_start : int or None
            Index in ``digits`` where the repeating block starts.
        """
        if self._expansion is None:
            self._expansion = self._compute_expansion()
        return self._expansion

    def _compute_expansion(self):
        digits = []
        if self._rational is not None:
            beta = self._rational
            t = Fraction(1)
            seen = {t: 0}
            for i in range(self.digits_budget):
                u = beta * t
                d = math.floor(u)
                digits.append(d)
                t = u - d
                if t == 0:
                    return digits, "finite", None
                if t in seen:
                    return digits, "periodic", seen[t]
                seen[t] = i + 1
            return digits, "truncated", None

        with mpmath.workdps(self.dps):
            beta_num = self._numeric_beta()
            if self._minpoly is None:
                t = mpmath.mpf(1)
                for _ in range(self.digits_budget):
                    u = beta_num * t
                    r = mpmath.nint(u)
                    if abs(u - r) < RADIUS:
                        raise PrecisionError(
                            f"greedy orbit of beta={self.text} is within 1e-12 of a digit boundary")
                    d = int(mpmath.floor(u))
                    digits.append(d)
                    t = u - d
                return digits, "truncated", None

            deg = len(self._minpoly)
            t = (Fraction(1),) + (Fraction(0),) * (deg - 1)
            seen = {t: 0}
            for i in range(self.digits_budget):
                u = self._times_beta(t)
                d = self._floor_field(u, beta_num)
                digits.append(d)
                t = (u[0] - d,) + u[1:]
                if all(c == 0 for c in t):
                    return digits, "finite", None
                if t in seen:
                    return digits, "periodic", seen[t]
                seen[t] = i + 1
            return digits, "truncated", None

    def quasi_greedy_prefix(self, length: int) -> tuple:
        """First ``length`` digits of the quasi-greedy expansion of 1.

        A finite greedy expansion ``d_1 ... d_m 0^inf`` is replaced by
        ``(d_1 ... d_{m-1} (d_m - 1))^inf``; otherwise the greedy expansion
        is used as is.
        """
        digits, kind, start = self.greedy_expansion()
        if kind == "finite":
            block = digits[:-1] + [digits[-1] - 1]
            reps = -(-length // len(block))
            return tuple((block * reps)[:length])
        if kind == "periodic":
            out = list(digits)
            period = digits[start:]
            while len(out) < length:
                out.extend(period)
            return tuple(out[:length])
        if length > len(digits):
            raise PrecisionError(
                f"expansion of 1 for beta={self.text} known to {len(digits)} digits only; "
                f"raise digits_budget to decide words of length {length}")
        return tuple(digits[:length])

    def admits(self, word) -> bool:
        """Parry's criterion: every suffix is lexicographically <= the
        quasi-greedy expansion of 1 cut to the same length."""
        word = tuple(int(s) for s in word)
        if not word:
            return True
        bound = self.quasi_greedy_prefix(len(word))
        m = len(word)
        return all(word[k:] <= bound[:m - k] for k in range(m))
