"""Generic-point sources and the masked arc ``beta -> x * y_{alpha,beta}``.

Given a (sample of a) generic point ``x`` and a rotation number ``alpha``,
``arc_point(x, alpha, beta)`` zeroes the coordinates ``j`` with
``j*alpha mod 1 >= beta``.  At ``beta = 0`` the result is the zero sequence,
at ``beta = 1`` it is ``x``, and two arc points differ on a set of density
at most ``|beta - beta'|``.  The helpers here sweep the arc, search it for a
prescribed entropy, and measure how close the pair ``(x, y)`` is to being
generic for the product measure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy

from .entropy import EntropyProfile, entropy_estimate
from .families import is_admissible
from .sequence import (FixedFraction, RotationCoding, Window, as_fraction, disagreement_density,
                       nonzero_density, read_window, star_product, sturmian_window)
from .transport import block_codes

LOW_DENOMINATOR = 1 << 64
COARSE_GRID = 41


class AdmissibilityViolation(RuntimeError):
    def __init__(self, beta, subword: Window):
        self.beta = beta
        self.subword = subword
        super().__init__(f"arc point at beta={beta} left the shift: subword "
                         f"{subword.to_string()} at coordinate {subword.base}")


class TargetOutOfRange(ValueError):
    pass


# --------------------------------------------------------------------------
# exact linear algebra for small stochastic matrices


def _stationary(P) -> tuple:
    """Solve ``pi P = pi``, ``sum pi = 1`` exactly; P must have one recurrent class."""
    n = len(P)
    # rows: (P^T - I) pi = 0 with the last equation replaced by sum pi = 1
    A = [[P[j][i] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    A[-1] = [Fraction(1)] * n
    b = [Fraction(0)] * (n - 1) + [Fraction(1)]
    M = [row[:] + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise ValueError("stationary distribution is not unique")
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return tuple(M[i][n] for i in range(n))


def _check_stochastic(matrix) -> tuple:
    P = tuple(tuple(as_fraction(v) for v in row) for row in matrix)
    n = len(P)
    if n < 2 or any(len(row) != n for row in P):
        raise ValueError("transition matrix must be square with at least 2 states")
    for row in P:
        if any(v < 0 for v in row) or sum(row) != 1:
            raise ValueError(f"row {row} is not a probability vector")
    return P


# --------------------------------------------------------------------------
# sources


@dataclass(frozen=True)
class Bernoulli:
    probs: tuple

    def __post_init__(self):
        probs = tuple(as_fraction(p) for p in self.probs)
        if len(probs) < 2 or any(p < 0 for p in probs) or sum(probs) != 1:
            raise ValueError(f"{probs} is not a probability vector")
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        return len(self.probs)

    def describe(self) -> dict:
        return {"kind": "bernoulli", "probs": [str(p) for p in self.probs]}


@dataclass(frozen=True)
class Markov:
    matrix: tuple

    def __post_init__(self):
        object.__setattr__(self, "matrix", _check_stochastic(self.matrix))

    @property
    def n(self) -> int:
        return len(self.matrix)

    @property
    def initial(self) -> tuple:
        return _stationary(self.matrix)

    def describe(self) -> dict:
        return {"kind": "markov", "matrix": [[str(v) for v in row] for row in self.matrix]}


@dataclass(frozen=True)
class SftParry:
    adjacency: tuple

    def __post_init__(self):
        A = tuple(tuple(int(v) for v in row) for row in self.adjacency)
        if any(v not in (0, 1) for row in A for v in row):
            raise ValueError("adjacency must be a 0/1 matrix")
        object.__setattr__(self, "adjacency", A)

    @property
    def n(self) -> int:
        return len(self.adjacency)

    def describe(self) -> dict:
        return {"kind": "parry", "adjacency": [list(r) for r in self.adjacency]}


@dataclass(frozen=True)
class FileSource:
    path: str

    def describe(self) -> dict:
        return {"kind": "file", "path": str(self.path)}


def parse_source(text: str):
    """``bernoulli:0.5`` | ``bernoulli:1/5,4/5`` | ``markov:<json>`` |
    ``parry:<json>`` | ``parry:golden`` | ``file:<path>``."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind == "bernoulli":
        parts = [as_fraction(p.strip()) for p in arg.split(",")]
        if len(parts) == 1:
            parts = [1 - parts[0], parts[0]]
        return Bernoulli(tuple(parts))
    if kind == "markov":
        return Markov(json.loads(arg))
    if kind == "parry":
        if arg.strip() == "golden":
            return SftParry(((1, 1), (1, 0)))
        return SftParry(json.loads(arg))
    if kind == "file":
        return FileSource(arg)
    raise ValueError(f"unknown source {text!r}")


@dataclass(frozen=True)
class ParryMeasure:
    matrix: tuple
    stationary: tuple
    log_perron: float


def _is_primitive(A: np.ndarray) -> bool:
    n = A.shape[0]
    B = (A > 0).astype(np.int64)
    M = B.copy()
    for _ in range((n - 1) ** 2 + 1):  # Wielandt bound
        if M.all():
            return True
        M = ((M @ B) > 0).astype(np.int64)
    return bool(M.all())


def parry_measure(adjacency, tol: float = 1e-12, max_iter: int = 100_000) -> ParryMeasure:
    """Maximal-entropy Markov chain of a primitive 0/1 adjacency matrix.

    ``P[i][j] = A[i][j] v[j] / (lambda v[i])`` with ``(lambda, v)`` the Perron
    root and right eigenvector from power iteration.  Rows are rationalised
    and renormalised so they sum to 1 exactly.
    """
    A = np.asarray(adjacency, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("adjacency must be square")
    if not _is_primitive(A):
        raise ValueError("non-primitive adjacency matrix")
    v = np.ones(A.shape[0])
    lam = 0.0
    for _ in range(max_iter):
        w = A @ v
        new_lam = float(np.linalg.norm(w, np.inf))
        w /= new_lam
        if abs(new_lam - lam) <= tol * new_lam and np.max(np.abs(w - v)) <= tol:
            v, lam = w, new_lam
            break
        v, lam = w, new_lam
    else:
        raise RuntimeError(f"power iteration did not converge in {max_iter} steps")
    P = A * v[None, :] / (lam * v[:, None])
    if np.max(np.abs(P.sum(axis=1) - 1)) > 1e-10:
        raise RuntimeError("Parry rows do not sum to 1 within 1e-10")
    rows = []
    for row in P:
        fr = [Fraction(float(x)) for x in row]
        s = sum(fr)
        rows.append(tuple(x / s for x in fr))
    rows = tuple(rows)
    return ParryMeasure(rows, _stationary(rows), math.log(lam))


def _inverse_cdf(probs, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum([float(p) for p in probs])
    cdf[-1] = 1.0
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(probs) - 1)


def _sample_chain(matrix, initial, length: int, rng) -> np.ndarray:
    u = rng.random(length)
    first = int(_inverse_cdf(initial, u[:1])[0])
    tables = [_inverse_cdf(row, u).tolist() for row in matrix]
    out = [0] * length
    s = first
    out[0] = s
    for i in range(1, length):
        s = tables[s][i]
        out[i] = s
    return np.asarray(out, dtype=np.uint8)


def sample_generic(source, length: int, seed: int) -> Window:
    """Deterministic window of ``length`` symbols drawn from ``source`` with ``seed``."""
    if length < 1:
        raise ValueError("length must be positive")
    if isinstance(source, FileSource):
        w = read_window(source.path)
        if len(w) < length:
            raise ValueError(f"{source.path} holds {len(w)} symbols, {length} requested")
        return w.slice(w.base, w.base + length) if len(w) > length else w
    rng = np.random.default_rng(np.uint64(seed & ((1 << 64) - 1)))
    if isinstance(source, Bernoulli):
        arr = _inverse_cdf(source.probs, rng.random(length)).astype(np.uint8)
        return Window._trusted(arr, source.n, 0)
    if isinstance(source, Markov):
        return Window._trusted(_sample_chain(source.matrix, source.initial, length, rng), source.n, 0)
    if isinstance(source, SftParry):
        pm = parry_measure(source.adjacency)
        return Window._trusted(_sample_chain(pm.matrix, pm.stationary, length, rng), source.n, 0)
    raise TypeError(f"unknown source {source!r}")


# --------------------------------------------------------------------------
# rotation number


def _explicit_alpha(value, precision: int) -> FixedFraction:
    if isinstance(value, FixedFraction):
        alpha = value
        exact = None
    else:
        text = str(value).strip()
        try:
            exact = as_fraction(value if not isinstance(value, str) else text)
        except (ValueError, ZeroDivisionError):
            exact = None
        if exact is None:
            expr = sympy.sympify(text)
            if expr.is_rational:
                exact = Fraction(str(sympy.Rational(expr)))
            else:
                approx = Fraction(str(sympy.N(expr, precision // 3 + 20)))
                if not 0 < approx < 1:
                    raise ValueError(f"alpha must lie in (0, 1), got {text}")
                alpha = FixedFraction.from_value(approx, precision)
        if exact is not None:
            if not 0 < exact < 1:
                raise ValueError(f"alpha must lie in (0, 1), got {exact}")
            if exact.denominator <= LOW_DENOMINATOR:
                raise ValueError(f"low-denominator rational alpha={exact} rejected")
            alpha = FixedFraction.from_value(exact, precision)
    if alpha.bits == 0 or alpha.lattice_denominator() <= LOW_DENOMINATOR:
        raise ValueError("low-denominator rational alpha rejected")
    return alpha


def select_alpha(policy: str = "default", value=None, seed: int | None = None,
                 precision: int = 128) -> FixedFraction:
    """Rotation number for the arc.

    ``default`` is the golden-mean fraction (sqrt(5)-1)/2 truncated to the
    lattice; ``explicit`` takes ``value`` (decimal string, fraction or sympy
    expression) and rejects rationals of denominator <= 2**64;
    ``randomized`` draws a lattice point from ``seed``.
    """
    if policy == "default":
        return FixedFraction.golden(precision)
    if policy == "explicit":
        return _explicit_alpha(value, precision)
    if policy == "randomized":
        if seed is None:
            raise ValueError("randomized alpha needs a seed")
        rng = np.random.default_rng(np.uint64(seed & ((1 << 64) - 1)))
        words = -(-precision // 64)
        while True:
            bits = 0
            for limb in rng.integers(0, 1 << 64, size=words, dtype=np.uint64, endpoint=False):
                bits = (bits << 64) | int(limb)
            bits >>= 64 * words - precision
            alpha = FixedFraction(bits, precision)
            if bits and alpha.lattice_denominator() > LOW_DENOMINATOR:
                return alpha
    raise ValueError(f"unknown alpha policy {policy!r}")


def parse_alpha_policy(text: str, precision: int = 128) -> FixedFraction:
    """``default`` | ``explicit:<value>`` | ``random:<seed>`` | ``hex:<0x.../2^P>``."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind == "default":
        return select_alpha("default", precision=precision)
    if kind == "explicit":
        return select_alpha("explicit", value=arg, precision=precision)
    if kind in ("random", "randomized"):
        return select_alpha("randomized", seed=int(arg), precision=precision)
    if kind == "hex":
        return FixedFraction.from_hex(arg)
    raise ValueError(f"unknown alpha policy {text!r}")


# --------------------------------------------------------------------------
# the arc


def arc_point(x: Window, alpha: FixedFraction, beta) -> Window:
    """``x`` masked by the rotation coding ``y_{alpha,beta}`` on the same range."""
    mask = sturmian_window(RotationCoding(alpha, as_fraction(beta)), x.base, len(x))
    return star_product(x, mask)


@dataclass(frozen=True)
class ArcSample:
    beta: Fraction
    window: Window
    entropy_profile: EntropyProfile
    dbar_to_x: Fraction
    dbar_to_zero: Fraction

    @property
    def entropy(self) -> float:
        return self.entropy_profile.chosen_estimate


def _spot_check(spec, w: Window, beta, count: int, length: int) -> None:
    length = min(length, len(w))
    starts = np.linspace(w.base, w.stop - length, num=min(count, len(w) - length + 1)).astype(np.int64)
    for s in starts:
        sub = w.slice(int(s), int(s) + length)
        if not is_admissible(spec, sub):
            raise AdmissibilityViolation(beta, sub)


def arc_sweep(x: Window, alpha: FixedFraction, betas: Sequence, k: int, spec=None,
              spot_checks: int = 64, spot_length: int = 32,
              guard_factor: int = 100) -> list[ArcSample]:
    """Materialise the arc on a grid of ``beta`` values.

    With ``spec`` given, sampled subwords of every arc point are checked for
    admissibility; a failure raises :class:`AdmissibilityViolation`.
    """
    betas = [as_fraction(b) for b in betas]
    if betas != sorted(betas) or (betas and not (0 <= betas[0] and betas[-1] <= 1)):
        raise ValueError("beta grid must be sorted inside [0, 1]")
    out = []
    for beta in betas:
        w = arc_point(x, alpha, beta)
        if spec is not None:
            _spot_check(spec, w, beta, spot_checks, spot_length)
        out.append(ArcSample(beta, w, entropy_estimate(w, k, guard_factor),
                             disagreement_density(w, x), nonzero_density(w)))
    return out


@dataclass(frozen=True)
class BisectResult:
    beta_star: Fraction
    achieved: float
    iterations: int
    converged: bool


def bisect_entropy(x: Window, alpha: FixedFraction, target: float, tol: float,
                   max_iter: int = 20, k: int = 8, grid: int = COARSE_GRID,
                   guard_factor: int = 100) -> BisectResult:
    """Find ``beta`` whose arc point has estimated entropy within ``tol`` of ``target``.

    Entropy along the arc is continuous but need not be monotone, so a
    coarse scan on ``grid`` equally spaced values picks the closest grid
    point (done if within ``tol``) or else the first adjacent pair that
    brackets ``target``; bisection then runs inside that pair.  The result is
    one witness, not the unique solution.
    """
    cache = {}

    def h(beta: Fraction) -> float:
        if beta not in cache:
            cache[beta] = entropy_estimate(arc_point(x, alpha, beta), k, guard_factor).chosen_estimate
        return cache[beta]

    top = h(Fraction(1))
    if target < 0 or target > top + tol:
        raise TargetOutOfRange(f"target {target} outside [0, {top + tol:.6g}]")
    betas = [Fraction(i, grid - 1) for i in range(grid)]
    values = [h(b) for b in betas]
    best = min(range(grid), key=lambda i: (abs(values[i] - target), i))
    if abs(values[best] - target) <= tol:
        return BisectResult(betas[best], values[best], 0, True)

    bracket = next(((betas[i], betas[i + 1]) for i in range(grid - 1)
                    if (values[i] - target) * (values[i + 1] - target) <= 0), None)
    if bracket is None:
        raise TargetOutOfRange(f"target {target} outside achieved range on the coarse grid")
    lo, hi = bracket
    lo_sign = h(lo) > target
    best_beta, best_val = betas[best], values[best]
    for it in range(1, max_iter + 1):
        mid = (lo + hi) / 2
        val = h(mid)
        if abs(val - target) < abs(best_val - target):
            best_beta, best_val = mid, val
        if abs(val - target) <= tol:
            return BisectResult(mid, val, it, True)
        if (val > target) == lo_sign:
            lo = mid
        else:
            hi = mid
    return BisectResult(best_beta, best_val, max_iter, False)


def product_genericity_diagnostic(x: Window, alpha: FixedFraction, beta, k: int) -> Fraction:
    """TV distance between the joint k-block law of ``(x, y_{alpha,beta})``
    and the product of its two marginals (exact)."""
    y = sturmian_window(RotationCoding(alpha, as_fraction(beta)), x.base, len(x))
    cx = block_codes(x, k)
    cy = block_codes(y, k)
    M = len(cx)
    joint_codes, joint_counts = np.unique(cx * (2 ** k) + cy, return_counts=True)
    joint = dict(zip(joint_codes.tolist(), joint_counts.tolist()))
    ux, nx_ = np.unique(cx, return_counts=True)
    uy, ny_ = np.unique(cy, return_counts=True)
    total = 0
    for u, cu in zip(ux.tolist(), nx_.tolist()):
        for v, cv in zip(uy.tolist(), ny_.tolist()):
            total += abs(joint.get(u * 2 ** k + v, 0) * M - cu * cv)
    return Fraction(total, 2 * M * M)
