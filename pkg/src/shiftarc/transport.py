"""Block distributions and the k-block d-bar transport distance.

The distance between two k-block distributions is

    min over couplings eta of  sum eta(u, v) * hamming(u, v) / k,

an optimal-transport problem with normalised Hamming cost.  Hamming distance
is the shortest-path metric of the Hamming graph (blocks adjacent when they
differ in one coordinate), so the optimum equals a min-cost transshipment on
that graph with unit arc costs.  Masses are scaled to integers by their
common denominator and the flow is solved with networkx's network simplex,
which keeps integer data exact.  The optimal flow is acyclic and decomposes
into source-to-sink paths; each path contributes mass to one coupling cell.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Mapping

import networkx as nx
import numpy as np

from .sequence import Window

DEFAULT_SUPPORT_BUDGET = 1 << 16
DEFAULT_LADDER = (1, 2, 4, 8)


@dataclass(frozen=True)
class BlockDistribution:
    """Probability weights on k-blocks over ``{0..n-1}``; weights sum to 1 exactly."""

    n: int
    k: int
    weights: Mapping[tuple, Fraction]

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("block length must be positive")
        clean = {}
        for block, w in self.weights.items():
            block = tuple(int(s) for s in block)
            w = Fraction(w)
            if len(block) != self.k or any(not 0 <= s < self.n for s in block):
                raise ValueError(f"block {block} is not a {self.k}-block over {self.n} symbols")
            if w < 0:
                raise ValueError("weights must be nonnegative")
            if w:
                clean[block] = clean.get(block, Fraction(0)) + w
        if sum(clean.values()) != 1:
            raise ValueError(f"weights sum to {sum(clean.values())}, not 1")
        object.__setattr__(self, "weights", dict(sorted(clean.items())))

    def __getitem__(self, block) -> Fraction:
        return self.weights.get(tuple(block), Fraction(0))

    def support(self) -> list:
        return list(self.weights)

    def marginal(self, start: int, length: int) -> "BlockDistribution":
        """Distribution of the sub-block at offsets ``[start, start+length)``."""
        out = {}
        for block, w in self.weights.items():
            sub = block[start:start + length]
            out[sub] = out.get(sub, Fraction(0)) + w
        return BlockDistribution(self.n, length, out)

    def __hash__(self):
        return hash((self.n, self.k, tuple(self.weights.items())))


@dataclass(frozen=True)
class TransportPlan:
    """Coupling cells ``(u, v, mass)`` and the cost they realise."""

    entries: tuple
    cost: Fraction

    def row_sums(self) -> dict:
        out = {}
        for u, _, m in self.entries:
            out[u] = out.get(u, Fraction(0)) + m
        return out

    def column_sums(self) -> dict:
        out = {}
        for _, v, m in self.entries:
            out[v] = out.get(v, Fraction(0)) + m
        return out


# --------------------------------------------------------------------------
# empirical and exact distributions


def block_codes(w: Window, k: int) -> np.ndarray:
    """Integer codes (base ``n``, most significant first) of the sliding k-blocks."""
    if k < 1:
        raise ValueError("block length must be positive")
    if k > len(w):
        raise ValueError(f"block length {k} exceeds window length {len(w)}")
    s = w.symbols.astype(np.int64)
    m = len(s) - k + 1
    codes = np.zeros(m, dtype=np.int64)
    for i in range(k):
        codes = codes * w.n + s[i:i + m]
    return codes


def block_counts(w: Window, k: int) -> tuple[np.ndarray, np.ndarray]:
    """``(codes, counts)`` of the distinct sliding k-blocks, codes ascending."""
    codes = block_codes(w, k)
    if w.n ** k <= 1 << 22:
        counts = np.bincount(codes, minlength=w.n ** k)
        present = np.flatnonzero(counts)
        return present, counts[present]
    return np.unique(codes, return_counts=True)


def decode(code: int, n: int, k: int) -> tuple:
    out = [0] * k
    for i in range(k - 1, -1, -1):
        code, out[i] = divmod(code, n)
    return tuple(out)


def empirical_blocks(w: Window, k: int) -> BlockDistribution:
    """Sliding k-block frequencies of ``w`` as exact rationals."""
    codes, counts = block_counts(w, k)
    total = len(w) - k + 1
    weights = {decode(int(c), w.n, k): Fraction(int(m), total) for c, m in zip(codes, counts)}
    return BlockDistribution(w.n, k, weights)


def point_mass(block, n: int = 2) -> BlockDistribution:
    block = tuple(block)
    return BlockDistribution(n, len(block), {block: Fraction(1)})


def bernoulli_blocks(probs, k: int) -> BlockDistribution:
    """Exact k-block law of an iid process with symbol probabilities ``probs``."""
    probs = [Fraction(p) for p in probs]
    n = len(probs)
    weights = {}
    for block in itertools.product(range(n), repeat=k):
        w = math.prod((probs[s] for s in block), start=Fraction(1))
        if w:
            weights[block] = w
    return BlockDistribution(n, k, weights)


def markov_blocks(matrix, initial, k: int) -> BlockDistribution:
    """Exact k-block law of a Markov chain started from ``initial``."""
    P = [[Fraction(v) for v in row] for row in matrix]
    init = [Fraction(v) for v in initial]
    n = len(P)
    weights = {}
    for block in itertools.product(range(n), repeat=k):
        w = init[block[0]]
        for a, b in zip(block, block[1:]):
            w *= P[a][b]
            if not w:
                break
        if w:
            weights[block] = w
    return BlockDistribution(n, k, weights)


# --------------------------------------------------------------------------
# distances


def _check_pair(p: BlockDistribution, q: BlockDistribution) -> None:
    if p.n != q.n:
        raise ValueError(f"alphabet mismatch: {p.n} vs {q.n}")
    if p.k != q.k:
        raise ValueError(f"block length mismatch: {p.k} vs {q.k}")


def tv_distance(p: BlockDistribution, q: BlockDistribution) -> Fraction:
    _check_pair(p, q)
    blocks = set(p.weights) | set(q.weights)
    return sum((abs(p[b] - q[b]) for b in blocks), Fraction(0)) / 2


def hamming(u, v) -> int:
    return sum(a != b for a, b in zip(u, v))


@lru_cache(maxsize=16)
def _hamming_arcs(n: int, k: int) -> tuple:
    arcs = []
    for code in range(n ** k):
        block = decode(code, n, k)
        for i in range(k):
            for a in range(n):
                if a != block[i]:
                    arcs.append((block, block[:i] + (a,) + block[i + 1:]))
    return tuple(arcs)


def dbar_blocks(p: BlockDistribution, q: BlockDistribution,
                budget: int = DEFAULT_SUPPORT_BUDGET) -> tuple[Fraction, TransportPlan]:
    """Exact k-block d-bar distance and an optimal coupling.

    Parameters
    ----------
    p, q : BlockDistribution
        Same alphabet and block length.
    budget : int
        Largest admissible number of blocks ``n**k`` in the Hamming graph.

    Returns
    -------
    cost : Fraction
        ``min sum eta(u,v) * hamming(u,v) / k`` over couplings ``eta``.
    plan : TransportPlan
        A coupling attaining ``cost``.
    """
    _check_pair(p, q)
    n, k = p.n, p.k
    denom = reduce(math.lcm, (w.denominator for w in itertools.chain(p.weights.values(),
                                                                    q.weights.values())), 1)
    supply = {b: int(w * denom) for b, w in p.weights.items()}
    demand = {b: int(w * denom) for b, w in q.weights.items()}

    cells = {}
    for b in set(supply) & set(demand):
        cells[(b, b)] = min(supply[b], demand[b])
    net = {}
    for b in set(supply) | set(demand):
        d = supply.get(b, 0) - demand.get(b, 0)
        if d:
            net[b] = d

    if net:
        if n ** k > budget:
            raise ValueError(f"transport budget exceeded: {n}**{k} blocks > {budget}")
        G = nx.DiGraph()
        G.add_nodes_from(decode(c, n, k) for c in range(n ** k))
        # a capacity of the total supply never binds, but without one networkx
        # sizes its internal infinity from single demands and can misreport
        # an aggregated arc flow as unbounded
        total = sum(d for d in net.values() if d > 0)
        G.add_edges_from(_hamming_arcs(n, k), weight=1, capacity=total)
        for b, d in net.items():
            G.nodes[b]["demand"] = -d  # networkx: demand = inflow - outflow
        _, flow = nx.network_simplex(G)
        for (u, v), m in _decompose(flow, net).items():
            cells[(u, v)] = cells.get((u, v), 0) + m

    entries = tuple(sorted((u, v, Fraction(m, denom)) for (u, v), m in cells.items() if m))
    total = sum(m * hamming(u, v) for (u, v), m in cells.items())
    cost = Fraction(total, denom * k)
    return cost, TransportPlan(entries, cost)


def _decompose(flow: dict, net: dict) -> dict:
    """Split an acyclic transshipment flow into source-to-sink masses."""
    residual = {u: {v: f for v, f in out.items() if f} for u, out in flow.items()}
    need = {b: -d for b, d in net.items() if d < 0}
    pairs = {}
    for src in sorted(b for b, d in net.items() if d > 0):
        left = net[src]
        while left:
            path = [src]
            node = src
            while need.get(node, 0) == 0:
                node = next(iter(residual[node]))
                path.append(node)
            m = min([left, need[node]] + [residual[a][b] for a, b in zip(path, path[1:])])
            for a, b in zip(path, path[1:]):
                residual[a][b] -= m
                if not residual[a][b]:
                    del residual[a][b]
            need[node] -= m
            left -= m
            pairs[(src, node)] = pairs.get((src, node), 0) + m
    return pairs


def dbar_ladder(x: Window, y: Window, ks=DEFAULT_LADDER,
                budget: int = DEFAULT_SUPPORT_BUDGET) -> list[tuple[int, Fraction]]:
    """k-block d-bar distances between the empirical laws of two windows."""
    ks = list(ks)
    if ks != sorted(ks):
        raise ValueError("block lengths must be sorted ascending")
    out = []
    for k in ks:
        cost, _ = dbar_blocks(empirical_blocks(x, k), empirical_blocks(y, k), budget)
        out.append((k, cost))
    return out


# --------------------------------------------------------------------------
# text formats


def _block_text(block, n: int) -> str:
    return "".join(map(str, block)) if n <= 10 else ",".join(map(str, block))


def _parse_block(text: str, n: int) -> tuple:
    return tuple(int(c) for c in text) if n <= 10 else tuple(int(t) for t in text.split(","))


def format_distribution(p: BlockDistribution) -> str:
    lines = [f"#n={p.n} k={p.k}"]
    lines += [f"{_block_text(b, p.n)}\t{w.numerator}/{w.denominator}" for b, w in p.weights.items()]
    return "\n".join(lines) + "\n"


def parse_distribution(text: str) -> BlockDistribution:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = dict(kv.split("=") for kv in lines[0].lstrip("#").split())
    n, k = int(head["n"]), int(head["k"])
    weights = {}
    for ln in lines[1:]:
        block, w = ln.split("\t")
        weights[_parse_block(block, n)] = Fraction(w)
    return BlockDistribution(n, k, weights)


def format_plan(plan: TransportPlan, n: int) -> str:
    lines = [f"#cost={plan.cost.numerator}/{plan.cost.denominator}"]
    lines += [f"{_block_text(u, n)}\t{_block_text(v, n)}\t{m.numerator}/{m.denominator}"
              for u, v, m in plan.entries]
    return "\n".join(lines) + "\n"


def parse_plan(text: str, n: int) -> TransportPlan:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    cost = Fraction(lines[0].split("=", 1)[1])
    entries = []
    for ln in lines[1:]:
        u, v, m = ln.split("\t")
        entries.append((_parse_block(u, n), _parse_block(v, n), Fraction(m)))
    return TransportPlan(tuple(entries), cost)
