"""Monte Carlo estimates of hitting and return times.

Used as an independent check on the linear-algebra routes. Walks run
in fixed-size blocks; block b draws from its own counter-based
substream (Philox jumped b times), so results are identical for a
given seed and trial count no matter how blocks are scheduled.

Each walk runs until it hits its target or a step cap; capped walks
are reported as censored and excluded from the mean. Estimates carry
the sample standard error of the mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .config import TOL
from .errors import ChainError

__all__ = [
    "WalkStats",
    "simulate_so_hitting",
    "simulate_so_return",
    "simulate_so_sweep",
    "simulate_fo_hitting",
]

BLOCK = 8192


@dataclass(frozen=True)
class WalkStats:
    """Empirical mean of a walk time with its sampling error."""

    mean: float
    stderr: float
    trials: int      # uncensored walks behind the mean
    censored: int    # walks stopped by the step cap

    @property
    def warning(self) -> bool:
        """True when censoring may bias the mean."""
        return self.censored > 0


class _Accumulator:
    """Streaming mean and variance, merged across blocks."""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.censored = 0

    def add(self, values: np.ndarray, censored: int):
        self.censored += int(censored)
        values = values[np.isfinite(values)]
        if values.size == 0:
            return
        bcount = values.size
        bmean = float(values.mean())
        bm2 = float(((values - bmean) ** 2).sum())
        delta = bmean - self.mean
        total = self.count + bcount
        self.mean += delta * bcount / total
        self.m2 += bm2 + delta * delta * self.count * bcount / total
        self.count = total

    def stats(self) -> WalkStats:
        if self.count == 0:
            return WalkStats(float("nan"), float("nan"), 0, self.censored)
        if self.count == 1:
            return WalkStats(self.mean, 0.0, 1, self.censored)
        var = self.m2 / (self.count - 1)
        return WalkStats(
            mean=self.mean,
            stderr=float(np.sqrt(max(var, 0.0) / self.count)),
            trials=self.count,
            censored=self.censored,
        )


class _RowSampler:
    """Inverse-CDF sampling of sparse transition rows."""

    def __init__(self, P: sp.csr_matrix):
        P = P.tocsr()
        self.indptr = P.indptr.astype(np.int64)
        self.indices = P.indices.astype(np.int64)
        self.rowlen = np.diff(self.indptr)
        if (self.rowlen == 0).any():
            raise ChainError("cannot simulate a chain with an empty row")
        self.maxlen = int(self.rowlen.max())
        cdf = P.data.copy()
        for r in range(P.shape[0]):
            a, b = self.indptr[r], self.indptr[r + 1]
            cdf[a:b] = np.cumsum(cdf[a:b])
        self.cdf = cdf

    def sample(self, rows: np.ndarray, u: np.ndarray) -> np.ndarray:
        start = self.indptr[rows]
        last = self.rowlen[rows] - 1
        off = np.zeros(rows.size, dtype=np.int64)
        for _ in range(self.maxlen - 1):
            adv = (off < last) & (u > self.cdf[start + off])
            if not adv.any():
                break
            off += adv
        return self.indices[start + off]


def _block_sizes(trials: int) -> list[int]:
    if trials <= 0:
        raise ValueError("trial count must be positive")
    full, rest = divmod(trials, BLOCK)
    return [BLOCK] * full + ([rest] if rest else [])


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed).jumped(block))


def _first_edge_cdf(chain, first_transition, source):
    out = np.asarray(chain.graph.out_edges(source), dtype=np.int64)
    if out.size == 0:
        raise ChainError(f"node {source} has no outgoing edges")
    probs = np.asarray(first_transition, dtype=np.float64)[out]
    return out, np.cumsum(probs / probs.sum())


def _first_probs(pdata) -> np.ndarray:
    # accept the full pullback record or a bare per-edge probability vector
    return getattr(pdata, "first_transition", pdata)


def simulate_so_hitting(chain, pdata, source, target, trials,
                        seed, cap: int = TOL.simulation_step_cap) -> WalkStats:
    """Empirical mean steps of the walk from one node to another.

    The first step leaves ``source`` along the start distribution;
    afterwards the edge chain drives the walk. Counts node-process
    steps; ``source == target`` is trivially zero.
    """
    source, target = int(source), int(target)
    if source == target:
        return WalkStats(0.0, 0.0, int(trials), 0)
    first = _first_probs(pdata)
    out, first_cdf = _first_edge_cdf(chain, first, source)
    sampler = _RowSampler(chain.matrix)
    dst = chain.graph.dst
    acc = _Accumulator()
    for b, nb in enumerate(_block_sizes(int(trials))):
        rng = _block_rng(seed, b)
        times = np.full(nb, np.inf)
        pick = np.searchsorted(first_cdf, rng.random(nb), side="right")
        cur = out[np.minimum(pick, out.size - 1)]
        idx = np.arange(nb)
        t = 1
        hit = dst[cur] == target
        times[idx[hit]] = t
        cur, idx = cur[~hit], idx[~hit]
        while cur.size and t < cap:
            cur = sampler.sample(cur, rng.random(cur.size))
            t += 1
            hit = dst[cur] == target
            times[idx[hit]] = t
            cur, idx = cur[~hit], idx[~hit]
        acc.add(times, censored=cur.size)
    return acc.stats()


def simulate_so_return(chain, pdata, node, trials,
                       seed, cap: int = TOL.simulation_step_cap) -> WalkStats:
    """Empirical mean steps of the walk from a node back to itself."""
    node = int(node)
    first = _first_probs(pdata)
    out, first_cdf = _first_edge_cdf(chain, first, node)
    sampler = _RowSampler(chain.matrix)
    dst = chain.graph.dst
    acc = _Accumulator()
    for b, nb in enumerate(_block_sizes(int(trials))):
        rng = _block_rng(seed, b)
        times = np.full(nb, np.inf)
        pick = np.searchsorted(first_cdf, rng.random(nb), side="right")
        cur = out[np.minimum(pick, out.size - 1)]
        idx = np.arange(nb)
        t = 1
        back = dst[cur] == node  # impossible without self-loops, kept for safety
        times[idx[back]] = t
        cur, idx = cur[~back], idx[~back]
        while cur.size and t < cap:
            cur = sampler.sample(cur, rng.random(cur.size))
            t += 1
            back = dst[cur] == node
            times[idx[back]] = t
            cur, idx = cur[~back], idx[~back]
        acc.add(times, censored=cur.size)
    return acc.stats()


def simulate_so_sweep(chain, pdata, source, trials, seed,
                      cap: int = TOL.simulation_step_cap):
    """One batch of walks measuring everything at once from a source.

    Each walk records its first visit time to every node and its first
    return to the source, running until all are observed or the cap
    bites. Returns (per-target WalkStats array indexed by node, return
    WalkStats). Cheaper than one run per target when all targets are
    wanted.
    """
    source = int(source)
    n = chain.graph.n
    first = _first_probs(pdata)
    out, first_cdf = _first_edge_cdf(chain, first, source)
    sampler = _RowSampler(chain.matrix)
    dst = chain.graph.dst
    accs = [_Accumulator() for _ in range(n)]
    ret_acc = _Accumulator()
    for b, nb in enumerate(_block_sizes(int(trials))):
        rng = _block_rng(seed, b)
        visits = np.full((nb, n), np.inf)
        visits[:, source] = 0.0
        ret = np.full(nb, np.inf)
        remaining = np.full(nb, n, dtype=np.int64)  # n-1 other nodes + return
        pick = np.searchsorted(first_cdf, rng.random(nb), side="right")
        cur = out[np.minimum(pick, out.size - 1)]
        idx = np.arange(nb)
        t = 1
        while True:
            x = dst[cur]
            new = np.isinf(visits[idx, x])
            visits[idx[new], x[new]] = t
            back = (x == source) & np.isinf(ret[idx])
            ret[idx[back]] = t
            remaining[idx] -= new.astype(np.int64) + back.astype(np.int64)
            alive = remaining[idx] > 0
            cur, idx = cur[alive], idx[alive]
            if cur.size == 0 or t >= cap:
                break
            cur = sampler.sample(cur, rng.random(cur.size))
            t += 1
        for k in range(n):
            col = visits[:, k]
            accs[k].add(col, censored=int(np.isinf(col).sum()))
        ret_acc.add(ret, censored=int(np.isinf(ret).sum()))
    return [a.stats() for a in accs], ret_acc.stats()


def simulate_fo_hitting(chain, source, targets, trials,
                        seed, cap: int = TOL.simulation_step_cap) -> WalkStats:
    """Empirical mean steps of a first-order chain into a state set."""
    source = int(source)
    targets = set(int(s) for s in targets)
    if source in targets:
        return WalkStats(0.0, 0.0, int(trials), 0)
    sampler = _RowSampler(chain.matrix)
    mark = np.zeros(chain.n_states, dtype=bool)
    mark[list(targets)] = True
    acc = _Accumulator()
    for b, nb in enumerate(_block_sizes(int(trials))):
        rng = _block_rng(seed, b)
        times = np.full(nb, np.inf)
        cur = np.full(nb, source, dtype=np.int64)
        idx = np.arange(nb)
        t = 0
        while cur.size and t < cap:
            cur = sampler.sample(cur, rng.random(cur.size))
            t += 1
            hit = mark[cur]
            times[idx[hit]] = t
            cur, idx = cur[~hit], idx[~hit]
        acc.add(times, censored=cur.size)
    return acc.stats()
