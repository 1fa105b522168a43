"""Collapsing an edge chain to an equivalent node chain at equilibrium.

An edge chain tracks (previous, current) pairs. Conditioning on the
current node alone, under the invariant edge density, yields a
first-order chain on nodes: the pullback. It is built from two
operators,

    lifting      node i -> in-edges of i, weighted by the conditional
                 probability of having arrived along each edge
    restriction  edge e -> its target node

whose product (lifting then restriction) is the identity on nodes.
The pullback chain is lifting @ edge_matrix @ restriction, and the
node density is the in-edge mass per node. The same data yields the
start distribution over first edges: leaving i along (i, j) with
probability proportional to the invariant mass of (i, j).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .chains import (
    EdgeChain,
    NodeChain,
    check_irreducible,
    stationary_density,
    uniform_density,
)
from .config import TOL, Tolerances
from .errors import ChainError, InvariantViolation

__all__ = [
    "PullbackData",
    "build_pullback",
    "equilibrium_pullback",
    "lift_density",
    "restrict_density",
]


@dataclass(frozen=True)
class PullbackData:
    """Equilibrium link between an edge chain and its node chain."""

    chain: EdgeChain
    edge_density: np.ndarray      # invariant density over edges
    node_density: np.ndarray      # induced density over nodes
    arrival_weights: np.ndarray   # per edge: P(arrived along e | now at ter(e))
    lifting: sp.csr_matrix        # nodes x edges, rows sum to 1
    restriction: sp.csr_matrix    # edges x nodes, 0/1 target indicator
    pullback: NodeChain           # collapsed first-order chain
    first_transition: np.ndarray  # per edge: P(first step uses e | start at sou(e))
    first_step_matrix: sp.csr_matrix  # nodes x edges, first_transition values

    def lift(self, node_density: np.ndarray) -> np.ndarray:
        """Spread a density on nodes over their in-edges."""
        v = np.asarray(node_density, dtype=np.float64)
        return self.arrival_weights * v[self.chain.graph.dst]

    def restrict(self, edge_density: np.ndarray) -> np.ndarray:
        """Collapse a density on edges onto their target nodes."""
        v = np.asarray(edge_density, dtype=np.float64)
        return np.asarray(self.restriction.T @ v).ravel()


def lift_density(p: np.ndarray, data: PullbackData) -> np.ndarray:
    """Spread a density on nodes over their in-edges."""
    return data.lift(p)


def restrict_density(phat: np.ndarray, data: PullbackData) -> np.ndarray:
    """Collapse a density on edges onto their target nodes."""
    return data.restrict(phat)


def _group_normalize(values: np.ndarray, groups: np.ndarray, n_groups: int) -> np.ndarray:
    """Scale values so each group sums to one (exactly, in floats)."""
    sums = np.zeros(n_groups)
    np.add.at(sums, groups, values)
    if (sums[np.bincount(groups, minlength=n_groups) > 0] <= 0).any():
        raise ChainError("density mass vanishes on a nonempty group")
    out = values / sums[groups]
    # second pass squeezes out the last rounding so group sums hit 1.0
    sums2 = np.zeros(n_groups)
    np.add.at(sums2, groups, out)
    return out / sums2[groups]


def build_pullback(chain: EdgeChain, pihat: np.ndarray | None = None,
                   tol: Tolerances = TOL) -> PullbackData:
    """Collapse an edge chain to its equilibrium node chain.

    ``pihat`` may supply a validated invariant edge density explicitly;
    otherwise it is solved for, which requires irreducibility. The
    identity lifting @ restriction = I and the balance between in- and
    out-masses per node are enforced.
    """
    g = chain.graph
    if pihat is None:
        pihat = chain.pihat if chain.pihat is not None else stationary_density(chain, tol=tol)
    else:
        pihat = np.asarray(pihat, dtype=np.float64)
        resid = np.abs(chain.matrix.T @ pihat - pihat).sum()
        if (pihat <= 0).any() or abs(pihat.sum() - 1.0) > tol.density_residual:
            raise ChainError("supplied edge density must be positive and sum to 1")
        if resid > tol.density_residual:
            raise ChainError(
                f"supplied edge density is not invariant: residual {resid:.3e}"
            )

    m, n = g.m, g.n
    node_density = np.zeros(n)
    np.add.at(node_density, g.dst, pihat)
    if (node_density <= 0).any():
        bad = int(np.flatnonzero(node_density <= 0)[0])
        raise ChainError(f"node {bad} receives no invariant mass")

    # out-mass must match in-mass at stationarity
    out_mass = np.zeros(n)
    np.add.at(out_mass, g.src, pihat)
    balance = np.abs(out_mass - node_density).max()
    if balance > tol.inout_balance:
        raise InvariantViolation(
            f"in/out mass balance violated by {balance:.3e}"
        )

    arrival = _group_normalize(pihat, g.dst, n)
    first = _group_normalize(pihat, g.src, n)

    edge_ids = np.arange(m)
    lifting = sp.csr_matrix((arrival, (g.dst, edge_ids)), shape=(n, m))
    restriction = sp.csr_matrix((np.ones(m), (edge_ids, g.dst)), shape=(m, n))
    first_step = sp.csr_matrix((first, (g.src, edge_ids)), shape=(n, m))

    prod = (lifting @ restriction).tocoo()
    off = prod.row != prod.col
    if off.any():
        raise InvariantViolation("lifting @ restriction has off-diagonal entries")
    if prod.nnz != n or np.abs(prod.data - 1.0).max() > tol.pullback_entry:
        raise InvariantViolation("lifting @ restriction deviates from the identity")

    P = (lifting @ chain.matrix @ restriction).tocsr()
    P.eliminate_zeros()
    node_pi = node_density / node_density.sum()
    collapsed = NodeChain(g, P, pi=node_pi, kind=f"pullback:{chain.kind}", tol=tol)

    irr, _ = check_irreducible(chain)
    if irr:
        coll_irr, comps = check_irreducible(collapsed)
        if not coll_irr:
            raise InvariantViolation(
                f"pullback of an irreducible chain split into {len(comps)} components"
            )

    return PullbackData(
        chain=chain,
        edge_density=pihat,
        node_density=node_pi,
        arrival_weights=arrival,
        lifting=lifting,
        restriction=restriction,
        pullback=collapsed,
        first_transition=first,
        first_step_matrix=first_step,
    )


def equilibrium_pullback(chain: EdgeChain, allow_uniform_fallback: bool = False,
                         tol: Tolerances = TOL) -> PullbackData:
    """Pullback with an automatic density choice.

    Solves for the invariant density when the chain is irreducible.
    With ``allow_uniform_fallback`` a reducible but bistochastic chain
    (the never-backtracking walk on an undirected cycle, for instance)
    uses the uniform edge density, which is invariant though not
    unique; otherwise reducibility propagates as an error.
    """
    irr, _ = check_irreducible(chain)
    if irr:
        return build_pullback(chain, tol=tol)
    if allow_uniform_fallback:
        return build_pullback(chain, pihat=uniform_density(chain), tol=tol)
    stationary_density(chain, tol=tol)  # raises with component diagnostics
    raise AssertionError("unreachable")
