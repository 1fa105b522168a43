"""Markov chains on graph nodes and on directed edges.

A second-order walk, whose step distribution depends on the previous
and the current node, is handled as a first-order chain on the
directed edges of the host graph: state (i, j) means "previous node i,
current node j", and transitions (i, j) -> (j, k) follow the line
graph. Chains on nodes cover the classical first-order case.

All transition matrices are compressed sparse row with 64-bit floats,
rows summing to one. Structural zeros are dropped from the support.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph
from scipy.sparse.linalg import spsolve

from .config import TOL, Tolerances
from .errors import (
    ChainError,
    ConvergenceError,
    DanglingEdgeError,
    GraphStructureError,
    ReducibleChainError,
)
from .graph import Graph, LineGraphMap, line_graph

__all__ = [
    "NodeChain",
    "EdgeChain",
    "uniform_node_chain",
    "uniform_edge_chain",
    "nonbacktracking_edge_chain",
    "downweighted_edge_chain",
    "edge_chain_from_tensor",
    "transition_tensor",
    "stationary_density",
    "check_irreducible",
    "is_bistochastic",
    "uniform_density",
]


def _validate_rows(P: sp.csr_matrix, tol: float, what: str):
    if (P.data < 0).any():
        raise ChainError(f"{what} has negative transition probabilities")
    sums = np.asarray(P.sum(axis=1)).ravel()
    bad = np.abs(sums - 1.0) > tol
    if bad.any():
        idx = int(np.argmax(np.abs(sums - 1.0)))
        raise ChainError(
            f"{what} rows must sum to 1; row {idx} sums to {sums[idx]!r}"
        )


def _validate_density(P: sp.csr_matrix, pi: np.ndarray, tol: float, what: str):
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (P.shape[0],):
        raise ChainError(f"{what} density has wrong length")
    if (pi <= 0).any():
        raise ChainError(f"{what} density must be strictly positive")
    if abs(pi.sum() - 1.0) > tol:
        raise ChainError(f"{what} density must sum to 1")
    resid = np.abs(P.T @ pi - pi).sum()
    if resid > tol:
        raise ChainError(
            f"{what} density is not invariant: residual {resid:.3e} > {tol:.1e}"
        )
    return pi


class NodeChain:
    """First-order chain on the nodes of a graph.

    The support of the transition matrix must lie within the graph's
    edge set. ``pi`` optionally carries a validated invariant density.
    """

    states_are_edges = False

    def __init__(self, graph: Graph, matrix, pi=None, kind="custom", tol: Tolerances = TOL):
        P = sp.csr_matrix(matrix, dtype=np.float64)
        P.eliminate_zeros()
        if P.shape != (graph.n, graph.n):
            raise ChainError("transition matrix shape does not match node count")
        _validate_rows(P, tol.row_sum, "node chain")
        coo = P.tocoo()
        for i, j in zip(coo.row.tolist(), coo.col.tolist()):
            if not graph.has_edge(i, j):
                raise ChainError(f"transition {i}->{j} is not an edge of the graph")
        self.graph = graph
        self.matrix = P
        self.kind = kind
        self.pi = None if pi is None else _validate_density(P, pi, tol.density_residual, "node chain")
        self._components: list[np.ndarray] | None = None

    @property
    def n_states(self) -> int:
        return self.matrix.shape[0]

    def state_label(self, s: int) -> str:
        return self.graph.labels[s]

    def __repr__(self):
        return f"NodeChain({self.kind}, states={self.n_states})"


class EdgeChain:
    """First-order chain on the directed edges of a graph.

    States are host edge indices. The support must lie within the
    directed line graph: a transition e -> f needs ter(e) = sou(f).
    """

    states_are_edges = True

    def __init__(self, graph: Graph, matrix, lg: LineGraphMap | None = None,
                 pihat=None, kind="custom", tol: Tolerances = TOL):
        P = sp.csr_matrix(matrix, dtype=np.float64)
        P.eliminate_zeros()
        if P.shape != (graph.m, graph.m):
            raise ChainError("transition matrix shape does not match edge count")
        _validate_rows(P, tol.row_sum, "edge chain")
        coo = P.tocoo()
        dst = graph.dst
        src = graph.src
        bad = dst[coo.row] != src[coo.col]
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            e, f = int(coo.row[k]), int(coo.col[k])
            raise ChainError(
                f"transition between edges {graph.edges[e]} and {graph.edges[f]} "
                "does not follow the line graph"
            )
        self.graph = graph
        self.lg = lg if lg is not None else line_graph(graph)
        self.matrix = P
        self.kind = kind
        self.pihat = None if pihat is None else _validate_density(P, pihat, tol.density_residual, "edge chain")
        self._components: list[np.ndarray] | None = None

    @property
    def n_states(self) -> int:
        return self.matrix.shape[0]

    def state_label(self, s: int) -> str:
        i, j = self.graph.edges[s]
        return f"{self.graph.labels[i]}->{self.graph.labels[j]}"

    def __repr__(self):
        return f"EdgeChain({self.kind}, states={self.n_states})"


def _require_out_edges(g: Graph):
    sinks = np.flatnonzero(g.out_degree == 0)
    if sinks.size:
        raise GraphStructureError(
            f"every node needs out-degree >= 1; offending nodes {sinks[:8].tolist()}"
        )


def uniform_node_chain(g: Graph, tol: Tolerances = TOL) -> NodeChain:
    """Classical walk: each out-edge of the current node equally likely."""
    _require_out_edges(g)
    data = 1.0 / g.out_degree[g.src].astype(np.float64)
    P = sp.csr_matrix((data, (g.src, g.dst)), shape=(g.n, g.n))
    return NodeChain(g, P, kind="uniform", tol=tol)


def uniform_edge_chain(g: Graph, tol: Tolerances = TOL) -> EdgeChain:
    """Edge chain of the classical walk: the memory is carried but unused."""
    _require_out_edges(g)
    lg = line_graph(g)
    data = 1.0 / g.out_degree[g.dst[lg.tail]].astype(np.float64)
    P = sp.csr_matrix((data, (lg.tail, lg.head)), shape=(g.m, g.m))
    return EdgeChain(g, P, lg=lg, kind="uniform", tol=tol)


def _nonbacktracking_denominators(g: Graph) -> np.ndarray:
    """Per edge (i, j): number of continuations (j, k) with k != i."""
    denom = g.out_degree[g.dst].astype(np.float64)
    for e, (i, j) in enumerate(g.edges):
        if g.has_edge(j, i):
            denom[e] -= 1.0
    return denom


def nonbacktracking_edge_chain(g: Graph, tol: Tolerances = TOL) -> EdgeChain:
    """Walk that never reverses the step it just took.

    From state (i, j) every edge (j, k) with k != i is equally likely.
    Requires no dangling edges: from a dangling edge only the reversal
    continues, leaving an empty transition row.
    """
    _require_out_edges(g)
    lg = line_graph(g)
    denom = _nonbacktracking_denominators(g)
    stuck = np.flatnonzero(denom == 0)
    if stuck.size:
        raise DanglingEdgeError([g.edges[int(e)] for e in stuck])
    keep = ~lg.backtracking
    tails = lg.tail[keep]
    heads = lg.head[keep]
    P = sp.csr_matrix((1.0 / denom[tails], (tails, heads)), shape=(g.m, g.m))
    return EdgeChain(g, P, lg=lg, kind="nonbacktracking", tol=tol)


def downweighted_edge_chain(g: Graph, alpha: float, tol: Tolerances = TOL) -> EdgeChain:
    """Mixture chain: backtracking allowed but downweighted.

    ``alpha`` interpolates between the never-backtracking walk (0) and
    the classical walk's edge chain (1).
    """
    if not (0.0 <= alpha <= 1.0):
        raise ChainError(f"mixing weight must lie in [0, 1], got {alpha!r}")
    if alpha == 1.0:
        chain = uniform_edge_chain(g, tol=tol)
    elif alpha == 0.0:
        chain = nonbacktracking_edge_chain(g, tol=tol)
    else:
        uni = uniform_edge_chain(g, tol=tol)
        nbt = nonbacktracking_edge_chain(g, tol=tol)
        P = (alpha * uni.matrix + (1.0 - alpha) * nbt.matrix).tocsr()
        P.eliminate_zeros()
        chain = EdgeChain(g, P, lg=uni.lg, kind=f"downweighted:{alpha:g}", tol=tol)
    chain.kind = f"downweighted:{alpha:g}"
    return chain


def edge_chain_from_tensor(g: Graph, probs, tol: Tolerances = TOL) -> EdgeChain:
    """Build an edge chain from explicit (prev, cur, next) probabilities.

    ``probs`` maps node triples (i, j, k) to the probability of
    stepping to k given the walk came to j from i. For every edge
    (i, j) the values over k must sum to 1 and be supported on edges
    (j, k).
    """
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for (i, j, k), p in probs.items():
        p = float(p)
        if p < 0:
            raise ChainError(f"negative probability for triple ({i},{j},{k})")
        if p == 0.0:
            continue
        if not g.has_edge(i, j):
            raise ChainError(f"triple ({i},{j},{k}) starts outside the edge set")
        if not g.has_edge(j, k):
            raise ChainError(f"triple ({i},{j},{k}) ends outside the edge set")
        rows.append(g.edge_id(i, j))
        cols.append(g.edge_id(j, k))
        vals.append(p)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(g.m, g.m))
    P.sum_duplicates()
    sums = np.asarray(P.sum(axis=1)).ravel()
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol.density_residual)
    if bad.size:
        e = int(bad[0])
        raise ChainError(
            f"probabilities for edge {g.edges[e]} sum to {sums[e]!r}, expected 1"
        )
    # renormalize the tiny slack so construction-time row checks pass exactly
    scale = sp.diags(1.0 / sums)
    return EdgeChain(g, scale @ P, kind="tensor", tol=tol)


def transition_tensor(chain: EdgeChain) -> dict[tuple[int, int, int], float]:
    """Inverse of ``edge_chain_from_tensor`` on the stored support."""
    g = chain.graph
    coo = chain.matrix.tocoo()
    out: dict[tuple[int, int, int], float] = {}
    for e, f, v in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()):
        i, j = g.edges[e]
        out[(i, j, int(g.dst[f]))] = float(v)
    return out


def check_irreducible(chain) -> tuple[bool, list[np.ndarray]]:
    """Strong connectivity of the support of the transition matrix.

    Returns the verdict and the strongly connected components as
    arrays of state indices.
    """
    if chain._components is None:
        ncomp, labels = csgraph.connected_components(
            chain.matrix, directed=True, connection="strong"
        )
        chain._components = [
            np.flatnonzero(labels == c) for c in range(ncomp)
        ]
    comps = chain._components
    return len(comps) == 1, comps


def is_bistochastic(chain, tol: Tolerances = TOL) -> bool:
    """True when the columns of the transition matrix also sum to one."""
    cols = np.asarray(chain.matrix.sum(axis=0)).ravel()
    return bool(np.abs(cols - 1.0).max() <= tol.row_sum * chain.n_states)


def uniform_density(chain) -> np.ndarray:
    """Uniform density over states.

    Invariant for bistochastic chains, reducible or not; the canonical
    choice for walks on undirected graphs whose support splits.
    """
    if not is_bistochastic(chain):
        raise ChainError("uniform density requires a bistochastic chain")
    n = chain.n_states
    return np.full(n, 1.0 / n)


def _power_iteration(P: sp.csr_matrix, tol: float, max_iter: int = 200_000) -> np.ndarray:
    # iterate the lazy chain (I + P)/2: same invariant density, aperiodic
    n = P.shape[0]
    PT = P.T.tocsr()
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        y = 0.5 * (x + PT @ x)
        y /= y.sum()
        if np.abs(y - x).sum() <= tol:
            return y
        x = y
    raise ConvergenceError("power iteration did not converge")


def stationary_density(chain, tol: Tolerances = TOL) -> np.ndarray:
    """Unique invariant probability density of an irreducible chain.

    Solved directly from the balance equations with a normalization
    row; power iteration takes over for very large chains or when the
    direct solve fails validation. The result is verified to satisfy
    the balance equations within tolerance and to be positive.
    """
    irr, comps = check_irreducible(chain)
    if not irr:
        what = "edge chain" if chain.states_are_edges else "node chain"
        raise ReducibleChainError(comps, what=what)
    P = chain.matrix
    n = P.shape[0]
    if n == 1:
        return np.ones(1)

    pi = None
    if n <= tol.power_iteration_threshold:
        A = (P.T - sp.identity(n, format="csr")).tocsr()
        M = sp.vstack([A[:-1, :], sp.csr_matrix(np.ones((1, n)))]).tocsc()
        b = np.zeros(n)
        b[-1] = 1.0
        try:
            cand = spsolve(M, b)
            if np.all(np.isfinite(cand)):
                pi = cand
        except RuntimeError:
            pi = None
    if pi is None:
        pi = _power_iteration(P, tol.power_iteration_tol)

    pi = np.asarray(pi, dtype=np.float64)
    pi /= pi.sum()
    resid = np.abs(P.T @ pi - pi).sum()
    if resid > tol.stationary_residual or (pi <= 0).any():
        pi = _power_iteration(P, tol.power_iteration_tol)
        pi /= pi.sum()
        resid = np.abs(P.T @ pi - pi).sum()
        if resid > tol.stationary_residual or (pi <= 0).any():
            raise ConvergenceError(
                f"invariant density failed validation: residual {resid:.3e}"
            )
    return pi
