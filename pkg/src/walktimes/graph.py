"""Finite directed graphs and their directed line graphs.

A graph is a fixed node set ``0..n-1`` with an ordered tuple of directed
edges and no self-loops. Undirected graphs are stored as symmetric
digraphs (both orientations present) with ``undirected=True``. Edge
indices are stable: edge ``e`` always refers to ``edges[e]``.

Instances are immutable after construction; derived structures are
precomputed so shared read access is safe.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import GraphFormatError, GraphStructureError

__all__ = [
    "Graph",
    "LineGraphMap",
    "StripResult",
    "load_edge_list",
    "load_matrix_market",
    "read_graph",
    "strip_leaves",
    "line_graph",
    "dangling_edges",
    "diameter",
    "is_strongly_connected",
]


class Graph:
    """Directed graph with stable edge indices.

    Parameters
    ----------
    n : number of nodes
    edges : iterable of (source, target) pairs, no self-loops, no duplicates
    undirected : the edge set is symmetric and should be treated as
        orientations of undirected edges
    labels : optional external node names; defaults to "0".."n-1"
    """

    def __init__(self, n, edges, undirected=False, labels=None):
        edges = [(int(i), int(j)) for i, j in edges]
        if n < 0:
            raise GraphStructureError("node count must be nonnegative")
        seen = set()
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise GraphStructureError(f"edge ({i},{j}) out of range for n={n}")
            if i == j:
                raise GraphStructureError(f"self-loop at node {i}")
            if (i, j) in seen:
                raise GraphStructureError(f"duplicate edge ({i},{j})")
            seen.add((i, j))
        if undirected:
            for i, j in edges:
                if (j, i) not in seen:
                    raise GraphStructureError(
                        f"undirected graph missing reverse of ({i},{j})"
                    )
        if labels is None:
            labels = tuple(str(i) for i in range(n))
        else:
            labels = tuple(str(x) for x in labels)
            if len(labels) != n:
                raise GraphStructureError("label count does not match node count")

        self._n = int(n)
        self._edges = tuple(edges)
        self._undirected = bool(undirected)
        self._labels = labels
        m = len(edges)
        self._src = np.fromiter((i for i, _ in edges), dtype=np.int64, count=m)
        self._dst = np.fromiter((j for _, j in edges), dtype=np.int64, count=m)
        self._edge_index = {e: idx for idx, e in enumerate(edges)}
        out = [[] for _ in range(n)]
        inc = [[] for _ in range(n)]
        for idx, (i, j) in enumerate(edges):
            out[i].append(idx)
            inc[j].append(idx)
        self._out_edges = tuple(tuple(v) for v in out)
        self._in_edges = tuple(tuple(v) for v in inc)
        self._out_degree = np.fromiter((len(v) for v in out), dtype=np.int64, count=n)
        self._in_degree = np.fromiter((len(v) for v in inc), dtype=np.int64, count=n)

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        """Number of directed edges."""
        return len(self._edges)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return self._edges

    @property
    def undirected(self) -> bool:
        return self._undirected

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def src(self) -> np.ndarray:
        """Source node of each edge, aligned with edge indices."""
        return self._src

    @property
    def dst(self) -> np.ndarray:
        """Target node of each edge, aligned with edge indices."""
        return self._dst

    @property
    def out_degree(self) -> np.ndarray:
        return self._out_degree

    @property
    def in_degree(self) -> np.ndarray:
        return self._in_degree

    def out_edges(self, i: int) -> tuple[int, ...]:
        """Indices of edges leaving node i, in edge-index order."""
        return self._out_edges[i]

    def in_edges(self, i: int) -> tuple[int, ...]:
        """Indices of edges entering node i, in edge-index order."""
        return self._in_edges[i]

    def edge_id(self, i: int, j: int) -> int:
        """Index of edge (i, j); KeyError if absent."""
        return self._edge_index[(i, j)]

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self._edge_index

    def undirected_edge_count(self) -> int:
        """Number of undirected edges (pairs) for symmetric graphs."""
        if not self._undirected:
            raise GraphStructureError("graph is not marked undirected")
        return self.m // 2

    def adjacency(self) -> sp.csr_matrix:
        """0/1 adjacency matrix in compressed sparse row form."""
        data = np.ones(self.m, dtype=np.float64)
        return sp.csr_matrix((data, (self._src, self._dst)), shape=(self._n, self._n))

    def label_id(self, label: str) -> int:
        """Node index for an external label; ValueError if unknown."""
        try:
            return self._labels.index(label)
        except ValueError:
            raise GraphStructureError(f"unknown node label {label!r}") from None

    def __repr__(self):
        kind = "undirected" if self._undirected else "directed"
        return f"Graph({kind}, n={self._n}, m={self.m})"


@dataclass(frozen=True)
class LineGraphMap:
    """Directed line graph of a host graph.

    Line-graph nodes are the host's edges. There is one line edge
    ``e -> f`` for every pair with ``ter(e) = sou(f)``; a line edge is
    backtracking when additionally ``ter(f) = sou(e)``. Dropping the
    backtracking line edges leaves the Hashimoto graph.
    """

    host: Graph
    tail: np.ndarray          # line edge source, as host edge index
    head: np.ndarray          # line edge target, as host edge index
    backtracking: np.ndarray  # bool per line edge

    @property
    def n_line_edges(self) -> int:
        return len(self.tail)

    def as_graph(self, include_backtracking: bool = True) -> Graph:
        """Materialize the line graph (or Hashimoto graph) as a Graph.

        Nodes are host edge indices; labels read "i->j" in host labels.
        """
        g = self.host
        labels = [f"{g.labels[i]}->{g.labels[j]}" for i, j in g.edges]
        if include_backtracking:
            pairs = zip(self.tail.tolist(), self.head.tolist())
        else:
            keep = ~self.backtracking
            pairs = zip(self.tail[keep].tolist(), self.head[keep].tolist())
        return Graph(g.m, list(pairs), undirected=False, labels=labels)


@dataclass(frozen=True)
class StripResult:
    """Outcome of iterated removal of low-degree nodes."""

    graph: Graph
    old_to_new: np.ndarray  # -1 for removed nodes
    removed: tuple[int, ...]  # removed node ids in the input graph


def _tokenize(stream) -> list[tuple[int, str]]:
    """Split text input into (line_number, stripped_content) pairs."""
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = stream.read().splitlines()
    return [(no, line.strip()) for no, line in enumerate(lines, start=1)]


def load_edge_list(stream, undirected=False) -> Graph:
    """Parse a whitespace-separated edge list.

    One edge per line, two node labels per edge. Lines starting with
    ``#`` or ``%`` and blank lines are ignored. Labels are arbitrary
    tokens; nodes are numbered in first-appearance order. Duplicate
    edges are dropped. With ``undirected=True`` each line contributes
    both orientations.

    ``stream`` is a text file object or a string holding the content.
    """
    ids: dict[str, int] = {}
    labels: list[str] = []
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()

    def node(tok: str) -> int:
        if tok not in ids:
            ids[tok] = len(labels)
            labels.append(tok)
        return ids[tok]

    for no, line in _tokenize(stream):
        if not line or line.startswith("#") or line.startswith("%"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(
                f"expected two node labels, got {len(parts)}", line=no
            )
        i, j = node(parts[0]), node(parts[1])
        if i == j:
            raise GraphFormatError(f"self-loop at label {parts[0]!r}", line=no)
        for a, b in ((i, j), (j, i)) if undirected else ((i, j),):
            if (a, b) not in seen:
                seen.add((a, b))
                edges.append((a, b))
    return Graph(len(labels), edges, undirected=undirected, labels=labels)


def load_matrix_market(stream, undirected=None) -> Graph:
    """Parse a Matrix Market coordinate pattern file as a graph.

    Supports ``matrix coordinate pattern`` with ``general`` or
    ``symmetric`` symmetry. A symmetric file yields an undirected
    graph; a general file yields a directed graph unless
    ``undirected=True`` forces symmetrization. Entries are 1-based;
    self-loops are rejected; duplicates are dropped.
    """
    rows = _tokenize(stream)
    if not rows:
        raise GraphFormatError("empty input")
    no, header = rows[0]
    parts = header.lower().split()
    if len(parts) < 4 or parts[0] != "%%matrixmarket":
        raise GraphFormatError("missing %%MatrixMarket header", line=no)
    if parts[1:4] != ["matrix", "coordinate", "pattern"]:
        raise GraphFormatError(
            "only 'matrix coordinate pattern' files are supported", line=no
        )
    symmetry = parts[4] if len(parts) > 4 else "general"
    if symmetry not in ("general", "symmetric"):
        raise GraphFormatError(f"unsupported symmetry {symmetry!r}", line=no)

    body = [(no, ln) for no, ln in rows[1:] if ln and not ln.startswith("%")]
    if not body:
        raise GraphFormatError("missing size line")
    no, size_line = body[0]
    parts = size_line.split()
    if len(parts) != 3:
        raise GraphFormatError("size line must be 'rows cols nnz'", line=no)
    try:
        nrows, ncols, nnz = (int(p) for p in parts)
    except ValueError:
        raise GraphFormatError("size line must hold three integers", line=no)
    if nrows != ncols:
        raise GraphFormatError(
            f"adjacency matrix must be square, got {nrows}x{ncols}", line=no
        )
    entries = body[1:]
    if len(entries) != nnz:
        raise GraphFormatError(
            f"expected {nnz} entries, found {len(entries)}"
        )

    symmetric = symmetry == "symmetric" or bool(undirected)
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for no, line in entries:
        parts = line.split()
        if len(parts) < 2:
            raise GraphFormatError("entry must hold two indices", line=no)
        try:
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
        except ValueError:
            raise GraphFormatError("entry indices must be integers", line=no)
        if not (0 <= i < nrows and 0 <= j < nrows):
            raise GraphFormatError(f"index out of range: {parts[0]} {parts[1]}", line=no)
        if i == j:
            raise GraphFormatError(f"self-loop at node {i + 1}", line=no)
        for a, b in ((i, j), (j, i)) if symmetric else ((i, j),):
            if (a, b) not in seen:
                seen.add((a, b))
                edges.append((a, b))
    labels = [str(i + 1) for i in range(nrows)]
    return Graph(nrows, edges, undirected=symmetric, labels=labels)


def read_graph(path, fmt="edge-list", undirected=False) -> Graph:
    """Load a graph from a file path in the named format."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if fmt == "edge-list":
        return load_edge_list(io.StringIO(text), undirected=undirected)
    if fmt == "matrix-market":
        return load_matrix_market(io.StringIO(text), undirected=undirected or None)
    raise GraphFormatError(f"unknown format {fmt!r}")


def strip_leaves(g: Graph) -> StripResult:
    """Iteratively remove nodes of undirected degree <= 1.

    Requires an undirected graph. Removing a leaf can create new
    leaves, so removal repeats until every remaining node has degree
    at least 2. Surviving nodes are relabeled compactly, preserving
    relative order and labels.
    """
    if not g.undirected:
        raise GraphStructureError("degree stripping requires an undirected graph")
    alive = [True] * g.n
    nbrs = [set() for _ in range(g.n)]
    for i, j in g.edges:
        nbrs[i].add(j)
    queue = [i for i in range(g.n) if len(nbrs[i]) <= 1]
    while queue:
        i = queue.pop()
        if not alive[i]:
            continue
        alive[i] = False
        for j in nbrs[i]:
            nbrs[j].discard(i)
            if alive[j] and len(nbrs[j]) <= 1:
                queue.append(j)
        nbrs[i].clear()

    old_to_new = np.full(g.n, -1, dtype=np.int64)
    kept = [i for i in range(g.n) if alive[i]]
    for new, old in enumerate(kept):
        old_to_new[old] = new
    edges = [
        (int(old_to_new[i]), int(old_to_new[j]))
        for i, j in g.edges
        if alive[i] and alive[j]
    ]
    labels = [g.labels[i] for i in kept]
    removed = tuple(i for i in range(g.n) if not alive[i])
    stripped = Graph(len(kept), edges, undirected=True, labels=labels)
    return StripResult(graph=stripped, old_to_new=old_to_new, removed=removed)


def line_graph(g: Graph) -> LineGraphMap:
    """Directed line graph: one node per edge, e -> f iff ter(e) = sou(f)."""
    tails: list[int] = []
    heads: list[int] = []
    back: list[bool] = []
    for e, (i, j) in enumerate(g.edges):
        for f in g.out_edges(j):
            k = g.edges[f][1]
            tails.append(e)
            heads.append(f)
            back.append(k == i)
    return LineGraphMap(
        host=g,
        tail=np.asarray(tails, dtype=np.int64),
        head=np.asarray(heads, dtype=np.int64),
        backtracking=np.asarray(back, dtype=bool),
    )


def dangling_edges(g: Graph) -> list[int]:
    """Edges (i, j) whose only continuation is the immediate reversal.

    Edge (i, j) is dangling when node j's single outgoing edge is
    (j, i). A walk that may not backtrack is stuck there.
    """
    out = []
    for e, (i, j) in enumerate(g.edges):
        oe = g.out_edges(j)
        if len(oe) == 1 and g.edges[oe[0]][1] == i:
            out.append(e)
    return out


def diameter(g: Graph) -> int:
    """Largest unweighted shortest-path distance over ordered node pairs.

    Raises for graphs where some node cannot reach some other node.
    """
    if g.n <= 1:
        return 0
    dist = csgraph.shortest_path(g.adjacency(), method="D", unweighted=True)
    if np.isinf(dist).any():
        raise GraphStructureError("graph is not connected; diameter undefined")
    return int(dist.max())


def is_strongly_connected(g: Graph) -> bool:
    """True when every node can reach every other by directed paths."""
    if g.n <= 1:
        return True
    if g.m == 0:
        return False
    ncomp, _ = csgraph.connected_components(
        g.adjacency(), directed=True, connection="strong"
    )
    return ncomp == 1
