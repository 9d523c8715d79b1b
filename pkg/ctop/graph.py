"""
Immutable simple undirected graphs and the structural queries shared by the
oracle, the preprocessing pipeline and the solvers.

Vertices are the integers 0..n-1. Every Graph keeps its adjacency three ways:

    "edges":
        a sorted tuple of (u, v) pairs with u < v.

    "adjacency":
        a read-only n-by-n boolean numpy array.

    "neighbor_masks":
        a tuple of python ints; bit u of neighbor_masks[v] is set iff
        u and v are adjacent. The solvers intersect these in their inner loop.
"""

import itertools
from collections import namedtuple

import networkx as nx
import numpy as np

StableSets = namedtuple("StableSets", ["sets", "truncated"])

DEFAULT_STABLE_SET_CAP = 10000


class GraphError(Exception):
    """Exception wrapper class for errors related to Graph"""

    pass


class Graph:
    """
    Simple undirected graph, immutable after construction.

    Arguments:
        "n": the number of vertices.
        "edges": an iterable of vertex pairs. Self-loops, duplicates and
            out-of-range endpoints raise GraphError.
        "labels": optional sequence of length n naming, for each vertex, the
            vertex of a parent graph it was taken from (see induced_subgraph).
    """

    def __init__(self, n, edges=(), labels=None):
        n = int(n)
        if n < 0:
            raise GraphError("vertex count must be nonnegative, got {}".format(n))

        pairs = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError("self-loop on vertex {}".format(u))
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(
                    "edge ({}, {}) out of range for n={}".format(u, v, n)
                )
            pair = (u, v) if u < v else (v, u)
            if pair in pairs:
                raise GraphError("duplicate edge {}".format(pair))
            pairs.add(pair)

        self._n = n
        self._edges = tuple(sorted(pairs))

        adjacency = np.zeros((n, n), dtype=bool)
        if self._edges:
            rows, cols = np.array(self._edges).T
            adjacency[rows, cols] = True
            adjacency[cols, rows] = True
        adjacency.setflags(write=False)
        self._adjacency = adjacency

        degrees = adjacency.sum(axis=1).astype(np.int64)
        degrees.setflags(write=False)
        self._degrees = degrees

        masks = [0] * n
        for u, v in self._edges:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        self._masks = tuple(masks)

        if labels is None:
            labels = range(n)
        self._labels = tuple(int(label) for label in labels)
        if len(self._labels) != n:
            raise GraphError(
                "expected {} labels, got {}".format(n, len(self._labels))
            )

    @property
    def n(self):
        return self._n

    @property
    def m(self):
        return len(self._edges)

    @property
    def edges(self):
        return self._edges

    @property
    def adjacency(self):
        return self._adjacency

    @property
    def degrees(self):
        return self._degrees

    @property
    def neighbor_masks(self):
        return self._masks

    @property
    def labels(self):
        return self._labels

    def check_vertex(self, v):
        if not (0 <= v < self._n):
            raise GraphError(
                "vertex {} out of range for n={}".format(v, self._n)
            )

    def check_vertices(self, vertices):
        for v in vertices:
            self.check_vertex(v)

    def adjacent(self, u, v):
        self.check_vertex(u)
        self.check_vertex(v)
        return bool(self._adjacency[u, v])

    def neighbors(self, v):
        self.check_vertex(v)
        return frozenset(np.flatnonzero(self._adjacency[v]).tolist())

    def closed_neighbors(self, v):
        return self.neighbors(v) | {v}

    def degree(self, v):
        self.check_vertex(v)
        return int(self._degrees[v])

    def is_complete(self):
        return self.m == self._n * (self._n - 1) // 2

    def to_networkx(self):
        graph = nx.Graph()
        graph.add_nodes_from(range(self._n))
        graph.add_edges_from(self._edges)
        return graph

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and self._edges == other._edges

    def __hash__(self):
        return hash((self._n, self._edges))

    def __repr__(self):
        return "Graph(n={}, m={})".format(self._n, self.m)


def complete_graph(n):
    return Graph(n, itertools.combinations(range(n), 2))


def degree(g, v):
    """Number of neighbours of v."""
    return g.degree(v)


def degree_class(g, lo, hi):
    """The vertices whose degree lies in [lo, hi]; empty when lo > hi."""
    return frozenset(
        np.flatnonzero((g.degrees >= lo) & (g.degrees <= hi)).tolist()
    )


def induced_subgraph(g, s):
    """
    The subgraph induced by s, relabelled 0..|s|-1 in ascending vertex order.
    The result's `labels` map each new vertex back to its vertex in g.
    """
    members = sorted(set(s))
    g.check_vertices(members)
    index = {v: i for i, v in enumerate(members)}
    edges = [
        (index[u], index[v])
        for u, v in g.edges
        if u in index and v in index
    ]
    return Graph(len(members), edges, labels=members)


def missing_degree(g, s, v):
    """Number of members of s, other than v, that are not adjacent to v."""
    if v not in s:
        raise GraphError("vertex {} is not in the set".format(v))
    g.check_vertices(s)
    return sum(1 for u in s if u != v and not g.adjacency[u, v])


def max_missing_degree(g, s):
    return max((missing_degree(g, s, v) for v in s), default=0)


def is_clique(g, s):
    members = sorted(set(s))
    g.check_vertices(members)
    return all(
        g.adjacency[u, v] for u, v in itertools.combinations(members, 2)
    )


def is_stable(g, s):
    members = sorted(set(s))
    g.check_vertices(members)
    return not any(
        g.adjacency[u, v] for u, v in itertools.combinations(members, 2)
    )


def maximal_stable_sets(g, cap=DEFAULT_STABLE_SET_CAP):
    """
    Enumerates maximal stable sets as the maximal cliques of the complement
    (pivoting Bron–Kerbosch), stopping after `cap` sets. Sets come back as
    frozensets sorted by their ascending member tuples; `truncated` is True
    when more sets existed.
    """
    if cap < 1:
        raise GraphError("cap must be at least 1, got {}".format(cap))
    if g.n == 0:
        return StableSets(sets=[], truncated=False)

    complement = nx.complement(g.to_networkx())
    found = list(itertools.islice(nx.find_cliques(complement), cap + 1))
    truncated = len(found) > cap
    sets = sorted(
        (frozenset(clique) for clique in found[:cap]),
        key=lambda members: tuple(sorted(members)),
    )
    return StableSets(sets=sets, truncated=truncated)


def maximum_stable_set(g):
    """An exact maximum stable set (maximum clique of the complement)."""
    if g.n == 0:
        return frozenset()
    clique, _ = nx.max_weight_clique(nx.complement(g.to_networkx()), weight=None)
    return frozenset(clique)
