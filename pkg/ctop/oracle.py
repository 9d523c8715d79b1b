"""
Ground truth for CTOP orders.

An order is valid for dimension K when every two vertices at most K positions
apart are adjacent. Everything else in the package is tested against the
functions here: `verify_order`, a second literal implementation of the
initial-clique / contiguous-predecessor conditions, a backtracking
enumerator over partial permutations, and the exact edge-count bound.
"""

import logging
from collections import namedtuple
from fractions import Fraction

from .bitset import full_mask, iter_bits
from .graph import Graph, is_clique

Enumeration = namedtuple("Enumeration", ["orders", "count", "truncated"])

ORACLE_WARN_N = 10


class OracleError(Exception):
    """Exception wrapper class for errors related to the order oracle"""

    pass


class Instance(namedtuple("Instance", ["graph", "k"])):
    """A graph paired with the dimension K."""

    __slots__ = ()

    def __new__(cls, graph, k):
        if not isinstance(graph, Graph):
            raise OracleError(
                "expected a Graph, got {}".format(type(graph).__name__)
            )
        k = int(k)
        if k < 1:
            raise OracleError("dimension must be positive, got {}".format(k))
        if graph.n < 1:
            raise OracleError("an instance needs at least one vertex")
        return super().__new__(cls, graph, k)

    @property
    def n(self):
        return self.graph.n


def check_permutation(n, order):
    order = tuple(int(v) for v in order)
    if sorted(order) != list(range(n)):
        raise OracleError(
            "order {} is not a permutation of 0..{}".format(list(order), n - 1)
        )
    return order


def ranks_of(order):
    """Inverse view of an order: ranks[v] is the position of vertex v."""
    ranks = [0] * len(order)
    for position, v in enumerate(order):
        ranks[v] = position
    return tuple(ranks)


def verify_order(inst, order):
    """True iff every two vertices within K positions of each other are adjacent."""
    order = check_permutation(inst.n, order)
    adjacency = inst.graph.adjacency
    for i, u in enumerate(order):
        for v in order[i + 1 : i + 1 + inst.k]:
            if not adjacency[u, v]:
                return False
    return True


def verify_order_literal(inst, order):
    """
    The same test written as the two defining conditions: the first K
    vertices form a clique, and every later vertex is adjacent to each of
    its K immediate predecessors.
    """
    order = check_permutation(inst.n, order)
    graph, k = inst.graph, inst.k
    if not is_clique(graph, order[:k]):
        return False
    for r in range(k, inst.n):
        predecessors = order[r - k : r]
        if not all(graph.adjacency[order[r], u] for u in predecessors):
            return False
    return True


def enumerate_orders(
    inst, limit=None, warn_n=ORACLE_WARN_N, logger=logging.getLogger(__name__)
):
    """
    All valid orders in lexicographic order, by depth-first extension of
    prefixes that already satisfy the window condition.

    `limit=None` keeps every order; `limit=0` only counts; a positive limit
    keeps the first `limit` orders and sets `truncated` when more exist.
    """
    if limit is not None and limit < 0:
        raise OracleError("limit must be nonnegative, got {}".format(limit))

    n, k = inst.n, inst.k
    if n > warn_n:
        logger.warning(
            "Brute-force enumeration on n={} vertices may be slow".format(n)
        )

    masks = inst.graph.neighbor_masks
    everything = full_mask(n)
    orders = []
    prefix = []
    state = {"count": 0, "truncated": False}

    def extend(used):
        if len(prefix) == n:
            if limit is not None and limit > 0 and state["count"] == limit:
                state["truncated"] = True
                return True
            state["count"] += 1
            if limit is None or limit > 0:
                orders.append(tuple(prefix))
            return False

        allowed = everything & ~used
        for u in prefix[-k:]:
            allowed &= masks[u]
        for v in iter_bits(allowed):
            prefix.append(v)
            stop = extend(used | (1 << v))
            prefix.pop()
            if stop:
                return True
        return False

    extend(0)
    return Enumeration(
        orders=orders, count=state["count"], truncated=state["truncated"]
    )


def count_orders(inst, logger=logging.getLogger(__name__)):
    return enumerate_orders(inst, limit=0, logger=logger).count


def min_edges_bound(n, k):
    """(n - 1/2)K - K^2/2 as an exact Fraction."""
    if n < 1 or k < 1:
        raise OracleError(
            "bound needs n >= 1 and k >= 1, got n={}, k={}".format(n, k)
        )
    return Fraction(2 * n - 1, 2) * k - Fraction(k * k, 2)


def min_degree_at_rank(n, k, rank):
    """Neighbours forced on the vertex at `rank`: those within K positions."""
    if not (0 <= rank < n):
        raise OracleError("rank {} out of range for n={}".format(rank, n))
    return min(rank, k) + min(n - 1 - rank, k)


def min_degree_profile(n, k):
    return tuple(min_degree_at_rank(n, k, rank) for rank in range(n))
