"""
Constraint network for the three order models.

Variables 0..n-1 are rank variables (r_v, the rank of vertex v; values are
ranks) and n..2n-1 are position variables (p_j, the vertex at rank j;
values are vertices). Every domain is a python int bitmask. A model uses
the rank variables (rank model), the position variables (vertex model) or
both joined by channelling (combined model).

Constraints that speak about ranks (separations, precedences, span
inequalities) go through a rank view. In the vertex model the view is
derived from the position variables: rank j is possible for v iff v is in
the domain of p_j.

Domain changes are recorded on a trail so that the search can undo them
back to a mark.
"""

from collections import deque

from ..bitset import (
    full_mask,
    highest,
    interval_mask,
    is_singleton,
    iter_bits,
    lowest,
    to_mask,
)
from ..preprocess import ConditionalPrecede, FixRank, Precede
from .core import ModelKind


class Trail:
    """Undo log of (variable, previous domain) entries."""

    def __init__(self):
        self.entries = []
        self.marks = []

    def record(self, var, old):
        self.entries.append((var, old))

    def mark(self):
        self.marks.append(len(self.entries))

    def undo(self, domains):
        target = self.marks.pop()
        while len(self.entries) > target:
            var, old = self.entries.pop()
            domains[var] = old

    @property
    def depth(self):
        return len(self.marks)


class Network:
    """
    Domains, constraints and the propagation queue of one model.

    Arguments:
        "n", "k": instance size and dimension.
        "masks": neighbour bitmask per vertex.
        "kind": the ModelKind, deciding which variables exist.
        "rank_masks": the allowed ranks of each vertex before search.
    """

    def __init__(self, n, k, masks, kind, rank_masks):
        self.n = n
        self.k = k
        self.masks = masks
        self.kind = kind
        self.has_ranks = kind in (ModelKind.RANK, ModelKind.COMBINED)
        self.has_positions = kind in (ModelKind.VERTEX, ModelKind.COMBINED)

        self.domains = [0] * (2 * n)
        if self.has_ranks:
            for v in range(n):
                self.domains[v] = rank_masks[v]
        if self.has_positions:
            for j in range(n):
                self.domains[n + j] = to_mask(
                    v for v in range(n) if rank_masks[v] >> j & 1
                )

        self.trail = Trail()
        self.constraints = []
        self.watchers = [[] for _ in range(2 * n)]
        self.queue = deque()
        self.queued = []
        self.propagations = 0

    @property
    def variables(self):
        rank_vars = list(range(self.n)) if self.has_ranks else []
        position_vars = (
            list(range(self.n, 2 * self.n)) if self.has_positions else []
        )
        return rank_vars + position_vars

    @property
    def position_vars(self):
        return list(range(self.n, 2 * self.n))

    def rank_vars_of(self, vertices):
        """Variables a rank-view constraint over `vertices` must watch."""
        if self.has_ranks:
            return list(vertices)
        return self.position_vars

    def add(self, constraint):
        cid = len(self.constraints)
        self.constraints.append(constraint)
        self.queued.append(False)
        for var in set(constraint.watched(self)):
            self.watchers[var].append(cid)
        return constraint

    def count(self, constraint_class):
        return sum(isinstance(c, constraint_class) for c in self.constraints)

    def _schedule(self, cid):
        if not self.queued[cid]:
            self.queued[cid] = True
            self.queue.append(cid)

    def schedule_all(self):
        for cid in range(len(self.constraints)):
            self._schedule(cid)

    def restrict(self, var, mask):
        """Intersects a domain with mask; False when it empties."""
        old = self.domains[var]
        new = old & mask
        if new == old:
            return True
        self.trail.record(var, old)
        self.domains[var] = new
        if not new:
            return False
        for cid in self.watchers[var]:
            self._schedule(cid)
        return True

    def rank_domain(self, v):
        if self.has_ranks:
            return self.domains[v]
        n = self.n
        return to_mask(
            j for j in range(n) if self.domains[n + j] >> v & 1
        )

    def restrict_rank(self, v, mask):
        if self.has_ranks:
            return self.restrict(v, mask)
        removed = self.rank_domain(v) & ~mask
        keep = ~(1 << v)
        for j in iter_bits(removed):
            if not self.restrict(self.n + j, keep):
                return False
        return self.rank_domain(v) != 0

    def propagate(self):
        """Runs queued constraints to a fixpoint; False on conflict."""
        while self.queue:
            cid = self.queue.popleft()
            self.queued[cid] = False
            self.propagations += 1
            if not self.constraints[cid].propagate(self):
                for pending in self.queue:
                    self.queued[pending] = False
                self.queue.clear()
                return False
        return True

    def mark(self):
        self.trail.mark()

    def undo(self):
        self.trail.undo(self.domains)

    def is_assigned(self, var):
        return is_singleton(self.domains[var])

    def all_assigned(self):
        return all(self.is_assigned(var) for var in self.variables)

    def order(self):
        """The order fixed by a fully assigned network."""
        n = self.n
        if self.has_positions:
            return tuple(lowest(self.domains[n + j]) for j in range(n))
        order = [0] * n
        for v in range(n):
            order[lowest(self.domains[v])] = v
        return tuple(order)


class AllDifferent:
    """
    Permutation constraint over n variables taking n values.

    Forward checking on assigned values, a pigeonhole test on the union of
    domains and hidden singles (a value left in one domain is assigned
    there). Hall intervals are optional.
    """

    def __init__(self, variables, hall_intervals=False):
        self.variables = list(variables)
        self.hall_intervals = hall_intervals

    def watched(self, net):
        return self.variables

    def propagate(self, net):
        domains = net.domains
        size = len(self.variables)

        fixed = 0
        for var in self.variables:
            domain = domains[var]
            if is_singleton(domain):
                if fixed & domain:
                    return False
                fixed |= domain
        if fixed:
            for var in self.variables:
                domain = domains[var]
                if not is_singleton(domain) and domain & fixed:
                    if not net.restrict(var, ~fixed):
                        return False

        once = twice = 0
        for var in self.variables:
            domain = domains[var]
            twice |= once & domain
            once |= domain
        if once != full_mask(size):
            return False
        for value in iter_bits(once & ~twice):
            for var in self.variables:
                if domains[var] >> value & 1:
                    if not net.restrict(var, 1 << value):
                        return False
                    break

        if self.hall_intervals:
            return self._hall(net)
        return True

    def _hall(self, net):
        domains = net.domains
        size = len(self.variables)
        for lo in range(size):
            for hi in range(lo, size):
                interval = interval_mask(lo, hi, size)
                inside = [
                    var
                    for var in self.variables
                    if domains[var] & ~interval == 0
                ]
                width = hi - lo + 1
                if len(inside) > width:
                    return False
                if len(inside) == width:
                    for var in self.variables:
                        if var not in inside and domains[var] & interval:
                            if not net.restrict(var, ~interval):
                                return False
        return True


class Channel:
    """r_v = j if and only if p_j = v."""

    def watched(self, net):
        return range(2 * net.n)

    def propagate(self, net):
        n = net.n
        domains = net.domains
        for v in range(n):
            allowed = to_mask(
                j for j in iter_bits(domains[v]) if domains[n + j] >> v & 1
            )
            if not net.restrict(v, allowed):
                return False
        for j in range(n):
            allowed = to_mask(
                v for v in iter_bits(domains[n + j]) if domains[v] >> j & 1
            )
            if not net.restrict(n + j, allowed):
                return False
        return True


class Window:
    """Positions i < j at most K apart hold adjacent vertices."""

    def __init__(self, i, j):
        self.i = i
        self.j = j

    def watched(self, net):
        return (net.n + self.i, net.n + self.j)

    def _support(self, net, domain):
        support = 0
        for u in iter_bits(domain):
            support |= net.masks[u]
        return support

    def propagate(self, net):
        first, second = net.n + self.i, net.n + self.j
        if not net.restrict(second, self._support(net, net.domains[first])):
            return False
        return net.restrict(first, self._support(net, net.domains[second]))


class Separation:
    """|r_u - r_v| >= gap, by bounds."""

    def __init__(self, u, v, gap):
        self.u = u
        self.v = v
        self.gap = gap

    def watched(self, net):
        return net.rank_vars_of((self.u, self.v))

    def _forbidden(self, net, domain):
        return interval_mask(
            highest(domain) - self.gap + 1,
            lowest(domain) + self.gap - 1,
            net.n,
        )

    def propagate(self, net):
        du = net.rank_domain(self.u)
        if not du or not net.restrict_rank(self.v, ~self._forbidden(net, du)):
            return False
        dv = net.rank_domain(self.v)
        return net.restrict_rank(self.u, ~self._forbidden(net, dv))


class PrecedeConstraint:
    """r_before < r_after."""

    def __init__(self, before, after):
        self.before = before
        self.after = after

    def watched(self, net):
        return net.rank_vars_of((self.before, self.after))

    def propagate(self, net):
        first = net.rank_domain(self.before)
        if not first:
            return False
        if not net.restrict_rank(
            self.after, ~interval_mask(0, lowest(first), net.n)
        ):
            return False
        last = net.rank_domain(self.after)
        return net.restrict_rank(
            self.before, ~interval_mask(highest(last), net.n - 1, net.n)
        )


class ConditionalPrecedeConstraint:
    """
    |r_v - r_w| >= K+1 implies r_before < r_after.

    The consequence is posted once the bounds of r_v and r_w entail the
    separation; when the bounds rule out the consequence, r_v and r_w are
    kept within K of each other instead.
    """

    def __init__(self, v, w, before, after):
        self.v = v
        self.w = w
        self.precede = PrecedeConstraint(before, after)

    def watched(self, net):
        return net.rank_vars_of(
            (self.v, self.w, self.precede.before, self.precede.after)
        )

    def propagate(self, net):
        k = net.k
        dv = net.rank_domain(self.v)
        dw = net.rank_domain(self.w)
        if not dv or not dw:
            return False
        if (
            lowest(dw) - highest(dv) >= k + 1
            or lowest(dv) - highest(dw) >= k + 1
        ):
            return self.precede.propagate(net)

        first = net.rank_domain(self.precede.before)
        last = net.rank_domain(self.precede.after)
        if not first or not last:
            return False
        if lowest(first) >= highest(last):
            near_w = interval_mask(lowest(dw) - k, highest(dw) + k, net.n)
            if not net.restrict_rank(self.v, near_w):
                return False
            dv = net.rank_domain(self.v)
            near_v = interval_mask(lowest(dv) - k, highest(dv) + k, net.n)
            return net.restrict_rank(self.w, near_v)
        return True


class Span:
    """max(r) - min(r) >= min_span over a vertex set."""

    def __init__(self, members, min_span):
        self.members = list(members)
        self.min_span = min_span

    def watched(self, net):
        return net.rank_vars_of(self.members)

    def propagate(self, net):
        domains = [net.rank_domain(v) for v in self.members]
        if not all(domains):
            return False
        for i, v in enumerate(self.members):
            others = domains[:i] + domains[i + 1 :]
            top = max(highest(d) for d in others)
            bottom = min(lowest(d) for d in others)
            if top - bottom < self.min_span:
                forbidden = interval_mask(
                    top - self.min_span + 1,
                    bottom + self.min_span - 1,
                    net.n,
                )
                if not net.restrict_rank(v, ~forbidden):
                    return False
                domains[i] = net.rank_domain(v)
        return True


def _initial_rank_masks(report):
    masks = list(report.rank_domains)
    for constraint in report.symmetry_constraints:
        if isinstance(constraint, FixRank):
            masks[constraint.vertex] &= 1 << constraint.rank
    return masks


def build_model(inst, report, kind, hall_intervals=False):
    """
    Builds the network of one model.

    Rank: all-different over ranks and a K+1 separation for every
    non-adjacent pair. Vertex: all-different over positions and a window
    constraint for every position pair at most K apart. Combined: both,
    joined by channelling. All models take the report's rank domains,
    symmetry constraints and valid inequalities through the rank view.
    """
    n, k = inst.n, inst.k
    graph = inst.graph
    net = Network(
        n, k, graph.neighbor_masks, kind, _initial_rank_masks(report)
    )

    if net.has_ranks:
        net.add(AllDifferent(range(n), hall_intervals=hall_intervals))
    if net.has_positions:
        net.add(AllDifferent(range(n, 2 * n), hall_intervals=hall_intervals))
    if net.has_ranks and net.has_positions:
        net.add(Channel())

    if net.has_ranks:
        for u in range(n):
            for v in range(u + 1, n):
                if not graph.adjacency[u, v]:
                    net.add(Separation(u, v, k + 1))
    if net.has_positions:
        for i in range(n):
            for j in range(i + 1, min(i + k, n - 1) + 1):
                net.add(Window(i, j))

    for constraint in report.symmetry_constraints:
        if isinstance(constraint, Precede):
            net.add(PrecedeConstraint(constraint.before, constraint.after))
        elif isinstance(constraint, ConditionalPrecede):
            net.add(ConditionalPrecedeConstraint(*constraint))

    for inequality in report.valid_inequalities:
        if inequality.pairwise:
            members = inequality.members
            for a in range(len(members)):
                for b in range(a + 1, len(members)):
                    net.add(Separation(members[a], members[b], k + 1))
        else:
            net.add(Span(inequality.members, inequality.min_span))

    return net
