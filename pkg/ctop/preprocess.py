"""
Preprocessing run before search: infeasibility checks, rank-domain
reduction, symmetry-breaking constraints and valid inequalities.

Every result here holds for all valid orders of the instance (checks,
domains, inequalities) or for at least one of them (symmetry constraints),
so a solver may add any combination of them without changing the answer.

Symmetry constraints all derive from one vertex priority (see
`symmetry_priority`). Each constraint says "of two interchangeable
vertices, the one with higher priority comes first", so the valid order
whose sequence of priorities is lexicographically smallest satisfies all of
them at once.
"""

import itertools
import json
import logging
from collections import namedtuple
from fractions import Fraction

import networkx as nx

from .bitset import full_mask, interval_mask, iter_bits, popcount, to_mask
from .graph import (
    DEFAULT_STABLE_SET_CAP,
    degree_class,
    induced_subgraph,
    is_stable,
    max_missing_degree,
    maximal_stable_sets,
    maximum_stable_set,
)
from .oracle import (
    ORACLE_WARN_N,
    Instance,
    enumerate_orders,
    min_degree_at_rank,
    min_edges_bound,
)

Verdict = namedtuple("Verdict", ["infeasible", "check", "witness", "detail"])
UNKNOWN = Verdict(infeasible=False, check=None, witness=None, detail="")

DomainReduction = namedtuple("DomainReduction", ["domains", "verdict", "rules"])

FixRank = namedtuple("FixRank", ["vertex", "rank"])
Precede = namedtuple("Precede", ["before", "after"])
# if |r_v - r_w| >= K+1 then r_before < r_after
ConditionalPrecede = namedtuple(
    "ConditionalPrecede", ["v", "w", "before", "after"]
)
SeparationConstraint = namedtuple(
    "SeparationConstraint", ["members", "min_span", "pairwise"]
)

CHECK_NUMBERS = {
    "min_degree": 1,
    "min_edges": 2,
    "small_degree_ub": 3,
    "large_degree_lb": 4,
    "max_stable_set": 5,
}
DOMAIN_REDUCTION = "domain_reduction"

RULE_SMALL_DEGREE = "small_degree_ranks"
RULE_NEIGHBOURHOOD = "small_degree_neighbours"

VI_FORMS = ("span", "pairwise")
VI_KINDS = ("stable", "subset")
MAX_SUBSET_SIZE = 6


class PreprocessError(Exception):
    """Exception wrapper class for errors related to preprocessing"""

    pass


def _show(value):
    if isinstance(value, Fraction) and value.denominator != 1:
        return str(float(value))
    return str(int(value))


def _infeasible(check, witness, detail):
    return Verdict(infeasible=True, check=check, witness=witness, detail=detail)


def check_min_degree(inst):
    """Every rank needs min(K, n-1) neighbours, so no vertex can have fewer."""
    need = min(inst.k, inst.n - 1)
    low = tuple(int(v) for v in degree_class(inst.graph, 0, need - 1))
    if not low:
        return UNKNOWN
    low = tuple(sorted(low))
    return _infeasible(
        "min_degree",
        low,
        "vertices {} have degree below {}".format(list(low), need),
    )


def check_min_edges(inst):
    bound = min_edges_bound(inst.n, inst.k)
    if inst.graph.m < bound:
        return _infeasible(
            "min_edges",
            inst.graph.m,
            "m={} < bound {}".format(inst.graph.m, _show(bound)),
        )
    return UNKNOWN


def rank_capacity(n, k, degree):
    """Number of ranks a vertex of the given degree can occupy."""
    return sum(
        1 for rank in range(n) if min_degree_at_rank(n, k, rank) <= degree
    )


def check_small_degree_ub(inst):
    """
    Vertices of degree at most K+delta can only sit at ranks demanding at
    most K+delta neighbours; more such vertices than ranks is infeasible.
    Scans delta = 0..K-1 and reports the first that fires.
    """
    n, k = inst.n, inst.k
    for delta in range(k):
        members = degree_class(inst.graph, k, k + delta)
        capacity = rank_capacity(n, k, k + delta)
        if len(members) > capacity:
            return _infeasible(
                "small_degree_ub",
                delta,
                "delta={}: {} vertices with degree in [{}, {}] "
                "but only {} ranks admit them".format(
                    delta, len(members), k, k + delta, capacity
                ),
            )
    return UNKNOWN


def check_large_degree_lb(inst):
    n, k = inst.n, inst.k
    if n < 2 * k + 1:
        return UNKNOWN
    large = degree_class(inst.graph, 2 * k, n - 1)
    if len(large) <= n - 2 * k - 1:
        return _infeasible(
            "large_degree_lb",
            len(large),
            "{} vertices of degree >= {} for {} middle ranks".format(
                len(large), 2 * k, n - 2 * k
            ),
        )
    return UNKNOWN


def stable_set_threshold(n, k):
    return Fraction(n, k + 1) + 1


def check_max_stable_set(
    inst, cap=DEFAULT_STABLE_SET_CAP, logger=logging.getLogger(__name__)
):
    threshold = stable_set_threshold(inst.n, inst.k)
    enumeration = maximal_stable_sets(inst.graph, cap=cap)

    witness = next(
        (s for s in enumeration.sets if len(s) > threshold), None
    )
    if witness is None and enumeration.truncated:
        logger.info(
            "Stable set enumeration truncated at {} sets; "
            "computing an exact maximum stable set".format(cap)
        )
        largest = maximum_stable_set(inst.graph)
        if len(largest) > threshold:
            witness = largest

    if witness is None:
        return UNKNOWN
    members = tuple(sorted(witness))
    return _infeasible(
        "max_stable_set",
        members,
        "stable set {} of size {} > {}".format(
            list(members), len(members), _show(threshold)
        ),
    )


def run_checks(
    inst,
    first_hit=True,
    stable_set_cap=DEFAULT_STABLE_SET_CAP,
    logger=logging.getLogger(__name__),
):
    """
    Runs the checks in cost order and returns the verdicts that fired.
    With `first_hit` the scan stops at the first one.
    """
    checks = [
        check_min_degree,
        check_min_edges,
        check_small_degree_ub,
        check_large_degree_lb,
        lambda i: check_max_stable_set(i, cap=stable_set_cap, logger=logger),
    ]
    fired = []
    for check in checks:
        verdict = check(inst)
        if verdict.infeasible:
            logger.debug("Check fired: {}".format(verdict.detail))
            fired.append(verdict)
            if first_hit:
                break
    return fired


def reduce_domains(inst):
    """
    Rank domains for every vertex.

    A vertex can only sit at ranks whose forced neighbourhood fits in its
    degree. When a vertex of degree in [K, 2K-1] has no spare adjacency at
    any of its ranks (n >= 2K+1), its neighbours must lie within K ranks of
    it, which confines them to the union of K-windows around its ranks.
    All applicable sets are intersected; an empty domain is a verdict.
    """
    if check_min_degree(inst).infeasible:
        raise PreprocessError(
            "domain reduction needs every degree >= min(K, n-1)"
        )
    n, k = inst.n, inst.k
    graph = inst.graph
    everything = full_mask(n)
    profile = [min_degree_at_rank(n, k, rank) for rank in range(n)]
    rules = []

    def ranks_for(degree):
        return to_mask(r for r in range(n) if profile[r] <= degree)

    own = [ranks_for(graph.degree(v)) for v in range(n)]
    if any(mask != everything for mask in own):
        rules.append(RULE_SMALL_DEGREE)
    domains = list(own)

    if n >= 2 * k + 1:
        changed = False
        for pivot in sorted(degree_class(graph, k, 2 * k - 1)):
            degree = graph.degree(pivot)
            if any(profile[r] != degree for r in iter_bits(own[pivot])):
                continue
            window = 0
            for rank in iter_bits(own[pivot]):
                window |= interval_mask(rank - k, rank + k, n)
            if window == everything:
                continue
            for u in iter_bits(graph.neighbor_masks[pivot]):
                if domains[u] & ~window:
                    domains[u] &= window
                    changed = True
        if changed:
            rules.append(RULE_NEIGHBOURHOOD)

    verdict = UNKNOWN
    empty = [v for v in range(n) if domains[v] == 0]
    if empty:
        verdict = _infeasible(
            DOMAIN_REDUCTION,
            empty[0],
            "vertex {} has no admissible rank".format(empty[0]),
        )
    return DomainReduction(
        domains=tuple(domains), verdict=verdict, rules=tuple(rules)
    )


def _condition_one_vertices(inst):
    if inst.n < inst.k + 2:
        return ()
    return tuple(sorted(degree_class(inst.graph, inst.k, inst.k)))[:2]


def symmetry_priority(inst):
    """
    Vertex priority shared by all symmetry constraints: the lowest-index
    degree-K vertex first when degree-K vertices must sit at the ends,
    then degree descending, then index.
    """
    degrees = inst.graph.degrees
    ends = _condition_one_vertices(inst)
    head = ends[:1]
    rest = sorted(
        (v for v in range(inst.n) if v not in head),
        key=lambda v: (-int(degrees[v]), v),
    )
    return tuple(head) + tuple(rest)


def _twin_classes(masks, position, closed):
    classes = {}
    for v in sorted(range(len(masks)), key=lambda v: position[v]):
        key = masks[v] | (1 << v) if closed else masks[v]
        classes.setdefault(key, []).append(v)
    return [members for members in classes.values() if len(members) > 1]


def _single_extra(small, large):
    """The one element of large missing from small, when small is a subset."""
    if small & ~large:
        return None
    extra = large & ~small
    if popcount(extra) != 1:
        return None
    return next(iter_bits(extra))


def _swap_candidates(inst, groups, position, closed):
    """
    For each group anchor u, the vertices v interchangeable with u unless
    v sits next to its one extra neighbour w.
    """
    masks = inst.graph.neighbor_masks
    found = []
    for group in groups:
        u = group[0]
        members = to_mask(group)
        if closed:
            candidates = masks[u] & ~members
            own = masks[u] | (1 << u)
        else:
            candidates = full_mask(inst.n) & ~masks[u] & ~members
            own = masks[u]
        for v in iter_bits(candidates):
            other = masks[v] | (1 << v) if closed else masks[v]
            w = _single_extra(own, other)
            if w is None:
                continue
            before, after = sorted((u, v), key=lambda x: position[x])
            found.append(ConditionalPrecede(v, w, before, after))
    return found


def _chain(members):
    return [Precede(a, b) for a, b in zip(members, members[1:])]


def _symmetry_candidates(inst):
    n = inst.n
    masks = inst.graph.neighbor_masks
    priority = symmetry_priority(inst)
    position = {v: i for i, v in enumerate(priority)}
    candidates = []

    false_twins = _twin_classes(masks, position, closed=False)
    true_twins = _twin_classes(masks, position, closed=True)
    for members in false_twins:
        candidates.extend((2, c) for c in _chain(members))
    for members in true_twins:
        candidates.extend((3, c) for c in _chain(members[:3]))

    def with_singletons(classes):
        covered = set(itertools.chain.from_iterable(classes))
        singles = [[v] for v in priority if v not in covered]
        return sorted(classes + singles, key=lambda g: position[g[0]])

    stable_groups = with_singletons(false_twins)
    clique_groups = with_singletons([m[:3] for m in true_twins])
    candidates.extend(
        (4, c)
        for c in _swap_candidates(inst, stable_groups, position, closed=False)
    )
    candidates.extend(
        (5, c)
        for c in _swap_candidates(inst, clique_groups, position, closed=True)
    )

    ends = _condition_one_vertices(inst)
    if ends:
        candidates.append((1, FixRank(ends[0], 0)))
        if len(ends) > 1:
            candidates.append((1, FixRank(ends[1], n - 1)))

    if not candidates and n >= 2:
        candidates.append((6, Precede(0, 1)))
    return candidates


def _guard(candidates, n, logger):
    """Drops any constraint that clashes with one kept before it."""
    order = nx.DiGraph()
    order.add_nodes_from(range(n))
    fixed = {}
    strict = nx.DiGraph()
    strict.add_nodes_from(range(n))
    kept = []
    seen = set()

    for condition, constraint in candidates:
        if constraint in seen:
            continue
        seen.add(constraint)
        if isinstance(constraint, FixRank):
            v, rank = constraint
            clash = (
                v in fixed
                or rank in fixed.values()
                or (rank == 0 and strict.in_degree(v) > 0)
                or (rank == n - 1 and strict.out_degree(v) > 0)
            )
            if clash:
                logger.debug("Dropping clashing {}".format(constraint))
                continue
            fixed[v] = rank
        else:
            before, after = constraint[-2], constraint[-1]
            if isinstance(constraint, Precede) and (
                fixed.get(after) == 0 or fixed.get(before) == n - 1
            ):
                logger.debug("Dropping clashing {}".format(constraint))
                continue
            order.add_edge(before, after)
            if not nx.is_directed_acyclic_graph(order):
                order.remove_edge(before, after)
                logger.debug("Dropping cyclic {}".format(constraint))
                continue
            if isinstance(constraint, Precede):
                strict.add_edge(before, after)
        kept.append((condition, constraint))
    return kept


def _guarded_symmetry(inst, logger):
    return _guard(_symmetry_candidates(inst), inst.n, logger)


def detect_symmetry_breaking(inst, logger=logging.getLogger(__name__)):
    """
    Symmetry-breaking constraints, emitted in this order: twin chains of
    stable sets and of cliques (at most three members), conditional
    precedences for vertices interchangeable with a group anchor, the
    degree-K end vertices, and a single reversal-breaking precedence when
    nothing else applies.
    """
    return [c for _, c in _guarded_symmetry(inst, logger)]


def generate_valid_inequalities(
    inst,
    sets=None,
    form="span",
    kind="stable",
    stable_set_cap=DEFAULT_STABLE_SET_CAP,
    logger=logging.getLogger(__name__),
):
    """
    Separation constraints over vertex sets.

    Arguments:
        "sets": iterables of vertices. Defaults to the maximal stable sets
            with at least two members.
        "form": "span" bounds r_max - r_min; "pairwise" separates every two
            members by K+1 ranks (stable sets only).
        "kind": "stable" uses (|S|-1)(K+1) and requires an independent set;
            "subset" uses max(|S|, max missing degree + K) and requires a set
            whose induced graph has no valid order.
    """
    if form not in VI_FORMS:
        raise PreprocessError("unknown form {!r}".format(form))
    if kind not in VI_KINDS:
        raise PreprocessError("unknown kind {!r}".format(kind))
    if kind == "subset" and form == "pairwise":
        raise PreprocessError("the pairwise form needs stable sets")

    graph, k = inst.graph, inst.k
    if sets is None:
        sets = maximal_stable_sets(graph, cap=stable_set_cap).sets
        sets = [s for s in sets if len(s) >= 2]

    inequalities = []
    for members in sets:
        members = tuple(sorted(set(int(v) for v in members)))
        graph.check_vertices(members)
        if len(members) < 2:
            continue
        if kind == "stable":
            if not is_stable(graph, members):
                raise PreprocessError(
                    "set {} has adjacent members".format(list(members))
                )
            span = (len(members) - 1) * (k + 1)
        else:
            if len(members) > ORACLE_WARN_N:
                logger.warning(
                    "Checking a {}-vertex subset by enumeration".format(
                        len(members)
                    )
                )
            sub = Instance(induced_subgraph(graph, members), k)
            if enumerate_orders(sub, limit=1, logger=logger).count:
                raise PreprocessError(
                    "induced graph on {} has a valid order".format(
                        list(members)
                    )
                )
            span = max(len(members), max_missing_degree(graph, members) + k)
        inequalities.append(
            SeparationConstraint(
                members=members, min_span=span, pairwise=form == "pairwise"
            )
        )
    return inequalities


def infeasible_subsets(inst, size, limit=100):
    """
    Vertex sets of the given size whose induced graph has no valid order,
    in lexicographic order, at most `limit` of them.
    """
    if not (2 <= size <= MAX_SUBSET_SIZE):
        raise PreprocessError(
            "subset size must lie in [2, {}], got {}".format(
                MAX_SUBSET_SIZE, size
            )
        )
    found = []
    for members in itertools.combinations(range(inst.n), size):
        if len(found) >= limit:
            break
        sub = Instance(induced_subgraph(inst.graph, members), inst.k)
        if enumerate_orders(sub, limit=1).count == 0:
            found.append(members)
    return found


def _constraint_dict(constraint):
    payload = {"type": type(constraint).__name__}
    payload.update(constraint._asdict())
    return payload


class PreprocessReport(
    namedtuple(
        "PreprocessReport",
        [
            "verdict",
            "fired",
            "rank_domains",
            "symmetry_constraints",
            "valid_inequalities",
            "conditions",
            "rules",
        ],
    )
):
    """
    Everything preprocessing learned about one instance.

    `rank_domains` holds one bitmask of allowed ranks per vertex.
    `fired` lists every check verdict that fired (only the first one unless
    all checks were requested); `verdict` is the first of them, or the
    domain-reduction verdict.
    """

    __slots__ = ()

    @classmethod
    def empty(cls, n):
        return cls(
            verdict=UNKNOWN,
            fired=(),
            rank_domains=(full_mask(n),) * n,
            symmetry_constraints=(),
            valid_inequalities=(),
            conditions=(),
            rules=(),
        )

    @property
    def infeasible(self):
        return self.verdict.infeasible

    def domain(self, v):
        return frozenset(iter_bits(self.rank_domains[v]))

    def to_dict(self):
        def verdict_dict(verdict):
            witness = verdict.witness
            if isinstance(witness, tuple):
                witness = list(witness)
            return {
                "infeasible": verdict.infeasible,
                "check": verdict.check,
                "witness": witness,
                "detail": verdict.detail,
            }

        return {
            "verdict": verdict_dict(self.verdict),
            "fired": [verdict_dict(v) for v in self.fired],
            "rank_domains": [
                sorted(iter_bits(mask)) for mask in self.rank_domains
            ],
            "symmetry_constraints": [
                _constraint_dict(c) for c in self.symmetry_constraints
            ],
            "valid_inequalities": [
                {
                    "members": list(vi.members),
                    "min_span": vi.min_span,
                    "pairwise": vi.pairwise,
                }
                for vi in self.valid_inequalities
            ],
            "conditions": list(self.conditions),
            "rules": list(self.rules),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def preprocess(
    inst,
    use_checks=True,
    use_domain_reduction=True,
    use_symmetry=True,
    use_valid_inequalities=False,
    vi_form="span",
    all_checks=False,
    stable_set_cap=DEFAULT_STABLE_SET_CAP,
    logger=logging.getLogger(__name__),
):
    """Runs the enabled stages and collects their results in a report."""
    report = PreprocessReport.empty(inst.n)

    if use_checks:
        fired = tuple(
            run_checks(
                inst,
                first_hit=not all_checks,
                stable_set_cap=stable_set_cap,
                logger=logger,
            )
        )
        if fired:
            logger.info("Infeasible by preprocessing: {}".format(fired[0].detail))
            return report._replace(verdict=fired[0], fired=fired)

    if use_domain_reduction:
        if check_min_degree(inst).infeasible:
            logger.debug("Skipping domain reduction: a degree is below K")
        else:
            reduction = reduce_domains(inst)
            report = report._replace(
                rank_domains=reduction.domains, rules=reduction.rules
            )
            if reduction.verdict.infeasible:
                logger.info(
                    "Infeasible by domain reduction: {}".format(
                        reduction.verdict.detail
                    )
                )
                return report._replace(verdict=reduction.verdict)

    if use_symmetry:
        kept = _guarded_symmetry(inst, logger)
        report = report._replace(
            symmetry_constraints=tuple(c for _, c in kept),
            conditions=tuple(sorted({condition for condition, _ in kept})),
        )

    if use_valid_inequalities:
        report = report._replace(
            valid_inequalities=tuple(
                generate_valid_inequalities(
                    inst,
                    form=vi_form,
                    stable_set_cap=stable_set_cap,
                    logger=logger,
                )
            )
        )

    logger.debug(
        "Preprocessing kept {} symmetry constraints and {} inequalities".format(
            len(report.symmetry_constraints), len(report.valid_inequalities)
        )
    )
    return report
