"""
The combined model on OR-Tools CP-SAT, used to cross-check the
propagation engine.

Rank variables r[v] and position variables p[j] are linked by an inverse
constraint, both carry an all-different, windows become allowed-assignment
tables over adjacent vertex pairs and separations are reified on a
direction literal. Symmetry constraints and valid inequalities take the
same meaning as in the propagation engine. The solver runs on one worker
so that a fixed instance gives a fixed answer.
"""

import logging
import time

from ortools.sat.python import cp_model

from ..oracle import verify_order
from ..preprocess import ConditionalPrecede, FixRank, Precede
from .core import Mode, SolveOutcome, SolverException, SolveStats, SolveStatus


class _OrderCollector(cp_model.CpSolverSolutionCallback):
    def __init__(self, positions, limit):
        cp_model.CpSolverSolutionCallback.__init__(self)
        self.positions = positions
        self.limit = limit
        self.seen = set()
        self.orders = []
        self.truncated = False

    def on_solution_callback(self):
        order = tuple(self.Value(p) for p in self.positions)
        if order in self.seen:
            return
        if self.limit is not None and len(self.seen) == self.limit:
            self.truncated = True
            self.StopSearch()
            return
        self.seen.add(order)
        if self.limit is not None or not self.orders:
            self.orders.append(order)


class CPSATSolver:
    """
    Same contract as PropagationSolver: construct with the instance, a
    SolveConfig and a PreprocessReport, then call solve(). The model kind
    in the config is ignored; CP-SAT always gets the combined model.
    Choice points are CP-SAT branches and fails are conflicts.
    """

    def __init__(
        self, inst, config, report, logger=logging.getLogger(__name__)
    ):
        self.inst = inst
        self.config = config._check_inputs()
        self.report = report
        self.logger = logger
        self.solved = False

    def _separate(self, model, first, second, gap, name):
        """|first - second| >= gap."""
        direction = model.NewBoolVar(name)
        model.Add(first - second >= gap).OnlyEnforceIf(direction)
        model.Add(second - first >= gap).OnlyEnforceIf(direction.Not())

    def build(self):
        n, k = self.inst.n, self.inst.k
        graph = self.inst.graph
        model = cp_model.CpModel()

        ranks = []
        for v in range(n):
            allowed = [
                r for r in range(n) if self.report.rank_domains[v] >> r & 1
            ]
            ranks.append(
                model.NewIntVarFromDomain(
                    cp_model.Domain.FromValues(allowed), "r{}".format(v)
                )
            )
        positions = [model.NewIntVar(0, n - 1, "p{}".format(j)) for j in range(n)]

        model.AddAllDifferent(ranks)
        model.AddAllDifferent(positions)
        model.AddInverse(ranks, positions)

        adjacent_pairs = [(u, v) for u, v in graph.edges] + [
            (v, u) for u, v in graph.edges
        ]
        for i in range(n):
            for j in range(i + 1, min(i + k, n - 1) + 1):
                model.AddAllowedAssignments(
                    [positions[i], positions[j]], adjacent_pairs
                )

        for u in range(n):
            for v in range(u + 1, n):
                if not graph.adjacency[u, v]:
                    self._separate(
                        model, ranks[u], ranks[v], k + 1, "s{}_{}".format(u, v)
                    )

        for index, constraint in enumerate(self.report.symmetry_constraints):
            if isinstance(constraint, FixRank):
                model.Add(ranks[constraint.vertex] == constraint.rank)
            elif isinstance(constraint, Precede):
                model.Add(ranks[constraint.before] < ranks[constraint.after])
            elif isinstance(constraint, ConditionalPrecede):
                gap = model.NewIntVar(0, n - 1, "d{}".format(index))
                model.AddAbsEquality(
                    gap, ranks[constraint.v] - ranks[constraint.w]
                )
                trigger = model.NewBoolVar("t{}".format(index))
                model.Add(gap >= k + 1).OnlyEnforceIf(trigger)
                model.Add(gap <= k).OnlyEnforceIf(trigger.Not())
                model.Add(
                    ranks[constraint.before] < ranks[constraint.after]
                ).OnlyEnforceIf(trigger)

        for index, inequality in enumerate(self.report.valid_inequalities):
            members = [ranks[v] for v in inequality.members]
            if inequality.pairwise:
                for a in range(len(members)):
                    for b in range(a + 1, len(members)):
                        self._separate(
                            model,
                            members[a],
                            members[b],
                            k + 1,
                            "vi{}_{}_{}".format(index, a, b),
                        )
            else:
                top = model.NewIntVar(0, n - 1, "max{}".format(index))
                bottom = model.NewIntVar(0, n - 1, "min{}".format(index))
                model.AddMaxEquality(top, members)
                model.AddMinEquality(bottom, members)
                model.Add(top - bottom >= inequality.min_span)

        return model, positions

    def solve(self):
        start = time.perf_counter()
        model, positions = self.build()

        solver = cp_model.CpSolver()
        solver.parameters.max_time_in_seconds = float(self.config.time_limit)
        solver.parameters.num_search_workers = 1

        mode = self.config.mode
        limit = None
        if mode == Mode.FIND_ONE:
            limit = 1
        elif mode == Mode.ENUMERATE_ALL:
            limit = self.config.limit
        if mode != Mode.FIND_ONE:
            solver.parameters.enumerate_all_solutions = True

        collector = _OrderCollector(positions, limit)
        result = solver.Solve(model, collector)
        self.logger.debug(
            "CP-SAT finished with {}".format(solver.StatusName(result))
        )

        for order in collector.orders:
            if not verify_order(self.inst, order):
                raise SolverException(
                    "CP-SAT returned an invalid order {}".format(list(order))
                )

        count = len(collector.seen)
        exhausted = result in (cp_model.OPTIMAL, cp_model.INFEASIBLE)
        if count and (mode == Mode.FIND_ONE or exhausted or collector.truncated):
            status = SolveStatus.FEASIBLE
        elif result == cp_model.INFEASIBLE:
            status = SolveStatus.INFEASIBLE
        elif result == cp_model.MODEL_INVALID:
            raise SolverException(
                "CP-SAT rejected the model: {}".format(
                    model.Validate()
                )
            )
        else:
            status = SolveStatus.TIMEOUT
        self.solved = status != SolveStatus.TIMEOUT

        return SolveOutcome(
            status=status,
            orders=tuple(collector.orders),
            count=count,
            truncated=collector.truncated,
            stats=SolveStats(
                choice_points=int(solver.NumBranches()),
                fails=int(solver.NumConflicts()),
                propagations=0,
                time_us=int((time.perf_counter() - start) * 1e6),
                check=self.report.verdict.check,
            ),
        )
