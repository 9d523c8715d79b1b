"""
Chronological backtracking over a constraint network.

Each node runs propagation to a fixpoint, then branches d-way on one
variable: every value of the chosen variable is tried in ascending order,
each try counting as one choice point. Timeouts are checked every
TIMEOUT_CHECK_INTERVAL nodes and reported with the statistics gathered so
far.
"""

import logging
import time

from ..bitset import is_singleton, iter_bits, popcount
from ..oracle import verify_order
from .core import (
    TIMEOUT_CHECK_INTERVAL,
    Branching,
    Mode,
    SolveOutcome,
    SolverException,
    SolveStats,
    SolveStatus,
)
from .network import build_model


class _SearchTimeout(Exception):
    pass


class PropagationSolver:
    """
    Finds, enumerates or counts orders with the bespoke propagation engine.

    Arguments:
        "inst": the Instance to solve.
        "config": a SolveConfig.
        "report": the PreprocessReport whose results reach the model.
    """

    def __init__(
        self, inst, config, report, logger=logging.getLogger(__name__)
    ):
        self.inst = inst
        self.config = config._check_inputs()
        self.report = report
        self.logger = logger

        self.network = None
        self.orders = []
        self.count = 0
        self.truncated = False
        self.choice_points = 0
        self.fails = 0
        self.nodes = 0
        self.deadline = None
        self.solved = False

    def _tick(self):
        self.nodes += 1
        if (
            self.nodes % TIMEOUT_CHECK_INTERVAL == 0
            and time.perf_counter() > self.deadline
        ):
            raise _SearchTimeout()

    def _branch_min_domain(self, net):
        best = None
        for var in net.variables:
            size = popcount(net.domains[var])
            if size > 1 and (best is None or size < best[0]):
                best = (size, var)
        if best is None:
            return []
        var = best[1]
        return [(var, value) for value in iter_bits(net.domains[var])]

    def _branch_position(self, net):
        n = net.n
        if net.has_positions:
            for j in range(n):
                domain = net.domains[n + j]
                if not is_singleton(domain):
                    return [(n + j, v) for v in iter_bits(domain)]
            return []

        taken = 0
        for v in range(n):
            if is_singleton(net.domains[v]):
                taken |= net.domains[v]
        free = ~taken & ((1 << n) - 1)
        position = (free & -free).bit_length() - 1
        return [
            (v, position)
            for v in range(n)
            if not is_singleton(net.domains[v])
            and net.domains[v] >> position & 1
        ]

    def branch(self, net):
        """The (variable, value) decisions tried at the current node."""
        if self.config.branching == Branching.MIN_DOMAIN:
            return self._branch_min_domain(net)
        return self._branch_position(net)

    def _record(self, order):
        if not verify_order(self.inst, order):
            raise SolverException(
                "search produced an invalid order {}".format(list(order))
            )
        mode = self.config.mode
        if mode == Mode.ENUMERATE_ALL:
            if self.count == self.config.limit:
                self.truncated = True
                return True
            self.orders.append(order)
        elif not self.orders:
            self.orders.append(order)
        self.count += 1
        return mode == Mode.FIND_ONE

    def _search(self, net):
        """Explores the subtree below the current fixpoint; True stops."""
        self._tick()
        if net.all_assigned():
            return self._record(net.order())

        decisions = self.branch(net)
        if not decisions:
            self.fails += 1
            return False
        for var, value in decisions:
            self.choice_points += 1
            net.mark()
            consistent = net.restrict(var, 1 << value) and net.propagate()
            if consistent:
                stop = self._search(net)
            else:
                self.fails += 1
                stop = False
            net.undo()
            if stop:
                return True
        return False

    def _stats(self, start):
        return SolveStats(
            choice_points=self.choice_points,
            fails=self.fails,
            propagations=self.network.propagations if self.network else 0,
            time_us=int((time.perf_counter() - start) * 1e6),
            check=self.report.verdict.check,
        )

    def solve(self):
        """Runs the search and returns a SolveOutcome."""
        start = time.perf_counter()
        self.deadline = start + self.config.time_limit

        net = build_model(
            self.inst,
            self.report,
            self.config.model,
            hall_intervals=self.config.hall_intervals,
        )
        self.network = net
        self.logger.debug(
            "Built {} model with {} constraints".format(
                self.config.model.value, len(net.constraints)
            )
        )

        status = None
        net.schedule_all()
        if net.propagate():
            net.mark()
            try:
                self._search(net)
            except _SearchTimeout:
                status = SolveStatus.TIMEOUT
                self.logger.info(
                    "Search timed out after {} choice points".format(
                        self.choice_points
                    )
                )
            net.undo()
        else:
            self.fails += 1

        if status is None:
            status = (
                SolveStatus.FEASIBLE if self.count else SolveStatus.INFEASIBLE
            )
        self.solved = status != SolveStatus.TIMEOUT
        return SolveOutcome(
            status=status,
            orders=tuple(self.orders),
            count=self.count,
            truncated=self.truncated,
            stats=self._stats(start),
        )
