"""Contains the solve entry point and the Orderer coordinator."""
import logging
import time
from enum import Enum

from .oracle import Instance
from .preprocess import preprocess
from .solvers import (
    CPSATSolver,
    PropagationSolver,
    SolveConfig,
    SolveOutcome,
    SolverException,
    SolveStats,
    SolveStatus,
)

SOLVER_MAP = {
    "propagation": PropagationSolver,
    "cpsat": CPSATSolver,
}


class OrdererStatus(Enum):
    INITIALIZED = "Initialized"
    RUNNING = "Running"
    ERROR = "Error"
    NO_SOLUTION = "No Solution"
    COMPLETE = "Complete"
    TIMEOUT = "Timeout"


def _solver_class(backend):
    try:
        return SOLVER_MAP[backend]
    except KeyError:
        raise SolverException(
            "invalid backend {!r}; choose from {}".format(
                backend, sorted(SOLVER_MAP)
            )
        )


def run_preprocess(
    inst, config, all_checks=False, logger=logging.getLogger(__name__)
):
    """The report a solve under `config` works with."""
    return preprocess(
        inst,
        use_checks=config.use_checks,
        use_domain_reduction=config.use_domain_reduction,
        use_symmetry=config.use_symmetry,
        use_valid_inequalities=config.use_valid_inequalities,
        vi_form=config.vi_form,
        all_checks=all_checks,
        stable_set_cap=config.stable_set_cap,
        logger=logger,
    )


def solve(
    inst,
    config=None,
    backend="propagation",
    report=None,
    logger=logging.getLogger(__name__),
):
    """
    Preprocesses the instance and searches for orders.

    Arguments:
        "inst": the Instance.
        "config": a SolveConfig; defaults to SolveConfig().
        "backend": a key of SOLVER_MAP.
        "report": a PreprocessReport for this instance; computed from the
            config when omitted.

    An infeasibility proven by preprocessing is returned without search,
    with zero choice points and the firing check in the statistics.
    """
    config = (config or SolveConfig())._check_inputs()
    solver_class = _solver_class(backend)
    start = time.perf_counter()

    if report is None:
        report = run_preprocess(inst, config, logger=logger)
    elif len(report.rank_domains) != inst.n:
        raise SolverException(
            "report covers {} vertices, instance has {}".format(
                len(report.rank_domains), inst.n
            )
        )

    if report.infeasible:
        return SolveOutcome(
            status=SolveStatus.INFEASIBLE,
            orders=(),
            count=0,
            truncated=False,
            stats=SolveStats(
                choice_points=0,
                fails=0,
                propagations=0,
                time_us=int((time.perf_counter() - start) * 1e6),
                check=report.verdict.check,
            ),
        )

    solver = solver_class(inst, config, report, logger=logger)
    outcome = solver.solve()
    elapsed = int((time.perf_counter() - start) * 1e6)
    return outcome._replace(stats=outcome.stats._replace(time_us=elapsed))


class Orderer:
    """
    Main class that coordinates preprocessing and a solver for one graph.
    `run()` never raises: failures end up in the status.
    """

    def __init__(
        self,
        graph,
        k,
        config=None,
        backend="propagation",
        on_set_status=None,
        logger=logging.getLogger(__name__),
    ):
        self.graph = graph
        self.k = k
        self.config = config or SolveConfig()
        self.backend = backend
        self.on_set_status = on_set_status
        self.logger = logger

        self.report = None
        self.outcome = None
        self.message = None
        self.status = OrdererStatus.INITIALIZED.value

    def set_status(self, status, message=None):
        self.status = status.value
        self.message = message
        self.logger.info(
            "status={0}, message={1}".format(status.value, message)
        )
        if self.on_set_status:
            self.on_set_status(status, message)

    def get_status(self):
        return self.status

    def run(self):
        """
        Solves the instance and records the outcome; the status ends as
        Complete, No Solution, Timeout or Error.
        """
        try:
            self.set_status(OrdererStatus.RUNNING)
            inst = Instance(self.graph, self.k)
            config = self.config._check_inputs()

            self.logger.debug("Start preprocessing")
            self.report = run_preprocess(inst, config, logger=self.logger)

            start_time = time.time()
            self.logger.debug("Solving with {}".format(self.backend))
            self.outcome = solve(
                inst,
                config,
                backend=self.backend,
                report=self.report,
                logger=self.logger,
            )
            self.logger.debug(
                "Complete solver run took {} seconds".format(
                    time.time() - start_time
                )
            )

            if self.outcome.status == SolveStatus.FEASIBLE:
                self.set_status(
                    OrdererStatus.COMPLETE,
                    message="found {} order(s)".format(self.outcome.count),
                )
            elif self.outcome.status == SolveStatus.INFEASIBLE:
                self.set_status(
                    OrdererStatus.NO_SOLUTION,
                    message=self.report.verdict.detail or "search exhausted",
                )
            else:
                self.set_status(
                    OrdererStatus.TIMEOUT,
                    message="time limit {} s reached".format(
                        self.config.time_limit
                    ),
                )

        except SolverException as error_handle:
            self.logger.debug("Solver error={}".format(error_handle))
            self.set_status(OrdererStatus.ERROR, message=str(error_handle))
        except Exception as error_handle:
            self.logger.debug("Error={}".format(error_handle))
            self.set_status(OrdererStatus.ERROR, message=str(error_handle))
