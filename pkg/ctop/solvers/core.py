from collections import namedtuple
from enum import Enum

DEFAULT_TIME_LIMIT = 60.0
DEFAULT_ENUMERATION_LIMIT = 100000
TIMEOUT_CHECK_INTERVAL = 1024


class SolverException(Exception):
    """Exception wrapper class for errors related to the order solvers"""

    pass


class ModelKind(Enum):
    RANK = "rank"
    VERTEX = "vertex"
    COMBINED = "combined"


class Mode(Enum):
    FIND_ONE = "find-one"
    ENUMERATE_ALL = "enumerate-all"
    COUNT = "count"


class Branching(Enum):
    POSITION_SEQUENTIAL = "position"
    MIN_DOMAIN = "min-domain"


class SolveStatus(Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    TIMEOUT = "Timeout"


VI_FORMS = ("span", "pairwise")


def _as_enum(enum_class, value, field):
    if isinstance(value, enum_class):
        return value
    try:
        return enum_class(value)
    except ValueError:
        raise SolverException(
            "invalid {} {!r}; choose from {}".format(
                field, value, [member.value for member in enum_class]
            )
        )


class SolveConfig(
    namedtuple(
        "SolveConfig",
        [
            "model",
            "use_checks",
            "use_domain_reduction",
            "use_symmetry",
            "use_valid_inequalities",
            "vi_form",
            "time_limit",
            "mode",
            "limit",
            "branching",
            "hall_intervals",
            "stable_set_cap",
        ],
    )
):
    """
    Knobs for one solve.

    Arguments:
        "model": ModelKind (or its value). Defaults to the combined model.
        "use_checks", "use_domain_reduction", "use_symmetry",
        "use_valid_inequalities": which preprocessing results reach the
            model. Valid inequalities are off unless asked for.
        "vi_form": "span" or "pairwise".
        "time_limit": seconds, positive.
        "mode": Mode. ENUMERATE_ALL keeps at most `limit` orders.
        "branching": Branching, or None for the model's default
            (MIN_DOMAIN for the rank model, POSITION_SEQUENTIAL otherwise).
        "hall_intervals": adds Hall-interval reasoning to the
            all-different constraints.
        "stable_set_cap": cap on maximal stable set enumeration.
    """

    __slots__ = ()

    def __new__(
        cls,
        model=ModelKind.COMBINED,
        use_checks=True,
        use_domain_reduction=True,
        use_symmetry=True,
        use_valid_inequalities=False,
        vi_form="span",
        time_limit=DEFAULT_TIME_LIMIT,
        mode=Mode.FIND_ONE,
        limit=DEFAULT_ENUMERATION_LIMIT,
        branching=None,
        hall_intervals=False,
        stable_set_cap=10000,
    ):
        model = _as_enum(ModelKind, model, "model")
        mode = _as_enum(Mode, mode, "mode")
        if branching is None:
            branching = (
                Branching.MIN_DOMAIN
                if model == ModelKind.RANK
                else Branching.POSITION_SEQUENTIAL
            )
        branching = _as_enum(Branching, branching, "branching")
        return super().__new__(
            cls,
            model,
            bool(use_checks),
            bool(use_domain_reduction),
            bool(use_symmetry),
            bool(use_valid_inequalities),
            vi_form,
            time_limit,
            mode,
            limit,
            branching,
            bool(hall_intervals),
            stable_set_cap,
        )

    def _check_inputs(self):
        if self.vi_form not in VI_FORMS:
            raise SolverException(
                "invalid vi_form {!r}; choose from {}".format(
                    self.vi_form, VI_FORMS
                )
            )
        if not self.time_limit or self.time_limit <= 0:
            raise SolverException(
                "time limit must be positive, got {}".format(self.time_limit)
            )
        if self.mode == Mode.ENUMERATE_ALL and (
            self.limit is None or self.limit < 1
        ):
            raise SolverException(
                "enumeration limit must be at least 1, got {}".format(
                    self.limit
                )
            )
        if self.stable_set_cap < 1:
            raise SolverException(
                "stable set cap must be at least 1, got {}".format(
                    self.stable_set_cap
                )
            )
        return self


SolveStats = namedtuple(
    "SolveStats",
    ["choice_points", "fails", "propagations", "time_us", "check"],
)


class SolveOutcome(
    namedtuple("SolveOutcome", ["status", "orders", "count", "truncated", "stats"])
):
    """
    Result of one solve. `orders` holds every order found in ENUMERATE_ALL
    mode and the first one otherwise; `count` is the number of orders found.
    """

    __slots__ = ()

    @property
    def order(self):
        return self.orders[0] if self.orders else None

    @property
    def feasible(self):
        return self.status == SolveStatus.FEASIBLE
