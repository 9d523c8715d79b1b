"""
CLI interface for the CTOP solver suite

    python -m ctop gen random --n 20 --density 0.7 --seed 1 --out g.ctop
    python -m ctop gen wheel --n 7 --out w7.ctop
    python -m ctop check g.ctop --k 3
    python -m ctop solve g.ctop --k 3 [--all | --count]
    python -m ctop verify g.ctop --k 3 --order 0 1 2 ...
    python -m ctop enumerate g.ctop --k 3
    python -m ctop bench instances/ --k 3 --out results/

Exit codes: 0 feasible or success, 1 infeasible, 2 timeout, 64 usage
error, 65 data error.
"""

import argparse
import logging
import logging.handlers
import sys

from .bench import BenchError, default_matrix, run_bench, summarize
from .config import load_config
from .core import SOLVER_MAP, solve
from .graph import GraphError
from .instance_io import (
    GenSpec,
    InstanceFormatError,
    generate,
    read_instance,
    serialize,
    write_instance,
)
from .oracle import Instance, OracleError, enumerate_orders, verify_order
from .preprocess import CHECK_NUMBERS, PreprocessError, run_checks
from .solvers import (
    Branching,
    ModelKind,
    Mode,
    SolveConfig,
    SolverException,
    SolveStatus,
)

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_TIMEOUT = 2
EXIT_USAGE = 64
EXIT_DATA = 65

STATUS_EXIT = {
    SolveStatus.FEASIBLE: EXIT_OK,
    SolveStatus.INFEASIBLE: EXIT_INFEASIBLE,
    SolveStatus.TIMEOUT: EXIT_TIMEOUT,
}

LOG_FORMAT = "%(asctime)s %(levelname)s: [in %(pathname)s:%(lineno)d] %(message)s"

USAGE_ERRORS = (
    GraphError,
    OracleError,
    PreprocessError,
    SolverException,
    BenchError,
)


class UsageError(Exception):
    """Exception wrapper class for command line usage errors"""

    pass


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def configure_logger(log_file, level="INFO", verbose=False):
    """
    Configures the package logger: a rotating file handler on `log_file`
    and a stderr handler (WARNING, or DEBUG with --verbose).
    """
    logger = logging.getLogger("ctop")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    formatter = logging.Formatter(LOG_FORMAT)

    if log_file:
        file_handler = logging.handlers.RotatingFileHandler(
            filename=log_file,
            mode="a",
            maxBytes=1 * 1000 * 1000,
            backupCount=20,
        )
        file_handler.setFormatter(formatter)
        file_handler.setLevel(level)
        logger.addHandler(file_handler)

    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(formatter)
    stream_handler.setLevel(logging.DEBUG if verbose else logging.WARNING)
    logger.addHandler(stream_handler)

    logger.setLevel(logging.DEBUG)
    logger.propagate = False
    return logger


def _format_order(order):
    return " ".join(str(v) for v in order)


def _or_default(value, config, key):
    return value if value is not None else config[key]


def _instance(args, config):
    k = _or_default(args.k, config, "DEFAULT_K")
    return Instance(read_instance(args.instance), k)


def cmd_gen(args, config, logger):
    if args.family == "random":
        spec = GenSpec(
            family="random",
            n=args.n,
            density=args.density,
            m=args.m,
            seed=args.seed,
        )
        comment = "random n={} m={} seed={}".format(
            spec.n, spec.edge_count, spec.seed
        )
    else:
        spec = GenSpec(family="wheel", n=args.n)
        comment = "wheel n={}".format(spec.n)
    graph = generate(spec, logger=logger)

    if args.out:
        write_instance(args.out, graph, comments=[comment])
        print("wrote {} (n={}, m={})".format(args.out, graph.n, graph.m))
    else:
        sys.stdout.write(serialize(graph, comments=[comment]))
    return EXIT_OK


def cmd_check(args, config, logger):
    inst = _instance(args, config)
    fired = run_checks(
        inst,
        first_hit=False,
        stable_set_cap=config["STABLE_SET_CAP"],
        logger=logger,
    )
    for verdict in fired:
        print(
            "Check {} ({}): {}".format(
                CHECK_NUMBERS[verdict.check], verdict.check, verdict.detail
            )
        )
    if not fired:
        print("no check fired")
        return EXIT_OK
    return EXIT_INFEASIBLE


def _solve_config(args, config):
    if args.all:
        mode = Mode.ENUMERATE_ALL
    elif args.count:
        mode = Mode.COUNT
    else:
        mode = Mode.FIND_ONE
    return SolveConfig(
        model=args.model,
        use_checks=not args.no_checks,
        use_domain_reduction=not args.no_domain_reduction,
        use_symmetry=not args.no_symmetry,
        use_valid_inequalities=args.vi != "off",
        vi_form=args.vi if args.vi != "off" else "span",
        time_limit=_or_default(args.time_limit, config, "TIME_LIMIT"),
        mode=mode,
        limit=_or_default(args.limit, config, "ENUMERATION_LIMIT"),
        branching=args.branching,
        hall_intervals=args.hall,
        stable_set_cap=config["STABLE_SET_CAP"],
    )


def cmd_solve(args, config, logger):
    inst = _instance(args, config)
    solve_config = _solve_config(args, config)
    outcome = solve(inst, solve_config, backend=args.backend, logger=logger)

    print("status: {}".format(outcome.status.value))
    if solve_config.mode == Mode.FIND_ONE:
        if outcome.order is not None:
            print("order: {}".format(_format_order(outcome.order)))
    else:
        print("count: {}".format(outcome.count))
        if outcome.truncated:
            print("truncated: limit {} reached".format(solve_config.limit))
        if solve_config.mode == Mode.ENUMERATE_ALL:
            for order in outcome.orders:
                print(_format_order(order))
    if outcome.stats.check:
        print("check: {}".format(outcome.stats.check))
    print(
        "choice_points={} fails={} time_ms={:.3f}".format(
            outcome.stats.choice_points,
            outcome.stats.fails,
            outcome.stats.time_us / 1000.0,
        )
    )
    return STATUS_EXIT[outcome.status]


def cmd_verify(args, config, logger):
    inst = _instance(args, config)
    if verify_order(inst, args.order):
        print("valid")
        return EXIT_OK
    print("invalid")
    return EXIT_INFEASIBLE


def cmd_enumerate(args, config, logger):
    inst = _instance(args, config)
    enumeration = enumerate_orders(
        inst,
        limit=_or_default(args.limit, config, "ENUMERATION_LIMIT"),
        warn_n=config["ORACLE_WARN_N"],
        logger=logger,
    )
    print("count: {}".format(enumeration.count))
    if enumeration.truncated:
        print("truncated: limit reached")
    for order in enumeration.orders:
        print(_format_order(order))
    return EXIT_OK if enumeration.count else EXIT_INFEASIBLE


def cmd_bench(args, config, logger):
    k = _or_default(args.k, config, "DEFAULT_K")
    matrix = default_matrix(
        models=args.models.split(","), flag_sets=args.flags.split(",")
    )
    records = run_bench(
        args.directory,
        k=k,
        matrix=matrix,
        time_limit=_or_default(args.time_limit, config, "TIME_LIMIT"),
        out_dir=args.out,
        workers=_or_default(args.workers, config, "BENCH_WORKERS"),
        backend=args.backend,
        profile_points=config["PROFILE_POINTS"],
        timeout_grace=config["TIMEOUT_GRACE"],
        logger=logger,
    )
    for name, counts in summarize(records).items():
        print(
            "{}: {}".format(
                name,
                " ".join(
                    "{}={}".format(status, counts[status])
                    for status in sorted(counts)
                ),
            )
        )
    return EXIT_OK


def _add_instance_arguments(parser):
    parser.add_argument("instance", help="instance file in the p ctop format")
    parser.add_argument("--k", type=int, help="dimension K (default from config)")


def build_parser():
    parser = ArgumentParser(prog="ctop")
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--env", help="configuration overlay name")
    parser.add_argument("--log-file", help="overrides LOG_FILE")
    commands = parser.add_subparsers(dest="command", parser_class=ArgumentParser)
    commands.required = True

    gen = commands.add_parser("gen", help="generate an instance")
    gen.add_argument("family", choices=["random", "wheel"])
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--density", type=float)
    gen.add_argument("--m", type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", help="output file (stdout when omitted)")
    gen.set_defaults(handler=cmd_gen)

    check = commands.add_parser("check", help="run every infeasibility check")
    _add_instance_arguments(check)
    check.set_defaults(handler=cmd_check)

    solve_parser = commands.add_parser("solve", help="search for orders")
    _add_instance_arguments(solve_parser)
    solve_parser.add_argument(
        "--model",
        choices=[kind.value for kind in ModelKind],
        default=ModelKind.COMBINED.value,
    )
    solve_parser.add_argument(
        "--backend", choices=sorted(SOLVER_MAP), default="propagation"
    )
    solve_parser.add_argument(
        "--branching", choices=[b.value for b in Branching], default=None
    )
    solve_parser.add_argument("--time-limit", type=float)
    modes = solve_parser.add_mutually_exclusive_group()
    modes.add_argument(
        "--all", action="store_true", help="enumerate every order"
    )
    modes.add_argument("--count", action="store_true", help="count orders")
    solve_parser.add_argument("--limit", type=int, help="enumeration limit")
    solve_parser.add_argument("--no-checks", action="store_true")
    solve_parser.add_argument("--no-domain-reduction", action="store_true")
    solve_parser.add_argument("--no-symmetry", action="store_true")
    solve_parser.add_argument(
        "--vi", choices=["span", "pairwise", "off"], default="off"
    )
    solve_parser.add_argument(
        "--hall", action="store_true", help="Hall-interval all-different"
    )
    solve_parser.set_defaults(handler=cmd_solve)

    verify = commands.add_parser("verify", help="check a claimed order")
    _add_instance_arguments(verify)
    verify.add_argument("--order", type=int, nargs="+", required=True)
    verify.set_defaults(handler=cmd_verify)

    enumerate_parser = commands.add_parser(
        "enumerate", help="brute-force every order"
    )
    _add_instance_arguments(enumerate_parser)
    enumerate_parser.add_argument("--limit", type=int)
    enumerate_parser.set_defaults(handler=cmd_enumerate)

    bench = commands.add_parser("bench", help="run a benchmark matrix")
    bench.add_argument("directory")
    bench.add_argument("--k", type=int)
    bench.add_argument("--models", default="rank,vertex,combined")
    bench.add_argument("--flags", default="all")
    bench.add_argument("--time-limit", type=float)
    bench.add_argument("--workers", type=int)
    bench.add_argument(
        "--backend", choices=sorted(SOLVER_MAP), default="propagation"
    )
    bench.add_argument("--out", help="directory for CSV, JSONL and profile")
    bench.set_defaults(handler=cmd_bench)

    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        overrides = {"LOG_FILE": args.log_file} if args.log_file else None
        config = load_config(env=args.env, overrides=overrides)
        logger = configure_logger(
            config["LOG_FILE"], level=config["LOG_LEVEL"], verbose=args.verbose
        )
        logger.info("Running command={}".format(args.command))
        return args.handler(args, config, logger)
    except UsageError as error_handle:
        print("usage error: {}".format(error_handle), file=sys.stderr)
        return EXIT_USAGE
    except USAGE_ERRORS as error_handle:
        print("error: {}".format(error_handle), file=sys.stderr)
        return EXIT_USAGE
    except (InstanceFormatError, OSError) as error_handle:
        print("data error: {}".format(error_handle), file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
