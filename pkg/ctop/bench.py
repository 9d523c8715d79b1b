"""
Benchmark harness.

Runs a matrix of solve configurations over every instance file of a
directory and writes:

    runs.csv       one row per (instance, configuration), columns CSV_FIELDS
    runs.jsonl     the same records, one JSON object per line
    profile.csv    performance profile, columns config,time_s,fraction
    metadata.json  timestamps, host, worker count and the fraction of each
                   configuration solved within the time limit

Instances run concurrently in a process pool; records come back in
instance order, then matrix order, whatever the completion order. Every
column except time_ms is reproducible run to run.
"""

import csv
import datetime
import glob
import json
import logging
import os
import platform
from collections import Counter, OrderedDict, namedtuple
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import psutil

from .core import Orderer
from .instance_io import InstanceFormatError, atomic_write, read_instance
from .solvers import ModelKind, SolveConfig

CSV_FIELDS = [
    "instance",
    "n",
    "m",
    "density",
    "k",
    "model",
    "checks",
    "domred",
    "sym",
    "vi",
    "status",
    "time_ms",
    "choice_points",
    "fails",
    "fired_check",
]
PROFILE_FIELDS = ["config", "time_s", "fraction"]

SOLVED = ("Feasible", "Infeasible")
DATA_ERROR = "DataError"
ERROR = "Error"

RunRecord = namedtuple("RunRecord", CSV_FIELDS)
ProfilePoint = namedtuple("ProfilePoint", PROFILE_FIELDS)
BenchConfig = namedtuple("BenchConfig", ["model", "checks", "domred", "sym", "vi"])
BenchTask = namedtuple(
    "BenchTask", ["path", "k", "config", "time_limit", "backend"]
)

FLAG_SETS = OrderedDict(
    [
        ("all", (True, True, True, "off")),
        ("none", (False, False, False, "off")),
        ("vi", (True, True, True, "span")),
    ]
)


class BenchError(Exception):
    """Exception wrapper class for errors related to the benchmark harness"""

    pass


def _parse_bool(text):
    return text == "True"


FIELD_TYPES = {
    "instance": str,
    "n": int,
    "m": int,
    "density": float,
    "k": int,
    "model": str,
    "checks": _parse_bool,
    "domred": _parse_bool,
    "sym": _parse_bool,
    "vi": str,
    "status": str,
    "time_ms": float,
    "choice_points": int,
    "fails": int,
    "fired_check": str,
}


def default_matrix(models=("rank", "vertex", "combined"), flag_sets=("all",)):
    """Every model crossed with every named flag set."""
    matrix = []
    for model in models:
        if model not in [kind.value for kind in ModelKind]:
            raise BenchError("unknown model {!r}".format(model))
        for name in flag_sets:
            if name not in FLAG_SETS:
                raise BenchError(
                    "unknown flag set {!r}; choose from {}".format(
                        name, list(FLAG_SETS)
                    )
                )
            matrix.append(BenchConfig(model, *FLAG_SETS[name]))
    return matrix


def config_name(record):
    flags = [
        name
        for name, enabled in (
            ("checks", record.checks),
            ("domred", record.domred),
            ("sym", record.sym),
        )
        if enabled
    ]
    if record.vi != "off":
        flags.append("vi-{}".format(record.vi))
    return "{}[{}]".format(record.model, "+".join(flags) or "none")


def available_workers():
    """CPUs this process may run on."""
    try:
        return len(psutil.Process().cpu_affinity())
    except (AttributeError, psutil.Error):
        return psutil.cpu_count() or 1


def _instance_id(path):
    return os.path.splitext(os.path.basename(path))[0]


def run_task(task):
    """Solves one instance under one configuration; never raises."""
    logger = logging.getLogger(__name__)
    config = task.config
    blank = dict(
        instance=_instance_id(task.path),
        k=task.k,
        model=config.model,
        checks=config.checks,
        domred=config.domred,
        sym=config.sym,
        vi=config.vi,
        choice_points=0,
        fails=0,
    )

    try:
        graph = read_instance(task.path)
    except (InstanceFormatError, OSError) as error_handle:
        logger.warning("Skipping {}: {}".format(task.path, error_handle))
        return RunRecord(
            n=0,
            m=0,
            density=0.0,
            status=DATA_ERROR,
            time_ms=0.0,
            fired_check="",
            **blank
        )

    pairs = graph.n * (graph.n - 1) // 2
    density = round(graph.m / pairs, 6) if pairs else 0.0
    solve_config = SolveConfig(
        model=config.model,
        use_checks=config.checks,
        use_domain_reduction=config.domred,
        use_symmetry=config.sym,
        use_valid_inequalities=config.vi != "off",
        vi_form=config.vi if config.vi != "off" else "span",
        time_limit=task.time_limit,
    )
    orderer = Orderer(
        graph, task.k, config=solve_config, backend=task.backend, logger=logger
    )
    orderer.run()

    outcome = orderer.outcome
    if outcome is None:
        return RunRecord(
            n=graph.n,
            m=graph.m,
            density=density,
            status=ERROR,
            time_ms=0.0,
            fired_check="",
            **blank
        )
    blank.update(
        choice_points=outcome.stats.choice_points, fails=outcome.stats.fails
    )
    return RunRecord(
        n=graph.n,
        m=graph.m,
        density=density,
        status=outcome.status.value,
        time_ms=round(outcome.stats.time_us / 1000.0, 3),
        fired_check=outcome.stats.check or "",
        **blank
    )


def write_csv(records, path):
    with open(path, "w", newline="", encoding="utf-8") as stream:
        writer = csv.DictWriter(stream, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for record in records:
            writer.writerow(record._asdict())


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as stream:
        return [
            RunRecord(
                **{field: FIELD_TYPES[field](row[field]) for field in CSV_FIELDS}
            )
            for row in csv.DictReader(stream)
        ]


def write_jsonl(records, path):
    lines = [json.dumps(record._asdict(), sort_keys=True) for record in records]
    atomic_write(path, "".join(line + "\n" for line in lines))


def profile_grid(records, points=50, time_limit=None):
    """Log-spaced times from 1 ms to the time limit (or the slowest run)."""
    top = time_limit
    if top is None:
        top = max((r.time_ms / 1000.0 for r in records), default=1e-3)
    top = max(top, 1e-3)
    return np.logspace(-3, np.log10(top), num=points)


def emit_profile(records, grid):
    """
    Fraction of each configuration's instances solved (Feasible or
    Infeasible) within every grid time.
    """
    records = list(records)
    if not records:
        raise BenchError("cannot build a profile from no records")

    by_config = OrderedDict()
    for record in sorted(records, key=config_name):
        by_config.setdefault(config_name(record), []).append(record)

    points = []
    for name, group in by_config.items():
        solved_times = np.array(
            [r.time_ms / 1000.0 for r in group if r.status in SOLVED]
        )
        for t in grid:
            solved = int(np.count_nonzero(solved_times <= t))
            points.append(
                ProfilePoint(
                    config=name,
                    time_s=float(t),
                    fraction=solved / len(group),
                )
            )
    return points


def fraction_at_limit(records, time_limit):
    """Fraction of each configuration's instances solved within the limit."""
    return OrderedDict(
        (point.config, point.fraction)
        for point in emit_profile(records, [time_limit])
    )


def write_profile(points, path):
    with open(path, "w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream)
        writer.writerow(PROFILE_FIELDS)
        for point in points:
            writer.writerow(
                [point.config, repr(point.time_s), repr(point.fraction)]
            )


def summarize(records):
    """Status counts per configuration."""
    summary = OrderedDict()
    for record in sorted(records, key=config_name):
        summary.setdefault(config_name(record), Counter())[record.status] += 1
    return summary


def instance_paths(directory):
    paths = sorted(glob.glob(os.path.join(directory, "*.ctop")))
    if not paths:
        raise BenchError("no .ctop files in {}".format(directory))
    return paths


def run_bench(
    directory,
    k=3,
    matrix=None,
    time_limit=60.0,
    out_dir=None,
    workers=None,
    backend="propagation",
    profile_points=50,
    timeout_grace=5.0,
    logger=logging.getLogger(__name__),
):
    """
    Runs every configuration of `matrix` on every instance of `directory`
    and returns the records in instance order. When `out_dir` is given the
    record, profile and metadata files are written there.
    """
    if time_limit is None or time_limit <= 0:
        raise BenchError(
            "time limit must be positive, got {}".format(time_limit)
        )
    if workers is not None and workers < 1:
        raise BenchError("need at least one worker, got {}".format(workers))
    matrix = matrix or default_matrix()
    paths = instance_paths(directory)
    if workers is None:
        workers = available_workers()
    tasks = [
        BenchTask(path, k, config, time_limit, backend)
        for path in paths
        for config in matrix
    ]
    logger.info(
        "Running {} tasks ({} instances x {} configurations) on {} workers".format(
            len(tasks), len(paths), len(matrix), workers
        )
    )

    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    if workers == 1:
        records = [run_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            records = list(executor.map(run_task, tasks))
    finished = datetime.datetime.now(datetime.timezone.utc).isoformat()

    overdue = (time_limit + timeout_grace) * 1000.0
    for record in records:
        if record.time_ms > overdue:
            logger.warning(
                "{} ({}) took {} ms, past the {} s limit and grace".format(
                    record.instance,
                    config_name(record),
                    record.time_ms,
                    time_limit,
                )
            )

    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        write_csv(records, os.path.join(out_dir, "runs.csv"))
        write_jsonl(records, os.path.join(out_dir, "runs.jsonl"))
        grid = profile_grid(records, points=profile_points, time_limit=time_limit)
        write_profile(
            emit_profile(records, grid), os.path.join(out_dir, "profile.csv")
        )
        metadata = {
            "started": started,
            "finished": finished,
            "host": platform.node(),
            "workers": workers,
            "backend": backend,
            "time_limit": time_limit,
            "timeout_grace": timeout_grace,
            "k": k,
            "instances": len(paths),
            "solved_at_limit": fraction_at_limit(records, time_limit),
        }
        atomic_write(
            os.path.join(out_dir, "metadata.json"),
            json.dumps(metadata, sort_keys=True, indent=2) + "\n",
        )
    return records
