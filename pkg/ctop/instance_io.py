"""
Instance persistence and generation.

Instance files are UTF-8 text:

    # comment lines may appear anywhere
    p ctop <n> <m>
    e <u> <v>            (exactly m edge lines, vertices 0-indexed)

K is not stored in the file; one graph is solved at several dimensions.
Headers declaring more than MAX_VERTICES vertices are rejected before any
graph is built.

Random graphs follow the G(n, M) model: exactly M edges drawn uniformly
without replacement from the C(n, 2) vertex pairs, using a partial
Fisher-Yates shuffle over the pair indices (pairs numbered in
lexicographic order). Draws come from the raw 64-bit output of NumPy's
PCG64 bit generator seeded with GenSpec.seed, reduced to a range by
rejection sampling, so a seed fixes the graph across NumPy versions.
"""

import itertools
import json
import logging
import os
import tempfile
from collections import namedtuple
from decimal import ROUND_HALF_UP, Decimal

import networkx as nx
import numpy as np

from .graph import Graph, GraphError

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")

FAMILIES = ("random", "wheel", "fixture")
MAX_VERTICES = 5000

FixtureCase = namedtuple("FixtureCase", ["k", "status", "count", "check"])
Fixture = namedtuple("Fixture", ["name", "graph", "cases"])


class InstanceFormatError(Exception):
    """Exception wrapper class for malformed instance files"""

    def __init__(self, message, lineno=None, reason="malformed"):
        self.lineno = lineno
        self.reason = reason
        if lineno is not None:
            message = "line {}: {}".format(lineno, message)
        super().__init__(message)


def _parse_count(token, lineno):
    try:
        value = int(token)
    except ValueError:
        raise InstanceFormatError(
            "expected an integer, got {!r}".format(token), lineno
        )
    if value < 0:
        raise InstanceFormatError(
            "expected a nonnegative integer, got {}".format(value), lineno
        )
    return value


def parse(text):
    """Parses instance text into a Graph; raises InstanceFormatError."""
    header = None
    header_lineno = None
    edges = []
    first_seen = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()

        if header is None:
            if len(fields) != 4 or fields[:2] != ["p", "ctop"]:
                raise InstanceFormatError(
                    "expected header 'p ctop <n> <m>', got {!r}".format(line),
                    lineno,
                )
            header = (
                _parse_count(fields[2], lineno),
                _parse_count(fields[3], lineno),
            )
            if header[0] > MAX_VERTICES:
                raise InstanceFormatError(
                    "n={} exceeds the limit of {} vertices".format(
                        header[0], MAX_VERTICES
                    ),
                    lineno,
                    reason="too_large",
                )
            header_lineno = lineno
            continue

        if len(fields) != 3 or fields[0] != "e":
            raise InstanceFormatError(
                "expected edge line 'e <u> <v>', got {!r}".format(line), lineno
            )
        u = _parse_count(fields[1], lineno)
        v = _parse_count(fields[2], lineno)
        n = header[0]
        if u == v:
            raise InstanceFormatError(
                "self-loop on vertex {}".format(u), lineno, reason="self_loop"
            )
        if u >= n or v >= n:
            raise InstanceFormatError(
                "edge ({}, {}) out of range for n={}".format(u, v, n),
                lineno,
                reason="out_of_range",
            )
        pair = (min(u, v), max(u, v))
        if pair in first_seen:
            raise InstanceFormatError(
                "duplicate edge {} {} (first listed on line {})".format(
                    pair[0], pair[1], first_seen[pair]
                ),
                lineno,
                reason="duplicate_edge",
            )
        first_seen[pair] = lineno
        edges.append(pair)

    if header is None:
        raise InstanceFormatError(
            "missing 'p ctop <n> <m>' header", reason="missing_header"
        )
    if len(edges) != header[1]:
        raise InstanceFormatError(
            "header declares {} edges but {} are listed".format(
                header[1], len(edges)
            ),
            header_lineno,
            reason="count_mismatch",
        )
    return Graph(header[0], edges)


def serialize(graph, comments=()):
    """Canonical text: comments, header, then edges sorted with u < v."""
    lines = ["# {}".format(comment) for comment in comments]
    lines.append("p ctop {} {}".format(graph.n, graph.m))
    lines.extend("e {} {}".format(u, v) for u, v in graph.edges)
    return "\n".join(lines) + "\n"


def atomic_write(path, text):
    """Writes text next to `path` under a temporary name, then renames."""
    directory = os.path.dirname(os.path.abspath(path))
    handle, temp_path = tempfile.mkstemp(
        dir=directory, prefix=".", suffix=".tmp"
    )
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as stream:
            stream.write(text)
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.unlink(temp_path)
        raise


def read_instance(path):
    with open(path, "rb") as stream:
        data = stream.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as error_handle:
        raise InstanceFormatError(
            "invalid UTF-8 byte 0x{:02x}".format(data[error_handle.start]),
            data.count(b"\n", 0, error_handle.start) + 1,
            reason="encoding",
        )
    return parse(text)


def write_instance(path, graph, comments=()):
    atomic_write(path, serialize(graph, comments))


class GenSpec(
    namedtuple("GenSpec", ["family", "n", "density", "m", "seed", "name"])
):
    """
    What to generate.

    Arguments:
        "family": "random", "wheel" or "fixture".
        "n": vertex count (random, wheel).
        "density": edge density D in (0, 1] (random; exclusive with m).
        "m": edge count (random; exclusive with density).
        "seed": 64-bit seed (random).
        "name": fixture name (fixture).
    """

    __slots__ = ()

    def __new__(
        cls, family="random", n=None, density=None, m=None, seed=0, name=None
    ):
        if family not in FAMILIES:
            raise GraphError(
                "unknown family {!r}; choose from {}".format(family, FAMILIES)
            )
        if family == "random":
            if (density is None) == (m is None):
                raise GraphError("give exactly one of density and m")
            if density is not None and not (0 < density <= 1):
                raise GraphError(
                    "density must lie in (0, 1], got {}".format(density)
                )
            if not (0 <= int(seed) < 1 << 64):
                raise GraphError("seed must be a 64-bit unsigned value")
        if family in ("random", "wheel") and (n is None or n < 1):
            raise GraphError("n must be a positive vertex count")
        if family == "fixture" and not name:
            raise GraphError("fixture family needs a name")
        return super().__new__(cls, family, n, density, m, int(seed), name)

    @property
    def edge_count(self):
        if self.m is not None:
            return self.m
        return density_to_edges(self.n, self.density)


def density_to_edges(n, density):
    """round(D * n(n-1)/2), halves rounded away from zero."""
    pairs = n * (n - 1) // 2
    exact = Decimal(str(density)) * pairs
    return int(exact.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def _bounded(bit_generator, bound):
    """Uniform integer in [0, bound) from raw 64-bit draws."""
    span = 1 << 64
    limit = span - span % bound
    while True:
        draw = int(bit_generator.random_raw())
        if draw < limit:
            return draw % bound


def gen_random(spec, logger=logging.getLogger(__name__)):
    """A seeded G(n, M) graph with exactly spec.edge_count edges."""
    n = spec.n
    m = spec.edge_count
    pairs = list(itertools.combinations(range(n), 2))
    if not (0 <= m <= len(pairs)):
        raise GraphError(
            "cannot place {} edges on {} vertices (max {})".format(
                m, n, len(pairs)
            )
        )

    bit_generator = np.random.PCG64(spec.seed)
    indices = list(range(len(pairs)))
    for i in range(m):
        j = i + _bounded(bit_generator, len(pairs) - i)
        indices[i], indices[j] = indices[j], indices[i]

    graph = Graph(n, (pairs[index] for index in indices[:m]))
    if n > 1 and not nx.is_connected(graph.to_networkx()):
        logger.warning(
            "Generated graph (n={}, m={}, seed={}) is disconnected".format(
                n, m, spec.seed
            )
        )
    return graph


def gen_wheel(n):
    """Hub 0 joined to the cycle 1..n-1."""
    if n < 4:
        raise GraphError("a wheel needs at least 4 vertices, got {}".format(n))
    spokes = [(0, v) for v in range(1, n)]
    rim = [(v, v + 1) for v in range(1, n - 1)] + [(1, n - 1)]
    return Graph(n, spokes + rim)


def generate(spec, logger=logging.getLogger(__name__)):
    if spec.family == "random":
        return gen_random(spec, logger=logger)
    if spec.family == "wheel":
        return gen_wheel(spec.n)
    return load_fixture(spec.name).graph


def _read_expect(path):
    with open(path, encoding="utf-8") as stream:
        payload = json.load(stream)
    return tuple(
        FixtureCase(
            k=case["k"],
            status=case["status"],
            count=case.get("count"),
            check=case.get("check"),
        )
        for case in payload["cases"]
    )


def load_fixture(name, directory=FIXTURE_DIR):
    path = os.path.join(directory, "{}.ctop".format(name))
    if not os.path.exists(path):
        raise GraphError("no fixture named {!r}".format(name))
    expect_path = os.path.join(directory, "{}.expect".format(name))
    cases = _read_expect(expect_path) if os.path.exists(expect_path) else ()
    return Fixture(name=name, graph=read_instance(path), cases=cases)


def fixtures(directory=FIXTURE_DIR):
    """Every fixture in `directory`, keyed by name."""
    names = sorted(
        filename[: -len(".ctop")]
        for filename in os.listdir(directory)
        if filename.endswith(".ctop")
    )
    return {name: load_fixture(name, directory) for name in names}
