import itertools

import numpy as np
import pytest

from nsbox.boxcore import ConditionalBox, make_isotropic, mix


def bits(idx, n):
    return [(idx >> (n - 1 - i)) & 1 for i in range(n)]


def pair_sum(xs):
    """XOR over all pairs i<j of x_i x_j, written out the slow way."""
    return sum(xs[i] * xs[j] for i in range(len(xs)) for j in range(i + 1, len(xs))) % 2


def local_deterministic(n, funcs):
    """Product box where party i answers funcs[i][x_i]."""
    table = np.zeros((2**n, 2**n))
    for x in range(2**n):
        xs = bits(x, n)
        a = [funcs[i][xs[i]] for i in range(n)]
        table[x, int("".join(map(str, a)), 2)] = 1.0
    return ConditionalBox(n, table)


def random_ns_box(rng, n, n_terms=4):
    """Mixture of isotropic boxes and local deterministic boxes; always no-signaling."""
    boxes = []
    for _ in range(n_terms):
        if rng.random() < 0.5:
            boxes.append(make_isotropic(n, rng.random()))
        else:
            funcs = [tuple(rng.integers(0, 2, size=2)) for _ in range(n)]
            boxes.append(local_deterministic(n, funcs))
    weights = rng.dirichlet(np.ones(n_terms))
    return mix(boxes, weights)


def random_table_box(rng, n):
    """Normalized but otherwise arbitrary table (usually signaling)."""
    t = rng.random((2**n, 2**n))
    return ConditionalBox(n, t / t.sum(axis=1, keepdims=True))


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


ALL_LOCAL_FUNCS = list(itertools.product((0, 1), repeat=2))


_criteria = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criteria[item.nodeid] = mark.args


def pytest_runtest_logreport(report):
    if report.nodeid in _criteria and report.when == "call":
        number, title = _criteria[report.nodeid]
        _criteria[report.nodeid] = (number, title, report.outcome)


def pytest_terminal_summary(terminalreporter):
    done = [v for v in _criteria.values() if len(v) == 3]
    if not done:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome in sorted(done):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] AC{number:02d} {title}")
