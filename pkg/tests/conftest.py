from collections import defaultdict

import numpy as np
import pytest


def dense_embed(gate, targets, n):
    """Full 2^n operator for ``gate`` on ``targets`` (bit i of the gate index is
    targets[i]), built entry by entry from the index map."""
    gate = np.asarray(gate)
    dim = 1 << n
    rest_mask = ~sum(1 << q for q in targets) & (dim - 1)
    full = np.zeros((dim, dim), dtype=complex)

    def sub(idx):
        return sum(((idx >> q) & 1) << i for i, q in enumerate(targets))

    for r in range(dim):
        for c in range(dim):
            if (r & rest_mask) == (c & rest_mask):
                full[r, c] = gate[sub(r), sub(c)]
    return full


def dense_controlled(u, system, control, n):
    d = u.shape[0]
    cu = np.eye(2 * d, dtype=complex)
    cu[d:, d:] = u
    return dense_embed(cu, list(system) + [control], n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_criteria: dict[int, dict] = defaultdict(lambda: {"title": "", "failed": [], "ran": 0})


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion id")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    entry = _criteria[mark.args[0]]
    entry["title"] = mark.args[1]
    if rep.when == "call":
        entry["ran"] += 1
    if rep.failed:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "FAIL" if entry["failed"] or not entry["ran"] else "PASS"
        line = f"criterion {number:>2} {status}  {entry['title']}"
        if entry["failed"]:
            line += "  [" + ", ".join(entry["failed"]) + "]"
        terminalreporter.write_line(line)
