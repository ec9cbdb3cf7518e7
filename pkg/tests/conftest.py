"""Shared pytest configuration: the acceptance criteria summary.

The tests in test_acceptance.py are named test_a1_* .. test_a9_*; after
the run a one-line PASS / FAIL verdict per criterion is appended to the
terminal summary so the gate can be read off directly.
"""

import re

CRITERIA = {
    "a1": "Brownian vector norm: tail constant and simulation agreement",
    "a2": "window constants: H_1, H_2 and the exact alpha=2 grid oracle",
    "a3": "Ornstein-Uhlenbeck exceedance versus its closed asymptotic",
    "a4": "reflected Brownian motion: constant 2 and exact tail identity",
    "a5": "two-point maximum set: 2 Psi(u) and simulated ratio trend",
    "a6": "random power-law models: constants, exponents, regime labels",
    "a7": "Laplace integrals against power-law asymptotics",
    "a8": "thread-count invariance of seeded comparison tables",
    "a9": "structural monotonicity and consistency properties",
}

_NODE_RE = re.compile(r"test_acceptance\.py::test_(a\d+)_")


def pytest_terminal_summary(terminalreporter):
    outcomes = {}
    for status in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(status, []):
            match = _NODE_RE.search(getattr(report, "nodeid", ""))
            if match is None:
                continue
            key = match.group(1)
            verdict = "PASS" if status == "passed" else "FAIL"
            if status == "skipped":
                verdict = "SKIP"
            # a failed setup/teardown must not be masked by a pass
            if outcomes.get(key) != "FAIL":
                outcomes[key] = verdict
    if not outcomes:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(CRITERIA):
        verdict = outcomes.get(key, "NOT RUN")
        terminalreporter.write_line(
            "%s  %-7s %s" % (key.upper(), verdict, CRITERIA[key])
        )
