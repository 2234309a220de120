"""Acceptance gate: every release criterion at full statistical strength.

Each test runs one criterion runner and prints a PASS/FAIL line (visible with
``pytest -s`` or in failure output).  The duplicate-freedom criterion audits
every run the other criteria performed, so it executes last.

APPROXENUM_ACCEPT_SCALE scales trial counts for quick development loops; the
gate itself is the default scale of 1.0.
"""

import pytest

from approxenum import selfcheck

from conftest import trial_scale


@pytest.fixture(scope="module")
def ctx():
    return selfcheck.Context(scale=trial_scale())


def _run(ctx, runner):
    res = runner(ctx)
    status = "PASS" if res.passed else "FAIL"
    print(f"[{res.name}] {status} ({res.seconds:.1f}s) - {res.detail}")
    assert res.passed, f"{res.name}: {res.detail}"
    return res


def test_c01_local_soundness(ctx):
    _run(ctx, selfcheck.criterion_local_soundness)


def test_c02_local_completeness(ctx):
    _run(ctx, selfcheck.criterion_local_completeness)


def test_c03_strengthened_threshold(ctx):
    _run(ctx, selfcheck.criterion_strengthened_threshold)


def test_c05_constant_delay(ctx):
    _run(ctx, selfcheck.criterion_constant_delay)


def test_c06_demo_tester(ctx):
    _run(ctx, selfcheck.criterion_demo_tester)


def test_c07_frequency_estimation(ctx):
    _run(ctx, selfcheck.criterion_frequency_estimation)


def test_c08_split_equivalence(ctx):
    _run(ctx, selfcheck.criterion_split_equivalence)


def test_c09_general_soundness(ctx):
    _run(ctx, selfcheck.criterion_general_soundness)


def test_c10_approx_counting(ctx):
    _run(ctx, selfcheck.criterion_approx_counting)


def test_c04_no_duplicates_last(ctx):
    # audits every emission stream the preceding criteria produced
    assert ctx.runs_checked > 0
    _run(ctx, selfcheck.criterion_no_duplicates)
