"""One test per acceptance criterion; each prints a pass/fail line with its checks."""
import pytest

from pareto_weights.acceptance import run_criterion


def _run(cid):
    res = run_criterion(cid)
    print()
    print(res.summary())
    for c in res.checks:
        print(c.line())
    assert res.passed, res.summary()


@pytest.mark.parametrize("cid", range(1, 10), ids=[
    "c1_exact_identities",
    "c2_normalization",
    "c3_moment_reproduction",
    "c4_cv_scaling",
    "c5_chain_mc_analytic_histograms",
    "c6_modes",
    "c7_recruitment_curve",
    "c8_order_statistics",
    "c9_thread_determinism",
])
def test_criterion(cid):
    _run(cid)
