import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.optimize import linprog

from coderx.codes import hamming_7_4
from coderx.polytope import LinearConstraintSystem

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def hamming():
    return hamming_7_4()


def biawgn_llr(codeword, ebn0_db, rate, rng):
    """Channel LLRs for BPSK (0 -> +1) over AWGN at the given Eb/N0."""
    sigma2 = 1.0 / (2.0 * rate * 10 ** (ebn0_db / 10))
    x = 1.0 - 2.0 * np.asarray(codeword, dtype=float)
    y = x + np.sqrt(sigma2) * rng.standard_normal(x.size)
    return 2.0 * y / sigma2


def feasible_with_fixed(sys: LinearConstraintSystem, fixed: dict[str, float]) -> bool:
    """HiGHS feasibility of ``sys`` with some variables pinned."""
    lo, hi = sys.bounds()
    lo, hi = lo.copy(), hi.copy()
    for name, v in fixed.items():
        lo[sys.index(name)] = hi[sys.index(name)] = v
    A, b = sys.equality_matrix()
    G, h = sys.inequality_matrix()
    res = linprog(np.zeros(sys.num_variables), A_ub=G if G.shape[0] else None, b_ub=h if G.shape[0] else None,
                  A_eq=A if A.shape[0] else None, b_eq=b if A.shape[0] else None,
                  bounds=list(zip(lo, hi)), method="highs")
    return res.status == 0


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
