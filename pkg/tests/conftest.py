"""Shared fixtures: generated 1D systems reused across the test modules.

Running the SQP driver is the expensive part of most tests, so the two
standard discretizations (8 elements at p=1/q=1 and 16 elements at p=2/q=2)
are generated once per session. Tests must not mutate these objects.
"""

import dataclasses

import numpy as np
import pytest
import scipy.linalg

from kktprecond import ShockTrackProblem1d, build_kkt, run_sqp
from kktprecond.blocklinalg import BlockCsrMatrix
from kktprecond.conprec import build_at_preconditioner
from kktprecond.kkt import KktOperator, KktSystem, assemble_Byy, materialize_dense
from kktprecond.krylov import EXACT_SOLUTION, GmresConfig, gmres_solve
from kktprecond.shocktrack import SqpConfig


@pytest.fixture(scope="session")
def prob8():
    return ShockTrackProblem1d(n_elem=8, p=1, q=1)


@pytest.fixture(scope="session")
def states8(prob8):
    return run_sqp(prob8, SqpConfig())


@pytest.fixture(scope="session")
def sys8_k1(prob8, states8):
    return build_kkt(prob8, states8[1])


@pytest.fixture(scope="session")
def prob16():
    return ShockTrackProblem1d(n_elem=16, p=2, q=2)


@pytest.fixture(scope="session")
def states16(prob16):
    return run_sqp(prob16, SqpConfig())


@pytest.fixture(scope="session")
def sys16_k1(prob16, states16):
    return build_kkt(prob16, states16[1])


def zero_coupling_system(sys):
    """Copy of a system with dRdu zeroed, so B_uu = B_uy = 0 while Ju, Byy,
    and the right-hand side are unchanged."""
    zero = BlockCsrMatrix(
        sys.factors.dRdu.pattern, [np.zeros_like(b) for b in sys.factors.dRdu.blocks]
    )
    factors = dataclasses.replace(sys.factors, dRdu=zero)
    return KktSystem(factors, sys.g, sys.r, assemble_Byy(factors), dims=sys.dims)


@pytest.fixture(scope="session")
def sys8_zero_coupling(sys8_k1):
    return zero_coupling_system(sys8_k1)


def count_iterations(sys, precond, tol=1e-3, max_iters=1000):
    """GMRES iteration count against the dense direct solution, the convergence
    measure used by the benchmark harness. precond is a catalog name or an
    already-built preconditioner object."""
    if isinstance(precond, str):
        precond = build_at_preconditioner(sys, precond)
    op = KktOperator(sys)
    rhs = sys.rhs()
    s_ex = scipy.linalg.solve(materialize_dense(op), rhs)
    cfg = GmresConfig(tol=tol, max_iters=max_iters, criterion=EXACT_SOLUTION, reference=s_ex)
    report = gmres_solve(op.as_linear_operator(), rhs, precond.as_preconditioner(), cfg)
    return report.iterations, report.converged
