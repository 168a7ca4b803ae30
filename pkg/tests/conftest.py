"""Shared fixtures.

The 500-replication studies are expensive, so they run once per session and
feed both the module-level tests and the acceptance suite.
"""

import os
import time

import pytest

from ovbgen.simulate import (
    Dgp1Config,
    Dgp2Config,
    gen_dgp1,
    gen_dgp2,
    replication_study,
)
import functools

THREADS = max(1, min(4, os.cpu_count() or 1))

N_REPS = 500
GAMMA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


@pytest.fixture(scope="session")
def dgp1_generator():
    return functools.partial(gen_dgp1, Dgp1Config())


@pytest.fixture(scope="session")
def dgp1_point_reps(dgp1_generator):
    """500 point-estimate replications of both estimators, no bootstrap."""
    start = time.monotonic()
    g_records, oracle, g_failed = replication_study(
        dgp1_generator, N_REPS, seed=101,
        estimator="gformula", compute_ci=False, threads=THREADS,
    )
    i_records, _, i_failed = replication_study(
        dgp1_generator, N_REPS, seed=101,
        estimator="ipw", compute_ci=False, threads=THREADS,
    )
    return {
        "gformula": g_records,
        "ipw": i_records,
        "oracle": oracle,
        "n_failures": g_failed + i_failed,
        "elapsed": time.monotonic() - start,
    }


@pytest.fixture(scope="session")
def dgp1_coverage_reps(dgp1_generator):
    """500 replications with 1000-resample bootstrap CIs."""
    start = time.monotonic()
    records, oracle, n_failed = replication_study(
        dgp1_generator, N_REPS, seed=202,
        estimator="gformula", n_boot=1000, alpha=0.05,
        compute_ci=True, threads=THREADS,
    )
    return {
        "records": records,
        "oracle": oracle,
        "n_failures": n_failed,
        "elapsed": time.monotonic() - start,
    }


@pytest.fixture(scope="session")
def dgp2_coverage_reps():
    """500 replications of the nonlinear design; the envelope check does not
    need a large bootstrap, so 100 resamples keep it quick."""
    generator = functools.partial(gen_dgp2, Dgp2Config())
    records, oracle, n_failed = replication_study(
        generator, N_REPS, seed=303,
        estimator="gformula", n_boot=100, alpha=0.05,
        compute_ci=True, threads=THREADS,
    )
    return {"records": records, "oracle": oracle, "n_failures": n_failed}
