import functools
import warnings

import numpy as np
import pytest

from ovbgen.benchmark import selection_partial_r2
from ovbgen.errors import InvalidConfig
from ovbgen.model import pool
from ovbgen.simulate import (
    CoverageCurve,
    Dgp1Config,
    Dgp2Config,
    Dgp3Config,
    HideOneConfig,
    coverage_experiment,
    coverage_from_records,
    gen_dgp1,
    gen_dgp2,
    gen_dgp3,
    gen_hide_one,
    hide_one_benchmark,
    replication_study,
    ridge_gformula,
)
from ovbgen.streams import derive_seed, substream
from ovbgen.transport import gformula_estimator


SMALL1 = Dgp1Config(n_trial=250, n_target=400)


class TestStreams:
    def test_substream_reproducible_and_distinct(self):
        a = substream(5, 1, 2).standard_normal(4)
        b = substream(5, 1, 2).standard_normal(4)
        c = substream(5, 1, 3).standard_normal(4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_derive_seed_stable(self):
        assert derive_seed(9, 4) == derive_seed(9, 4)
        assert derive_seed(9, 4) != derive_seed(9, 5)


class TestDgp1:
    def test_oracle_default_values(self):
        _, _, oracle = gen_dgp1(Dgp1Config(), 1)
        assert oracle.tau_star == pytest.approx(1.125, abs=1e-15)
        assert oracle.tau_x == pytest.approx(1.0, abs=1e-15)
        assert oracle.gamma_star == pytest.approx(0.5)
        assert oracle.delta_u_star == pytest.approx(0.25)
        assert oracle.bias == pytest.approx(0.125, abs=1e-15)

    def test_equal_gammas_no_bias(self):
        _, _, oracle = gen_dgp1(Dgp1Config(gamma_r=0.3, gamma_o=0.3), 1)
        assert oracle.bias == 0.0
        assert oracle.tau_star == oracle.tau_x

    def test_bit_identical_given_seed(self):
        t1, o1, _ = gen_dgp1(SMALL1, 8)
        t2, o2, _ = gen_dgp1(SMALL1, 8)
        assert np.array_equal(t1.covariates, t2.covariates)
        assert np.array_equal(t1.outcome, t2.outcome)
        assert np.array_equal(o1.covariates, o2.covariates)
        t3, _, _ = gen_dgp1(SMALL1, 9)
        assert not np.array_equal(t1.outcome, t3.outcome)

    def test_invalid_config(self):
        with pytest.raises(InvalidConfig):
            Dgp1Config(sigma=0.0)
        with pytest.raises(InvalidConfig):
            Dgp1Config(beta_x=(1.0, 2.0))


class TestDgp2:
    def test_constant_moderation_reduces_to_linear_oracle(self):
        cfg = Dgp2Config(beta_x_mod=0.0)
        _, _, oracle = gen_dgp2(cfg, 3)
        # bias = beta_base * Delta_U* when moderation strength is constant
        assert oracle.bias == pytest.approx(cfg.beta_base * 0.25, abs=0.005)
        assert oracle.gamma_star == pytest.approx(cfg.beta_base, abs=0.02)

    def test_default_oracle_exceeds_linear_bias(self):
        _, _, oracle = gen_dgp2(Dgp2Config(), 3)
        # covariate-varying moderation pushes the effective strength above 1
        assert oracle.bias == pytest.approx(0.3125, abs=0.005)
        assert oracle.gamma_star > 1.0

    def test_deterministic(self):
        t1, _, _ = gen_dgp2(Dgp2Config(n_trial=200, n_target=200), 4)
        t2, _, _ = gen_dgp2(Dgp2Config(n_trial=200, n_target=200), 4)
        assert np.array_equal(t1.outcome, t2.outcome)


class TestDgp3:
    CFG = Dgp3Config(n_trial=600, n_target=900)

    def test_deterministic(self):
        t1, o1, _ = gen_dgp3(self.CFG, 5)
        t2, o2, _ = gen_dgp3(self.CFG, 5)
        assert np.array_equal(t1.covariates, t2.covariates)
        assert np.array_equal(o1.covariates, o2.covariates)

    def test_shapes_and_oracle(self):
        trial, target, oracle = gen_dgp3(self.CFG, 5)
        assert trial.covariates.shape == (600, 50)
        assert target.covariates.shape == (900, 50)
        assert oracle.delta_u_star < 0  # trial over-selects high x1
        assert oracle.bias == pytest.approx(oracle.gamma_star * oracle.delta_u_star)

    def test_irrelevant_column_partial_near_zero(self):
        trial, target, _ = gen_dgp3(Dgp3Config(), 6)
        pooled = pool(trial, target)
        assert selection_partial_r2(pooled, 30) <= 0.01

    def test_ridge_matches_ols_smoke(self):
        trial, target, _ = gen_dgp3(Dgp3Config(), 7)
        ols_value = gformula_estimator(trial, target)
        ridge_value = ridge_gformula(trial, target, penalty=1.0)
        assert np.isfinite(ols_value) and np.isfinite(ridge_value)
        assert ridge_value == pytest.approx(ols_value, abs=0.1)


class TestCoverageExperiment:
    GEN = staticmethod(functools.partial(gen_dgp1, SMALL1))

    def _run(self, threads, n_reps=40):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return coverage_experiment(
                self.GEN, [0.0, 0.5, 1.0, 2.0], n_reps, seed=17,
                n_boot=120, threads=threads,
            )

    def test_invariants_and_monotonicity(self):
        curve = self._run(threads=1)
        assert curve.coverage_envelope[0] == 0.0  # point interval, gamma = 0
        assert all(b >= a for a, b in zip(curve.coverage_envelope,
                                          curve.coverage_envelope[1:]))
        for env, full in zip(curve.coverage_envelope, curve.coverage_full_ci):
            assert full >= env

    def test_thread_count_invariance(self):
        assert self._run(threads=1) == self._run(threads=2)

    def test_below_threshold_warns(self):
        with pytest.warns(UserWarning, match="below the 100-rep"):
            coverage_experiment(self.GEN, [0.0], 5, seed=3, n_boot=100)

    def test_curve_validates_lengths(self):
        with pytest.raises(InvalidConfig):
            CoverageCurve((0.0, 1.0), (0.5,), (0.6, 0.7), 10)

    def test_full_ci_coverage_without_bias(self):
        # gamma_r = gamma_o: selection ignorability holds, so at gamma = 0 the
        # full interval is the baseline CI and should be near nominal
        cfg = Dgp1Config(gamma_r=0.0, gamma_o=0.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            records, oracle, _ = replication_study(
                functools.partial(gen_dgp1, cfg), 100, seed=23,
                n_boot=300, compute_ci=True, threads=2,
            )
        curve = coverage_from_records(records, oracle, [0.0])
        assert oracle.bias == 0.0
        assert 0.85 <= curve.coverage_full_ci[0] <= 1.0


class TestHideOne:
    def test_ranking_and_coverage_small(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = hide_one_benchmark(seed=5, n_reps=40, threads=2)
        assert report.coverage >= 0.9
        assert int(np.argmax(report.mean_products)) == report.hidden_index

    def test_zero_moderation_hidden_column_harmless(self):
        cfg = HideOneConfig(theta=(0.0, 0.3, 0.2, 0.1, 0.05))
        trial, target, oracle = gen_hide_one(cfg, 11)
        assert oracle.bias == 0.0
        from ovbgen.simulate import drop_covariate
        from ovbgen.transport import gformula_estimator as gf

        full = gf(trial, target)
        hid = gf(*drop_covariate(trial, target, 0))
        assert hid == pytest.approx(full, abs=0.05)

    def test_deterministic(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            a = hide_one_benchmark(seed=5, n_reps=12)
            b = hide_one_benchmark(seed=5, n_reps=12)
        assert a == b
