import numpy as np
import pytest

from ovbgen.benchmark import benchmark_table, effect_partial_r2, selection_partial_r2
from ovbgen.errors import SingleCovariate
from ovbgen.model import TargetDataset, TrialDataset, pool
from ovbgen.simulate import (
    Dgp1Config,
    HideOneConfig,
    gen_dgp1,
    gen_hide_one,
)


def _random_trial(rng, n=400, p=3, modifier=None):
    x = rng.standard_normal((n, p))
    a = (rng.random(n) < 0.5).astype(float)
    effect = 1.0 if modifier is None else 1.0 + x[:, modifier]
    y = 0.5 + x @ np.full(p, 0.4) + a * effect + rng.standard_normal(n)
    return TrialDataset(x, a, y, tuple(f"x{j + 1}" for j in range(p)))


class TestSelectionPartialR2:
    def test_noise_column_near_zero(self):
        # mean over repetitions of a selection-irrelevant column's partial
        values = []
        for seed in range(100):
            rng = np.random.default_rng(9000 + seed)
            n_t, n_o = 300, 400
            relevant = np.concatenate([
                rng.standard_normal(n_t),
                0.8 + rng.standard_normal(n_o),
            ])
            noise = np.concatenate([
                rng.standard_normal(n_t),
                rng.standard_normal(n_o),
            ])
            x = np.column_stack([relevant, noise])
            trial = TrialDataset(
                x[:n_t], (rng.random(n_t) < 0.5).astype(float),
                rng.standard_normal(n_t), ("rel", "noise"),
            )
            target = TargetDataset(x[n_t:], ("rel", "noise"))
            values.append(selection_partial_r2(pool(trial, target), 1))
        assert float(np.mean(values)) <= 0.01

    def test_duplicate_column_zero(self):
        rng = np.random.default_rng(3)
        n = 200
        base = rng.standard_normal((n, 2))
        x = np.column_stack([base, base[:, 0]])
        trial = TrialDataset(
            x[:100], (rng.random(100) < 0.5).astype(float),
            rng.standard_normal(100), ("a", "b", "a_copy"),
        )
        target = TargetDataset(x[100:] + 0.4, ("a", "b", "a_copy"))
        pooled = pool(trial, target)
        assert selection_partial_r2(pooled, 2) == 0.0

    def test_single_covariate_rejected(self):
        rng = np.random.default_rng(4)
        trial = TrialDataset(rng.standard_normal((20, 1)),
                             (rng.random(20) < 0.5).astype(float),
                             rng.standard_normal(20), ("x",))
        target = TargetDataset(rng.standard_normal((20, 1)), ("x",))
        with pytest.raises(SingleCovariate):
            selection_partial_r2(pool(trial, target), 0)

    def test_dgp1_x1_at_least_median(self):
        # all coordinates shift equally, so the selection partials are
        # exchangeable; the moderated coordinate must not rank low on average
        per_column = np.zeros(5)
        reps = 60
        for seed in range(reps):
            trial, target, _ = gen_dgp1(Dgp1Config(), 7700 + seed)
            pooled = pool(trial, target)
            per_column += [selection_partial_r2(pooled, j) for j in range(5)]
        per_column /= reps
        assert per_column[0] >= np.median(per_column[1:]) - 0.002


class TestEffectPartialR2:
    def test_no_heterogeneity_near_zero(self):
        rng = np.random.default_rng(11)
        trial = _random_trial(rng, n=2000, modifier=None)
        for j in range(trial.p):
            assert effect_partial_r2(trial, j) <= 0.01

    def test_pure_modifier_is_one_when_noiseless(self):
        rng = np.random.default_rng(13)
        n, p = 400, 3
        x = rng.standard_normal((n, p))
        a = (rng.random(n) < 0.5).astype(float)
        y = 2.0 + 0.3 * x[:, 0] + a * (1.0 + x[:, 2])  # no noise
        trial = TrialDataset(x, a, y, ("x1", "x2", "x3"))
        assert effect_partial_r2(trial, 2) == pytest.approx(1.0, abs=1e-9)
        assert effect_partial_r2(trial, 0) == 0.0

    def test_modifier_dominates_with_noise(self):
        rng = np.random.default_rng(15)
        trial = _random_trial(rng, n=4000, modifier=1)
        vals = [effect_partial_r2(trial, j) for j in range(3)]
        assert vals[1] > 5 * max(vals[0], vals[2])

    def test_hidden_covariate_has_largest_product(self):
        trial, target, _ = gen_hide_one(HideOneConfig(), 42)
        pooled = pool(trial, target)
        products = [
            selection_partial_r2(pooled, j) * effect_partial_r2(trial, j)
            for j in range(trial.p)
        ]
        assert int(np.argmax(products)) == 0


class TestBenchmarkTable:
    def _datasets(self, seed=21):
        trial, target, _ = gen_hide_one(HideOneConfig(n_trial=800, n_target=1200), seed)
        return trial, pool(trial, target)

    def test_sorted_descending_with_flags(self):
        trial, pooled = self._datasets()
        entries = benchmark_table(trial, pooled, rv_reference=0.04)
        products = [e.product for e in entries]
        assert products == sorted(products, reverse=True)
        for e in entries:
            assert e.exceeds_rv == (e.product >= 0.04)

    def test_zero_rv_flags_positive_products(self):
        trial, pooled = self._datasets()
        entries = benchmark_table(trial, pooled, rv_reference=0.0)
        for e in entries:
            assert e.exceeds_rv

    def test_deterministic_tie_order(self):
        trial, pooled = self._datasets()
        a = benchmark_table(trial, pooled, 0.02)
        b = benchmark_table(trial, pooled, 0.02)
        assert [e.covariate for e in a] == [e.covariate for e in b]

    def test_twice_as_strong_reading(self):
        # reference RV 0.04 vs strongest observed product 0.02: nothing is
        # flagged and an unobserved moderator must be twice as strong
        trial, pooled = self._datasets()
        entries = benchmark_table(trial, pooled, rv_reference=0.04)
        strongest = entries[0].product
        if strongest < 0.04:
            assert all(not e.exceeds_rv for e in entries)
        assert 0.04 / 0.02 == pytest.approx(2.0)
