import numpy as np
import pytest

from levyflow.drivers import RngStream
from levyflow.ensemble import (
    EnsembleConfig,
    WelfordAccumulator,
    run_ensemble,
    welford_merge,
)
from levyflow.errors import ConfigInvalid, EnsembleSampleError
from levyflow.macro import MacroConfig
from levyflow.micro import MicroConfig, run_micro, survival_fraction

SMALL_MACRO = MacroConfig(n_steps=8)
SMALL_MICRO = MicroConfig(n_particles=300, n_steps=8)


# ---------------------------------------------------------------------------
# Welford machinery
# ---------------------------------------------------------------------------


def test_welford_two_singletons():
    acc = WelfordAccumulator()
    acc.add(1.0)
    acc.add(3.0)
    count, mean, m2 = acc.moments()
    assert count == 2
    assert mean == pytest.approx(2.0)
    assert m2 == pytest.approx(2.0)
    assert acc.variance() == pytest.approx(2.0)


def test_welford_merge_identity_and_pairs():
    merged = welford_merge([(0, None, None), (2, 2.0, 2.0)])
    assert merged == (2, 2.0, 2.0)
    a = WelfordAccumulator()
    a.add(1.0)
    b = WelfordAccumulator()
    b.add(3.0)
    count, mean, m2 = welford_merge([a.moments(), b.moments()])
    assert (count, float(mean), float(m2)) == (2, 2.0, 2.0)


def test_welford_merge_associative_against_brute_force():
    rng = np.random.Generator(np.random.Philox(key=[31, 0]))
    data = rng.standard_normal(1000)
    brute_mean = data.mean()
    brute_m2 = ((data - brute_mean) ** 2).sum()

    for cuts in ([100, 400], [1, 999], [250, 500, 750]):
        parts = np.split(data, cuts)
        partials = []
        for part in parts:
            acc = WelfordAccumulator()
            for v in part:
                acc.add(v)
            partials.append(acc.moments())
        count, mean, m2 = welford_merge(partials)
        assert count == 1000
        assert float(mean) == pytest.approx(brute_mean, rel=1e-10)
        assert float(m2) == pytest.approx(brute_m2, rel=1e-10)


def test_welford_elementwise_on_arrays():
    acc = WelfordAccumulator()
    acc.add(np.array([1.0, 5.0]))
    acc.add(np.array([3.0, 5.0]))
    assert np.allclose(acc.mean, [2.0, 5.0])
    assert np.allclose(acc.variance(), [2.0, 0.0])


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------


def test_ensemble_config_validation():
    with pytest.raises(ConfigInvalid):
        EnsembleConfig(n_samples=0)
    with pytest.raises(ConfigInvalid):
        EnsembleConfig(workers=0)
    with pytest.raises(ConfigInvalid):
        run_ensemble("neither", SMALL_MACRO, EnsembleConfig(n_samples=1))


def test_single_sample_equals_mean_with_zero_variance():
    ens = EnsembleConfig(n_samples=1, base_seed=7, snapshot_steps=(0, 8))
    stats = run_ensemble("macro", SMALL_MACRO, ens)
    assert stats.mean.shape == (2, 3) + SMALL_MACRO.grid.shape
    assert np.all(stats.variance == 0.0)


def test_noise_off_gives_identical_samples():
    cfg = MacroConfig(n_steps=5, sigma_W=0.0)
    ens = EnsembleConfig(n_samples=4, base_seed=7, snapshot_steps=(5,))
    stats = run_ensemble("macro", cfg, ens)
    assert float(np.abs(stats.variance).max()) <= 1e-12


def test_worker_counts_agree_bitwise():
    ens1 = EnsembleConfig(n_samples=4, base_seed=11, snapshot_steps=(0, 8), workers=1)
    ens2 = EnsembleConfig(n_samples=4, base_seed=11, snapshot_steps=(0, 8), workers=2)
    s1 = run_ensemble("macro", SMALL_MACRO, ens1)
    s2 = run_ensemble("macro", SMALL_MACRO, ens2)
    assert s1.mean.tobytes() == s2.mean.tobytes()
    assert s1.variance.tobytes() == s2.variance.tobytes()


def test_micro_ensemble_survival_consistency():
    ens = EnsembleConfig(n_samples=12, base_seed=3)
    stats = run_ensemble("micro", SMALL_MICRO, ens)
    assert len(stats.survival_samples) == 12
    # the first sample must equal a direct run with the same stream
    state, _ = run_micro(SMALL_MICRO, RngStream(3, 0))
    assert stats.survival_samples[0] == survival_fraction(state, SMALL_MICRO.n_particles)
    assert 0.0 <= stats.survival_mean <= 1.0
    assert stats.survival_stderr >= 0.0


def test_export_sample_ids():
    ens = EnsembleConfig(n_samples=3, base_seed=5, snapshot_steps=(8,), export_sample_ids=(1,))
    stats = run_ensemble("macro", SMALL_MACRO, ens)
    assert set(stats.exported) == {1}
    assert stats.exported[1].shape == (1, 3) + SMALL_MACRO.grid.shape


def test_sample_failure_aborts_with_seed():
    # an unsolvable configuration: zero iterations allowed with diffusion on
    bad = MacroConfig(n_steps=1, solver_max_iterations=1, solver_tol=1e-16)
    ens = EnsembleConfig(n_samples=2, base_seed=99)
    with pytest.raises(EnsembleSampleError) as err:
        run_ensemble("macro", bad, ens)
    assert err.value.base_seed == 99
    assert err.value.sample_index == 0


def test_kind_config_mismatch():
    with pytest.raises(ConfigInvalid):
        run_ensemble("macro", SMALL_MICRO, EnsembleConfig(n_samples=1))
    with pytest.raises(ConfigInvalid):
        run_ensemble("micro", SMALL_MACRO, EnsembleConfig(n_samples=1))


def test_exported_samples_mean_matches_streamed_mean():
    ens = EnsembleConfig(
        n_samples=5, base_seed=21, snapshot_steps=(8,), export_sample_ids=(0, 1, 2, 3, 4)
    )
    stats = run_ensemble("macro", SMALL_MACRO, ens)
    stacked = np.stack([stats.exported[i] for i in range(5)])
    assert np.max(np.abs(stacked.mean(axis=0) - stats.mean)) <= 1e-12


def test_single_run_within_two_std_of_ensemble():
    ens = EnsembleConfig(n_samples=30, base_seed=4)
    stats = run_ensemble("micro", SMALL_MICRO, ens)
    samples = np.asarray(stats.survival_samples)
    spread = samples.std(ddof=1)
    assert abs(samples[0] - stats.survival_mean) <= 2.0 * max(spread, 1e-9)


def test_standard_error_scales_like_inverse_sqrt_samples():
    """Central-limit sanity: the pointwise standard error of the noisy H
    field shrinks like M^(-1/2) within 20% between 50 and 200 samples."""
    cfg = MacroConfig(n_steps=20)
    probe = (10, 10)
    estimates = {}
    for m in (50, 200):
        ens = EnsembleConfig(n_samples=m, base_seed=6, snapshot_steps=(20,))
        stats = run_ensemble("macro", cfg, ens)
        var = stats.variance[0, 0][probe]  # snapshot 0, field H
        estimates[m] = np.sqrt(var / m)
    ratio = estimates[200] / estimates[50]
    assert ratio == pytest.approx(0.5, rel=0.20)
