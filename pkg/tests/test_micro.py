import numpy as np
import pytest

from levyflow.drivers import RngStream
from levyflow.errors import ConfigInvalid, NoAliveParticles
from levyflow.grids import Grid
from levyflow.micro import (
    MicroConfig,
    MicroState,
    density_histogram,
    deposit_fields,
    gather,
    micro_init,
    micro_step,
    periodic_gaussian_blur,
    run_micro,
    scatter_add,
    survival_fraction,
)

GRID = Grid((1.0, 1.0), (41, 41))


def _quiet_state(positions, tissue=None, acid=None, protons=1.0):
    m = positions.shape[0]
    return MicroState(
        grid=GRID,
        positions=np.asarray(positions, dtype=float),
        velocities=np.zeros((m, 2)),
        protons=np.full(m, float(protons)),
        alive=np.ones(m, dtype=bool),
        acid=np.zeros(GRID.shape) if acid is None else acid,
        tissue=np.ones(GRID.shape) if tissue is None else tissue,
    )


def _no_kill_config(**kw):
    defaults = dict(
        n_particles=1,
        n_steps=3,
        noise_scale=0.0,
        kill_low=0.0,
        kill_high=np.inf,
        kill_acid=np.inf,
        # pure kinematics: no proton/acid/tissue exchange
        efflux_rate=0.0,
        buffering_rate=0.0,
        production_rate=0.0,
        vascular_uptake=0.0,
        tissue_decay=0.0,
        grid=GRID,
    )
    defaults.update(kw)
    return MicroConfig(**defaults)


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        MicroConfig(n_particles=0)
    with pytest.raises(ConfigInvalid):
        MicroConfig(tau=0.0)
    with pytest.raises(ConfigInvalid):
        MicroConfig(kill_low=2.0, kill_high=1.0)


def test_stationary_particle_on_flat_tissue():
    cfg = _no_kill_config()
    state = _quiet_state(np.array([[0.4, 0.6]]))
    rng = RngStream(1, 0)
    for _ in range(5):
        state = micro_step(state, cfg, rng)
    assert np.allclose(state.positions, [[0.4, 0.6]])
    assert np.allclose(state.velocities, 0.0)
    assert state.alive.all()


def test_no_kill_thresholds_full_survival():
    cfg = MicroConfig(
        n_particles=400, n_steps=10, kill_low=0.0, kill_high=np.inf, kill_acid=np.inf
    )
    state, series = run_micro(cfg, RngStream(2, 0))
    assert survival_fraction(state, cfg.n_particles) == 1.0
    assert series == [400] * 11


def test_three_step_hand_computed_trajectory():
    """Tissue linear in x away from the periodic seam: the centered
    difference of a*x is exactly a, so the drift is known in closed form."""
    slope = 0.25
    xs, _ = GRID.meshes()
    tissue = slope * xs
    cfg = _no_kill_config(tau=0.1)
    state = _quiet_state(np.array([[0.4, 0.5]]), tissue=tissue)
    rng = RngStream(3, 0)
    # hand computation: v += slope*tau per step (x only), x += v*tau
    v, x = 0.0, 0.4
    for _ in range(3):
        state = micro_step(state, cfg, rng)
        v += slope * cfg.tau
        x += v * cfg.tau
    assert state.velocities[0, 0] == pytest.approx(v, abs=1e-12)
    assert state.positions[0, 0] == pytest.approx(x, abs=1e-12)
    assert state.positions[0, 1] == pytest.approx(0.5)


def test_forced_noise_sequence_trajectory(monkeypatch):
    """Fixed increments via a stubbed noise sampler; the position must equal
    the hand-computed explicit Euler trajectory."""
    kicks = [np.array([[0.1, -0.2]]), np.array([[0.05, 0.0]]), np.array([[-0.3, 0.1]])]
    seq = iter(kicks)
    monkeypatch.setattr("levyflow.micro.draw_noise", lambda model, rng, dt, size: next(seq))
    cfg = _no_kill_config(tau=0.1, noise_scale=1.0)
    state = _quiet_state(np.array([[0.5, 0.5]]))
    rng = RngStream(4, 0)
    v = np.zeros(2)
    x = np.array([0.5, 0.5])
    for kick in kicks:
        state = micro_step(state, cfg, rng)
        v = v + kick[0]
        x = (x + v * cfg.tau) % 1.0
    assert np.allclose(state.velocities[0], v, atol=1e-12)
    assert np.allclose(state.positions[0], x, atol=1e-12)


def test_monotone_mortality_and_positivity():
    cfg = MicroConfig(n_particles=900, n_steps=25)
    state = micro_init(cfg)
    rng = RngStream(5, 0)
    alive = state.alive_count()
    for _ in range(cfg.n_steps):
        prev_tissue = state.tissue.copy()
        state = micro_step(state, cfg, rng)
        assert state.alive_count() <= alive
        alive = state.alive_count()
        assert state.protons.min() >= 0.0
        assert state.acid.min() >= 0.0
        assert state.tissue.min() >= 0.0
        # tissue only decays (gamma > 0, acid >= 0)
        assert np.all(state.tissue <= prev_tissue + 1e-15)


def test_determinism():
    cfg = MicroConfig(n_particles=500, n_steps=10)
    s1, a1 = run_micro(cfg, RngStream(6, 0))
    s2, a2 = run_micro(cfg, RngStream(6, 0))
    assert a1 == a2
    assert s1.positions.tobytes() == s2.positions.tobytes()
    assert survival_fraction(s1, 500) == survival_fraction(s2, 500)


def test_default_config_has_zero_clamps():
    cfg = MicroConfig(n_particles=800, n_steps=25)
    state, _ = run_micro(cfg, RngStream(7, 0))
    assert state.clamp_events == 0


def test_survival_fraction_validation():
    state = _quiet_state(np.array([[0.5, 0.5]]))
    assert survival_fraction(state, 1) == 1.0
    with pytest.raises(ConfigInvalid):
        survival_fraction(state, 0)


# ---------------------------------------------------------------------------
# gather / scatter
# ---------------------------------------------------------------------------


def test_gather_scatter_adjoint_mass():
    rng = np.random.Generator(np.random.Philox(key=[11, 0]))
    pos = rng.random((200, 2))
    amounts = rng.random(200)
    field = np.zeros(GRID.shape)
    scatter_add(field, GRID, pos, amounts)
    assert field.sum() == pytest.approx(amounts.sum(), rel=1e-12)


def test_gather_exact_on_nodes():
    field = np.zeros(GRID.shape)
    field[3, 7] = 2.5
    dx, dy = GRID.spacings
    assert gather(field, GRID, np.array([[3 * dx, 7 * dy]]))[0] == pytest.approx(2.5)


# ---------------------------------------------------------------------------
# macroscopic views
# ---------------------------------------------------------------------------


def test_deposit_fields_identity_at_zero_bandwidth():
    cfg = MicroConfig(deposit_bandwidth=0.0, grid=GRID)
    state = micro_init(cfg)
    acid, tissue = deposit_fields(state, cfg)
    assert np.allclose(acid.values, state.acid)
    assert np.allclose(tissue.values, state.tissue)


def test_deposit_fields_uniform_invariant_and_mass():
    cfg = MicroConfig(grid=GRID)
    state = micro_init(cfg)
    state.acid = np.full(GRID.shape, 0.7)
    acid, tissue = deposit_fields(state, cfg)
    assert np.allclose(acid.values, 0.7, atol=1e-12)
    assert tissue.values.sum() == pytest.approx(state.tissue.sum(), rel=1e-8)


def test_deposit_point_mass_spreads_to_unit_bump():
    field = np.zeros(GRID.shape)
    field[20, 20] = 1.0
    out = periodic_gaussian_blur(field, GRID, 0.05)
    assert out.sum() == pytest.approx(1.0, rel=1e-10)
    assert out.max() < 1.0
    assert out[20, 20] == out.max()


def test_density_histogram_point_mass_and_normalization():
    dx, dy = GRID.spacings
    state = _quiet_state(np.array([[5 * dx + 0.25 * dx, 9 * dy + 0.5 * dy]] * 7))
    hist = density_histogram(state, GRID)
    assert hist.values.sum() == pytest.approx(1.0)
    assert hist.values[5, 9] == pytest.approx(1.0)


def test_density_histogram_uniform_concentration():
    rng = np.random.Generator(np.random.Philox(key=[12, 0]))
    m = 40_000
    grid = Grid((1.0, 1.0), (10, 10))
    state = _quiet_state(rng.random((m, 2)))
    hist = density_histogram(state, grid)
    per_bin = 1.0 / 100
    # multinomial concentration: 3 / sqrt(count per bin) on the relative error
    tol = 3.0 / np.sqrt(m * per_bin)
    assert np.all(np.abs(hist.values - per_bin) / per_bin <= tol)


def test_density_histogram_requires_alive():
    state = _quiet_state(np.array([[0.5, 0.5]]))
    state.alive[:] = False
    with pytest.raises(NoAliveParticles):
        density_histogram(state, GRID)
