"""Particle-level acid-mediated invasion model.

Particles carry position, velocity and an intracellular proton load and
move over a periodic tissue field by a velocity-jump dynamic: the velocity
drifts along the tissue gradient and is kicked by one of three switchable
noise laws.  Extracellular acid and tissue are grid fields coupled to the
particles through bilinear gather/scatter with matching weights, and
particles die when their proton load leaves a viability band or the local
acid exceeds a threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .drivers import GaussianNoise, RngStream, draw_noise
from .errors import ConfigInvalid, NoAliveParticles
from .grids import Grid, GridField


@dataclass(frozen=True)
class MicroConfig:
    n_particles: int = 2500
    n_steps: int = 25
    tau: float = 0.05
    noise: object = field(default_factory=GaussianNoise)
    # kill thresholds: viability band for the proton load, acid ceiling
    kill_low: float = 0.3
    kill_high: float = 1.6
    kill_acid: float = 3.2
    # rate closures (saturating forms; CALIBRATED defaults, see config docs)
    efflux_rate: float = 3.6
    buffering_rate: float = 0.45
    production_rate: float = 8.1
    vascular_uptake: float = 0.3
    # cell-to-grid-cell volume ratio: converts per-cell membrane flux into
    # a concentration change of the extracellular field
    field_coupling: float = 0.02
    tissue_decay: float = 0.4
    taxis_sign: float = 1.0
    noise_scale: float = 1.0
    deposit_bandwidth: float = 0.04
    grid: Grid = field(default_factory=lambda: Grid((1.0, 1.0), (41, 41)))
    # initial conditions
    lattice_lo: float = 0.28
    lattice_hi: float = 0.72
    proton_init: float = 1.0
    acid_amp: float = 3.0
    acid_sigma: float = 0.27
    tissue_lo: float = 0.5
    tissue_hi: float = 1.0
    tissue_smooth_sigma: float = 0.06
    ic_seed: int = 424242

    def __post_init__(self):
        if self.n_particles < 1 or self.n_steps < 0 or self.tau <= 0:
            raise ConfigInvalid("need n_particles >= 1, n_steps >= 0, tau > 0")
        if not self.kill_low < self.kill_high:
            raise ConfigInvalid("viability band must satisfy kill_low < kill_high")
        if self.grid.ndim != 2:
            raise ConfigInvalid("micro model runs on a 2D grid")


@dataclass
class MicroState:
    grid: Grid
    positions: np.ndarray  # (M, 2)
    velocities: np.ndarray  # (M, 2)
    protons: np.ndarray  # (M,) intracellular load per particle
    alive: np.ndarray  # (M,) bool
    acid: np.ndarray  # extracellular field on the grid
    tissue: np.ndarray
    t: float = 0.0
    clamp_events: int = 0

    def alive_count(self) -> int:
        return int(self.alive.sum())


# ---------------------------------------------------------------------------
# bilinear gather / scatter (adjoint pair, mass preserving)
# ---------------------------------------------------------------------------


def _corner_weights(grid: Grid, positions):
    mx, my = grid.shape
    dx, dy = grid.spacings
    fx = positions[:, 0] / dx
    fy = positions[:, 1] / dy
    i0 = np.floor(fx).astype(int) % mx
    j0 = np.floor(fy).astype(int) % my
    i1 = (i0 + 1) % mx
    j1 = (j0 + 1) % my
    wx = fx - np.floor(fx)
    wy = fy - np.floor(fy)
    corners = ((i0, j0), (i1, j0), (i0, j1), (i1, j1))
    weights = ((1 - wx) * (1 - wy), wx * (1 - wy), (1 - wx) * wy, wx * wy)
    return corners, weights


def gather(field_values: np.ndarray, grid: Grid, positions) -> np.ndarray:
    corners, weights = _corner_weights(grid, positions)
    out = np.zeros(positions.shape[0])
    for (i, j), w in zip(corners, weights):
        out += w * field_values[i, j]
    return out


def scatter_add(field_values: np.ndarray, grid: Grid, positions, amounts):
    corners, weights = _corner_weights(grid, positions)
    for (i, j), w in zip(corners, weights):
        np.add.at(field_values, (i, j), w * amounts)


def tissue_gradient(grid: Grid, tissue: np.ndarray):
    dx, dy = grid.spacings
    gx = (np.roll(tissue, -1, axis=0) - np.roll(tissue, 1, axis=0)) / (2 * dx)
    gy = (np.roll(tissue, -1, axis=1) - np.roll(tissue, 1, axis=1)) / (2 * dy)
    return gx, gy


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------


def _wrapped_gaussian_bump(grid: Grid, amp, sigma):
    xs, ys = grid.meshes()
    lx, ly = grid.lengths
    cx, cy = 0.5 * lx, 0.5 * ly
    out = np.zeros(grid.shape)
    for ix in (-1, 0, 1):
        for iy in (-1, 0, 1):
            out += np.exp(
                -((xs - cx + ix * lx) ** 2 + (ys - cy + iy * ly) ** 2) / (2 * sigma**2)
            )
    return amp * out


def periodic_gaussian_blur(values: np.ndarray, grid: Grid, sigma: float) -> np.ndarray:
    """Convolve with a periodized Gaussian normalized to unit mass."""
    if sigma <= 0:
        return values.copy()
    axes_kernels = []
    for axis in range(grid.ndim):
        x = grid.axis_coords(axis)
        lx = grid.lengths[axis]
        dist = np.minimum(x, lx - x)
        axes_kernels.append(np.exp(-(dist**2) / (2 * sigma**2)))
    if grid.ndim == 1:
        kern = axes_kernels[0]
    else:
        kern = np.outer(axes_kernels[0], axes_kernels[1])
    kern /= kern.sum()
    return np.fft.ifftn(np.fft.fftn(values) * np.fft.fftn(kern)).real


def micro_init(cfg: MicroConfig) -> MicroState:
    ic_rng = RngStream(cfg.ic_seed, 0)
    m = cfg.n_particles
    side = int(np.ceil(np.sqrt(m)))
    axis = np.linspace(cfg.lattice_lo, cfg.lattice_hi, side)
    px, py = np.meshgrid(axis, axis, indexing="ij")
    positions = np.column_stack([px.ravel()[:m], py.ravel()[:m]])
    tissue_raw = ic_rng.uniform(cfg.grid.shape)
    tissue = periodic_gaussian_blur(tissue_raw, cfg.grid, cfg.tissue_smooth_sigma)
    lo, hi = tissue.min(), tissue.max()
    tissue = (tissue - lo) / (hi - lo) if hi > lo else np.zeros_like(tissue)
    tissue = cfg.tissue_lo + (cfg.tissue_hi - cfg.tissue_lo) * tissue
    return MicroState(
        grid=cfg.grid,
        positions=positions,
        velocities=np.zeros((m, 2)),
        protons=np.full(m, cfg.proton_init),
        alive=np.ones(m, dtype=bool),
        acid=_wrapped_gaussian_bump(cfg.grid, cfg.acid_amp, cfg.acid_sigma),
        tissue=tissue,
    )


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------


def micro_step(state: MicroState, cfg: MicroConfig, rng: RngStream) -> MicroState:
    """One explicit Euler step of the coupled particle/field dynamics.

    Order: velocity (tissue-gradient drift + noise kick), position (periodic
    wrap), intracellular protons, acid and tissue at the particle
    neighbourhoods, then the kill conditions.
    """
    if state.grid != cfg.grid:
        raise ConfigInvalid("state grid does not match config grid")
    tau = cfg.tau
    m = state.positions.shape[0]
    a = state.alive

    pos = state.positions.copy()
    vel = state.velocities.copy()
    protons = state.protons.copy()
    acid = state.acid.copy()
    tissue = state.tissue.copy()
    clamps = state.clamp_events

    gx, gy = tissue_gradient(state.grid, tissue)
    grad = np.column_stack(
        [gather(gx, state.grid, pos), gather(gy, state.grid, pos)]
    )
    kicks = cfg.noise_scale * np.asarray(draw_noise(cfg.noise, rng, tau, size=(m, 2)))
    vel[a] += cfg.taxis_sign * grad[a] * tau + kicks[a]
    pos[a] = np.mod(pos[a] + vel[a] * tau, np.asarray(state.grid.lengths))

    acid_at = gather(acid, state.grid, pos)
    efflux = cfg.efflux_rate * protons / (1.0 + acid_at)
    buffering = cfg.buffering_rate * protons
    production = cfg.production_rate / (1.0 + protons)
    protons[a] += tau * (-efflux - buffering + production)[a]
    neg = protons < 0
    clamps += int(np.count_nonzero(neg & a))
    protons[neg] = 0.0

    # extracellular side: efflux arrives, the vasculature clears
    acid_rate = cfg.field_coupling * (efflux - cfg.vascular_uptake * acid_at)
    scatter_add(acid, state.grid, pos[a], tau * acid_rate[a])
    neg = acid < 0
    clamps += int(np.count_nonzero(neg))
    acid[neg] = 0.0

    # tissue decays where particles sit; the exact integrating factor keeps
    # it positive no matter how many particles share a cell
    exposure = np.zeros_like(tissue)
    scatter_add(exposure, state.grid, pos[a], tau * cfg.tissue_decay * acid_at[a])
    tissue *= np.exp(-exposure)

    acid_now = gather(acid, state.grid, pos)
    killed = (protons < cfg.kill_low) | (protons > cfg.kill_high) | (
        acid_now > cfg.kill_acid
    )
    alive = a & ~killed

    return MicroState(
        grid=state.grid,
        positions=pos,
        velocities=vel,
        protons=protons,
        alive=alive,
        acid=acid,
        tissue=tissue,
        t=state.t + tau,
        clamp_events=clamps,
    )


def survival_fraction(state: MicroState, m0: int) -> float:
    """Alive fraction of the initial population."""
    if m0 < 1:
        raise ConfigInvalid("initial population must be at least 1")
    return state.alive_count() / m0


def run_micro(cfg: MicroConfig, rng: RngStream):
    """Run the configured number of steps; returns the final state and the
    per-step alive counts (the count before any step first)."""
    state = micro_init(cfg)
    alive_series = [state.alive_count()]
    for _ in range(cfg.n_steps):
        state = micro_step(state, cfg, rng)
        alive_series.append(state.alive_count())
    return state, alive_series


# ---------------------------------------------------------------------------
# macroscopic views
# ---------------------------------------------------------------------------


def deposit_fields(state: MicroState, cfg: MicroConfig):
    """Kernel-smoothed macroscopic acid and tissue fields.

    The smoothing kernel integrates to one, so total mass is preserved; a
    vanishing bandwidth returns the fields unchanged.
    """
    acid = periodic_gaussian_blur(state.acid, state.grid, cfg.deposit_bandwidth)
    tissue = periodic_gaussian_blur(state.tissue, state.grid, cfg.deposit_bandwidth)
    return GridField(state.grid, acid), GridField(state.grid, tissue)


def density_histogram(state: MicroState, grid: Grid) -> GridField:
    """Normalized position histogram of the alive particles (sums to 1)."""
    if state.alive_count() == 0:
        raise NoAliveParticles("no alive particles to bin")
    pos = state.positions[state.alive]
    mx, my = grid.shape
    dx, dy = grid.spacings
    i = np.floor(pos[:, 0] / dx).astype(int) % mx
    j = np.floor(pos[:, 1] / dy).astype(int) % my
    counts = np.zeros(grid.shape)
    np.add.at(counts, (i, j), 1.0)
    return GridField(grid, counts / counts.sum())
