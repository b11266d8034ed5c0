"""Randomness: seeded counter-based streams, the micro-model noise laws,
the bounded scalar driver processes, and the truncated Q-Wiener sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import NonpositiveDt, NyquistViolation, OutOfHorizon
from .grids import Grid, GridField


# ---------------------------------------------------------------------------
# counter-based RNG streams
# ---------------------------------------------------------------------------


class RngStream:
    """One independently seeded draw stream.

    Built on the Philox4x64 counter-based generator with key
    ``(base_seed, stream_index)``: identical pairs replay bit-exactly and
    distinct stream indices give statistically independent streams, so a
    Monte Carlo sample id can be used directly as the stream index.

    A stream is single-owner mutable state; never share one across workers.
    """

    algorithm = "philox4x64"

    def __init__(self, base_seed: int, stream_index: int = 0):
        self.base_seed = int(base_seed) & 0xFFFFFFFFFFFFFFFF
        self.stream_index = int(stream_index) & 0xFFFFFFFFFFFFFFFF
        self._gen = np.random.Generator(
            np.random.Philox(key=[self.base_seed, self.stream_index])
        )

    def substream(self, stream_index: int) -> "RngStream":
        return RngStream(self.base_seed, stream_index)

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def uniform(self, size=None):
        return self._gen.random(size)

    def laplace(self, size=None):
        return self._gen.laplace(0.0, 1.0, size)

    def triangular(self, left, mode, right, size=None):
        return self._gen.triangular(left, mode, right, size)

    def cauchy(self, size=None):
        return self._gen.standard_cauchy(size)

    def exponential(self, size=None):
        return self._gen.exponential(1.0, size)

    def integers(self, low, high, size=None):
        return self._gen.integers(low, high, size=size)


# ---------------------------------------------------------------------------
# micro-model noise laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianNoise:
    mean: float = 0.0
    sd: float = 1.0


@dataclass(frozen=True)
class SwitchingNoise:
    """Mixture selected per draw by a uniform variable U:

    U in [0, .3)  -> standard normal,
    U in [.3, .5) -> Laplace(0, 1),
    else          -> Triangular(-4, 0, 8).
    """

    weights: tuple = (0.3, 0.2, 0.5)
    triangular: tuple = (-4.0, 0.0, 8.0)

    def __post_init__(self):
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("switching weights must sum to 1")
        left, mode, right = self.triangular
        if not left <= mode <= right:
            raise ValueError("triangular parameters must satisfy left <= mode <= right")


@dataclass(frozen=True)
class CauchyModulatedNoise:
    """``amplitude * sin(sigma) * N(0,1)`` with a fresh Cauchy modulator sigma
    per draw; the sine keeps the output scale bounded by the amplitude."""

    amplitude: float = 10.0


def switching_select(u):
    """Law index (0 normal, 1 Laplace, 2 triangular) from the uniform draw."""
    u = np.asarray(u)
    return np.where(u < 0.3, 0, np.where(u < 0.5, 1, 2))


def cauchy_modulated_increment(sigma, z, dt, amplitude=10.0):
    """Deterministic kernel of the modulated law; zero when sigma is zero."""
    return amplitude * np.sin(sigma) * math.sqrt(dt) * np.asarray(z)


def draw_noise(model, rng: RngStream, dt: float, size=None):
    """One velocity-noise increment (or an array of them).

    Every law is scaled by sqrt(dt) so the Gaussian case reproduces a
    Wiener increment and the laws stay comparable at any step size.  The
    switching law draws the uniform selector first, then candidate values
    from all three laws, and keeps the selected one.
    """
    if dt <= 0:
        raise NonpositiveDt(f"dt must be positive, got {dt}")
    root_dt = math.sqrt(dt)
    if isinstance(model, GaussianNoise):
        return (model.mean + model.sd * rng.normal(size)) * root_dt
    if isinstance(model, SwitchingNoise):
        u = rng.uniform(size)
        choice = switching_select(u)
        left, mode, right = model.triangular
        candidates = np.stack(
            [
                np.asarray(rng.normal(size), dtype=float),
                np.asarray(rng.laplace(size), dtype=float),
                np.asarray(rng.triangular(left, mode, right, size), dtype=float),
            ]
        )
        picked = np.choose(choice, candidates)
        if size is None:
            return float(picked) * root_dt
        return picked * root_dt
    if isinstance(model, CauchyModulatedNoise):
        sigma = rng.cauchy(size)
        z = rng.normal(size)
        return cauchy_modulated_increment(sigma, z, dt, model.amplitude)
    raise TypeError(f"unknown noise model {model!r}")


# ---------------------------------------------------------------------------
# bounded scalar drivers
# ---------------------------------------------------------------------------


def bridge_value(start, end, horizon, t, w_t, w_end):
    """Gaussian bridge from ``start`` to ``end`` over [0, horizon] built from
    a Wiener path: ``((T - t) * start + T * W_t + t * (end - W_T)) / T``."""
    if not 0.0 <= t <= horizon:
        raise OutOfHorizon(f"t={t} outside [0, {horizon}]")
    return ((horizon - t) * start + horizon * w_t + t * (end - w_end)) / horizon


@dataclass
class BridgeDriver:
    """Bounded driver ``beta(t) = low + span * I_t / (1 + I_t)`` where ``I_t``
    accumulates ``sin(B_s)^2`` along a bridge pinned at ``pin_start`` and
    ``pin_end``.

    The output always stays in [low, low + span).  The underlying Wiener
    path is advanced with increments conditioned on the final value, which
    is drawn once by :meth:`init_path`.
    """

    low: float
    span: float
    pin_start: float
    pin_end: float
    horizon: float
    t: float = 0.0
    integral: float = 0.0
    w_t: float = 0.0
    w_end: float = field(default=float("nan"))

    def __post_init__(self):
        if self.span < 0:
            raise ValueError("span must be nonnegative")
        if self.horizon <= 0:
            raise OutOfHorizon("horizon must be positive")

    def init_path(self, rng: RngStream) -> "BridgeDriver":
        self.w_end = math.sqrt(self.horizon) * float(rng.normal())
        return self

    def value(self) -> float:
        return self.low + self.span * self.integral / (1.0 + self.integral)

    def bridge_at(self, t, w_t=None, w_end=None):
        w_t = self.w_t if w_t is None else w_t
        w_end = self.w_end if w_end is None else w_end
        return bridge_value(self.pin_start, self.pin_end, self.horizon, t, w_t, w_end)

    def step(self, dt: float, rng: RngStream) -> float:
        """Advance ``I`` by a left-endpoint rectangle and return beta(t+dt)."""
        if dt <= 0:
            raise NonpositiveDt(f"dt must be positive, got {dt}")
        if self.t + dt > self.horizon + 1e-12:
            raise OutOfHorizon("step leaves the bridge horizon")
        if math.isnan(self.w_end):
            raise OutOfHorizon("call init_path(rng) before stepping")
        b_now = self.bridge_at(self.t)
        self.integral += math.sin(b_now) ** 2 * dt
        remain = self.horizon - self.t
        mean_inc = dt / remain * (self.w_end - self.w_t)
        var_inc = dt * max(remain - dt, 0.0) / remain
        self.w_t += mean_inc + math.sqrt(var_inc) * float(rng.normal())
        self.t += dt
        return self.value()


@dataclass(frozen=True)
class ProtonIndexDriver:
    """Saturating exponent map ``alpha(H) = a1 + (a2 - a1) * aH / (1 + aH)``.

    Negative arguments are clamped to zero, so the output is total and
    always lies in [a1, a2].
    """

    sensitivity: float
    a1: float
    a2: float

    def __post_init__(self):
        if not self.a1 < self.a2:
            raise ValueError("need a1 < a2")
        if self.sensitivity <= 0:
            raise ValueError("sensitivity must be positive")

    def alpha_of_h(self, h):
        h = np.maximum(np.asarray(h, dtype=float), 0.0)
        x = self.sensitivity * h
        out = self.a1 + (self.a2 - self.a1) * x / (1.0 + x)
        if np.ndim(h) == 0:
            return float(out)
        return out


def alpha_of_h(driver: ProtonIndexDriver, h):
    return driver.alpha_of_h(h)


# ---------------------------------------------------------------------------
# Q-Wiener field increments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QWienerSpec:
    """Truncated cosine expansion of a trace-class Q-Wiener process.

    Mode k carries eigenvalue ``1 / (1 + k)``; tensor modes multiply the
    per-axis eigenvalues.  Basis functions are
    ``e_n(x) = sqrt(2/L) cos(2 pi n x / L)``, orthonormal on the grid.
    """

    modes: int

    def __post_init__(self):
        if self.modes < 1:
            raise ValueError("need at least one mode")

    def eigenvalues(self) -> np.ndarray:
        k = np.arange(1, self.modes + 1)
        return 1.0 / (1.0 + k)


@lru_cache(maxsize=32)
def _basis_matrix(modes: int, length: float, points: int) -> np.ndarray:
    """(modes, points) array of lambda_n * e_n(x_k)."""
    x = np.arange(points) * (length / points)
    n = np.arange(1, modes + 1)[:, None]
    lam = (1.0 / (1.0 + np.arange(1, modes + 1)))[:, None]
    return lam * np.sqrt(2.0 / length) * np.cos(2.0 * np.pi * n * x[None, :] / length)


def _check_nyquist(spec: QWienerSpec, grid: Grid):
    for m in grid.shape:
        if 2 * spec.modes > m:
            raise NyquistViolation(
                f"{spec.modes} modes exceed the Nyquist limit of a {m}-point axis"
            )


def qwiener_pointwise_variance(spec: QWienerSpec, grid: Grid, dt: float) -> np.ndarray:
    """Exact variance field ``dt * sum lambda^2 e^2 (x) e^2 (y)`` of one increment."""
    _check_nyquist(spec, grid)
    if grid.ndim == 1:
        a = _basis_matrix(spec.modes, grid.lengths[0], grid.shape[0])
        return dt * np.sum(a * a, axis=0)
    ax = _basis_matrix(spec.modes, grid.lengths[0], grid.shape[0])
    ay = _basis_matrix(spec.modes, grid.lengths[1], grid.shape[1])
    return dt * (ax * ax).sum(axis=0)[:, None] * (ay * ay).sum(axis=0)[None, :]


def sample_qwiener_increment(
    spec: QWienerSpec, grid: Grid, dt: float, rng: RngStream, gaussians=None
) -> GridField:
    """One increment field ``sqrt(dt) * sum z_{m,n} lambda_m lambda_n e_n(x) e_m(y)``.

    ``gaussians`` can inject a fixed (modes, modes) (or (modes,) in 1D)
    array in place of fresh standard normal draws.
    """
    if dt <= 0:
        raise NonpositiveDt(f"dt must be positive, got {dt}")
    _check_nyquist(spec, grid)
    root_dt = math.sqrt(dt)
    if grid.ndim == 1:
        a = _basis_matrix(spec.modes, grid.lengths[0], grid.shape[0])
        z = rng.normal(spec.modes) if gaussians is None else np.asarray(gaussians, dtype=float)
        return GridField(grid, root_dt * (z @ a))
    ax = _basis_matrix(spec.modes, grid.lengths[0], grid.shape[0])
    ay = _basis_matrix(spec.modes, grid.lengths[1], grid.shape[1])
    if gaussians is None:
        z = rng.normal((spec.modes, spec.modes))  # z[m, n]
    else:
        z = np.asarray(gaussians, dtype=float)
    # increment[k, j] = sum_{m,n} z[m,n] (lam_n e_n(x_k)) (lam_m e_m(y_j))
    return GridField(grid, root_dt * (ax.T @ z.T @ ay))
