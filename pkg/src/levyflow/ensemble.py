"""Monte Carlo ensembles over the micro and macro simulations.

Sample ``i`` always draws from stream index ``i`` of the base seed, and the
accumulator consumes results in sample-id order no matter how many workers
ran them, so ensemble statistics are bit-identical across worker counts.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .drivers import RngStream
from .errors import ConfigInvalid, EnsembleSampleError
from .macro import MacroConfig, run_macro
from .micro import MicroConfig, run_micro, survival_fraction


@dataclass(frozen=True)
class EnsembleConfig:
    n_samples: int = 500
    base_seed: int = 20240901
    snapshot_steps: tuple = ()
    export_sample_ids: tuple = ()
    workers: int = 1

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigInvalid("need at least one sample")
        if self.workers < 1:
            raise ConfigInvalid("need at least one worker")


# ---------------------------------------------------------------------------
# streaming moments
# ---------------------------------------------------------------------------


class WelfordAccumulator:
    """Single-pass mean/M2 accumulator for arrays (elementwise)."""

    def __init__(self):
        self.count = 0
        self.mean = None
        self.m2 = None

    def add(self, sample):
        sample = np.asarray(sample, dtype=float)
        self.count += 1
        if self.count == 1:
            self.mean = sample.copy()
            self.m2 = np.zeros_like(sample)
            return
        delta = sample - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (sample - self.mean)

    def variance(self):
        """Sample variance (ddof=1); zero for fewer than two samples."""
        if self.count < 2:
            return np.zeros_like(self.mean) if self.mean is not None else None
        return self.m2 / (self.count - 1)

    def moments(self):
        return self.count, self.mean, self.m2


def welford_merge(partials):
    """Merge (count, mean, M2) partials; equals the moments of the pooled data.

    An empty or zero-count partial acts as the identity.
    """
    count = 0
    mean = None
    m2 = None
    for c, m, s in partials:
        if c == 0:
            continue
        m = np.asarray(m, dtype=float)
        s = np.asarray(s, dtype=float)
        if count == 0:
            count, mean, m2 = c, m.copy(), s.copy()
            continue
        total = count + c
        delta = m - mean
        mean = mean + delta * (c / total)
        m2 = m2 + s + delta * delta * (count * c / total)
        count = total
    return count, mean, m2


# ---------------------------------------------------------------------------
# per-sample runners (top level so worker processes can pickle them)
# ---------------------------------------------------------------------------


def _macro_sample(args):
    cfg, base_seed, sample_id, snapshot_steps = args
    rng = RngStream(base_seed, sample_id)
    snapshots, stats = run_macro(cfg, rng, snapshot_steps=snapshot_steps)
    stack = np.stack([np.stack([s.h, s.c, s.n]) for s in snapshots])
    return sample_id, stack, stats.clamp_events, stats.max_residual


def _micro_sample(args):
    cfg, base_seed, sample_id = args
    rng = RngStream(base_seed, sample_id)
    state, alive_series = run_micro(cfg, rng)
    fields = np.stack([state.acid, state.tissue])
    return (
        sample_id,
        survival_fraction(state, cfg.n_particles),
        fields,
        state.clamp_events,
        np.asarray(alive_series),
    )


@dataclass
class EnsembleStats:
    kind: str
    n_samples: int
    snapshot_steps: tuple
    mean: np.ndarray
    variance: np.ndarray
    moments: tuple
    clamp_events: int = 0
    max_residual: float = 0.0
    survival_samples: list = field(default_factory=list)
    exported: dict = field(default_factory=dict)

    @property
    def survival_mean(self):
        return float(np.mean(self.survival_samples)) if self.survival_samples else None

    @property
    def survival_stderr(self):
        if len(self.survival_samples) < 2:
            return 0.0
        return float(np.std(self.survival_samples, ddof=1) / np.sqrt(len(self.survival_samples)))


def _map_samples(fn, payloads, workers):
    if workers == 1:
        for payload in payloads:
            yield fn(payload)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(fn, payloads, chunksize=1)


def run_ensemble(kind: str, cfg, ens: EnsembleConfig) -> EnsembleStats:
    """Run ``ens.n_samples`` independent simulations and stream the moments.

    A failing sample aborts the whole ensemble; the raised error names the
    seed pair needed to replay it.  Accumulation order is fixed by sample
    id, so results do not depend on worker count or scheduling.
    """
    if kind not in ("micro", "macro"):
        raise ConfigInvalid(f"unknown ensemble kind {kind!r}")
    acc = WelfordAccumulator()
    stats = EnsembleStats(
        kind=kind,
        n_samples=ens.n_samples,
        snapshot_steps=tuple(ens.snapshot_steps),
        mean=None,
        variance=None,
        moments=None,
    )
    export = set(ens.export_sample_ids)

    if kind == "macro":
        if not isinstance(cfg, MacroConfig):
            raise ConfigInvalid("macro ensemble needs a MacroConfig")
        steps = tuple(ens.snapshot_steps) or (0, cfg.n_steps)
        stats.snapshot_steps = steps
        payloads = [(cfg, ens.base_seed, i, steps) for i in range(ens.n_samples)]
        results = {}
        next_id = 0
        try:
            for sample_id, stack, clamps, residual in _map_samples(
                _macro_sample, payloads, ens.workers
            ):
                results[sample_id] = (stack, clamps, residual)
                while next_id in results:
                    stack_i, clamps_i, residual_i = results.pop(next_id)
                    acc.add(stack_i)
                    stats.clamp_events += clamps_i
                    stats.max_residual = max(stats.max_residual, residual_i)
                    if next_id in export:
                        stats.exported[next_id] = stack_i
                    next_id += 1
        except Exception as exc:  # noqa: BLE001 - context added, then re-raised
            if isinstance(exc, EnsembleSampleError):
                raise
            raise EnsembleSampleError(ens.base_seed, next_id, exc) from exc
    else:
        if not isinstance(cfg, MicroConfig):
            raise ConfigInvalid("micro ensemble needs a MicroConfig")
        payloads = [(cfg, ens.base_seed, i) for i in range(ens.n_samples)]
        results = {}
        next_id = 0
        try:
            for sample_id, survival, fields, clamps, alive in _map_samples(
                _micro_sample, payloads, ens.workers
            ):
                results[sample_id] = (survival, fields, clamps, alive)
                while next_id in results:
                    surv_i, fields_i, clamps_i, alive_i = results.pop(next_id)
                    acc.add(fields_i)
                    stats.survival_samples.append(surv_i)
                    stats.clamp_events += clamps_i
                    if next_id in export:
                        stats.exported[next_id] = alive_i
                    next_id += 1
        except Exception as exc:  # noqa: BLE001
            if isinstance(exc, EnsembleSampleError):
                raise
            raise EnsembleSampleError(ens.base_seed, next_id, exc) from exc

    stats.mean = acc.mean
    stats.variance = acc.variance()
    stats.moments = acc.moments()
    return stats
