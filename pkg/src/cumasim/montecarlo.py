"""Link-level ground truth: correlated channel draws, port activation, SIR.

Each trial draws one desired and I interfering effective channel vectors
as spatially correlated complex Gaussians, activates the ports whose
in-phase (quadrature) desired component is positive, and forms

    SIR_I = (sum of activated Re parts)^2
            / (delta * sum over interferers of (activated Re sum)^2)

with the quadrature branch analogous; the reported sample is
SIR_I + SIR_Q. Interference is accumulated per interfering stream and
squared before summing: independent data symbols decorrelate the
streams, so the per-stream powers add.

Reproducibility contract: trial t of a run draws from a dedicated
generator derived from (master seed, trial index), so results are
bit-identical regardless of execution order or worker count; metric
reductions always happen in trial order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import CorrelationMatrix
from .specfun import DomainError

__all__ = [
    "SeedSpec",
    "ChannelRealization",
    "TrialResult",
    "SimConfig",
    "draw_realization",
    "select_ports",
    "sir_sample",
    "sir_samples",
    "interference_sum_samples",
    "MCMetrics",
    "mc_metrics",
    "mc_sop",
]

_MAX_REDRAWS = 64


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus the derivation rule for per-trial streams."""

    master_seed: int

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise DomainError(f"master seed must be a u64, got {self.master_seed}")

    def rng(self, trial: int, substream: int = 0) -> np.random.Generator:
        """Generator for one (trial, substream); identical inputs give identical streams."""
        key = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(trial, substream))
        return np.random.default_rng(key)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of correlated effective channels.

    desired has shape (N,); interferers has shape (I, N). All entries are
    zero-mean complex Gaussian with per-port variance omega and the
    inter-port correlation of the generating matrix.
    """

    desired: np.ndarray
    interferers: np.ndarray

    def __post_init__(self):
        if self.desired.ndim != 1 or self.interferers.ndim != 2:
            raise DomainError("desired must be (N,), interferers (I, N)")
        if self.interferers.shape[1] != self.desired.shape[0]:
            raise DomainError("desired and interferer vectors must share the port dimension")


@dataclass(frozen=True)
class TrialResult:
    sir: float
    k_i_size: int
    k_q_size: int
    flagged: bool = False


@dataclass(frozen=True)
class SimConfig:
    """System parameters for a simulation run."""

    corr: CorrelationMatrix
    users: int
    delta: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if self.users < 2:
            raise DomainError(f"need at least 2 users, got {self.users}")
        if not 0.0 < self.delta <= 1.0:
            raise DomainError(f"delta must lie in (0, 1], got {self.delta}")
        if self.omega <= 0.0:
            raise DomainError(f"omega must be positive, got {self.omega}")

    @property
    def interferers(self) -> int:
        return self.users - 1


def _draw_vectors(rng: np.random.Generator, factor: np.ndarray, omega: float, count: int) -> np.ndarray:
    # (count, N) correlated complex Gaussians; real and imaginary parts
    # are independent with per-port variance omega/2 each.
    n = factor.shape[0]
    x = rng.standard_normal((n, count))
    y = rng.standard_normal((n, count))
    return (math.sqrt(omega / 2.0) * (factor @ x + 1j * (factor @ y))).T


def draw_realization(
    corr: CorrelationMatrix,
    omega: float,
    interferers: int,
    seed: SeedSpec,
    trial: int,
    substream: int = 0,
) -> ChannelRealization:
    """Draw the desired and interfering channel vectors for one trial."""
    if interferers < 1:
        raise DomainError(f"need at least one interferer, got {interferers}")
    if omega <= 0.0:
        raise DomainError(f"omega must be positive, got {omega}")
    rng = seed.rng(trial, substream)
    return _draw_from_rng(rng, corr.factor, omega, interferers)


def _draw_from_rng(rng, factor, omega, interferers) -> ChannelRealization:
    desired = _draw_vectors(rng, factor, omega, 1)[0]
    interf = _draw_vectors(rng, factor, omega, interferers)
    return ChannelRealization(desired=desired, interferers=interf)


def select_ports(desired: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Activated port positions (0-based) for the I and Q branches.

    A port joins K_I when the real part of its desired-channel entry is
    strictly positive (ties at exactly zero stay out); K_Q uses the
    imaginary part.
    """
    desired = np.asarray(desired)
    if desired.size == 0:
        raise DomainError("select_ports requires a nonempty vector")
    return np.flatnonzero(desired.real > 0.0), np.flatnonzero(desired.imag > 0.0)


def sir_sample(realization: ChannelRealization, delta: float) -> TrialResult:
    """Form the SIR sample of one realization.

    Flagged (excluded) when either branch has zero interference power,
    which requires an empty activation set and has probability 2^-N per
    branch.
    """
    if not 0.0 < delta <= 1.0:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    k_i, k_q = select_ports(realization.desired)
    re_d = realization.desired.real
    im_d = realization.desired.imag
    nu_i = re_d[k_i].sum() ** 2
    nu_q = im_d[k_q].sum() ** 2
    per_stream_i = realization.interferers.real[:, k_i].sum(axis=1)
    per_stream_q = realization.interferers.imag[:, k_q].sum(axis=1)
    xi_i = float(per_stream_i @ per_stream_i)
    xi_q = float(per_stream_q @ per_stream_q)
    if xi_i == 0.0 or xi_q == 0.0:
        return TrialResult(sir=math.nan, k_i_size=len(k_i), k_q_size=len(k_q), flagged=True)
    sir = nu_i / (delta * xi_i) + nu_q / (delta * xi_q)
    return TrialResult(sir=float(sir), k_i_size=len(k_i), k_q_size=len(k_q))


@dataclass
class SampleSet:
    """Per-trial outputs of a run, in trial order."""

    sir: np.ndarray
    k_i_sizes: np.ndarray
    k_q_sizes: np.ndarray
    redrawn: int
    sir_i: np.ndarray | None = None


def _run_trials(config: SimConfig, trials: range, seed: SeedSpec, substream: int, keep_branch: bool):
    factor = config.corr.factor
    out = np.empty(len(trials))
    out_i = np.empty(len(trials)) if keep_branch else None
    ki = np.empty(len(trials), dtype=np.int64)
    kq = np.empty(len(trials), dtype=np.int64)
    redrawn = 0
    for j, t in enumerate(trials):
        rng = seed.rng(t, substream)
        for _ in range(_MAX_REDRAWS):
            real = _draw_from_rng(rng, factor, config.omega, config.interferers)
            res = sir_sample(real, config.delta)
            if not res.flagged:
                break
            redrawn += 1
        else:
            raise DomainError(f"trial {t}: interference power stayed zero after {_MAX_REDRAWS} redraws")
        out[j] = res.sir
        ki[j] = res.k_i_size
        kq[j] = res.k_q_size
        if keep_branch:
            k_i, _ = select_ports(real.desired)
            nu_i = real.desired.real[k_i].sum() ** 2
            s_i = real.interferers.real[:, k_i].sum(axis=1)
            out_i[j] = nu_i / (config.delta * float(s_i @ s_i))
    return out, ki, kq, redrawn, out_i


def sir_samples(
    config: SimConfig,
    trials: int,
    seed: SeedSpec,
    substream: int = 0,
    keep_branch: bool = False,
    workers: int = 1,
) -> SampleSet:
    """Draw `trials` independent SIR samples.

    Worker count only affects wall time: per-trial streams and in-order
    assembly make the output identical for any scheduling.
    """
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    if workers <= 1:
        sir, ki, kq, redrawn, sir_i = _run_trials(config, range(trials), seed, substream, keep_branch)
    else:
        chunk = max(256, trials // (workers * 8))
        ranges = [range(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda r: _run_trials(config, r, seed, substream, keep_branch), ranges))
        sir = np.concatenate([p[0] for p in parts])
        ki = np.concatenate([p[1] for p in parts])
        kq = np.concatenate([p[2] for p in parts])
        redrawn = sum(p[3] for p in parts)
        sir_i = np.concatenate([p[4] for p in parts]) if keep_branch else None
    return SampleSet(sir=sir, k_i_sizes=ki, k_q_sizes=kq, redrawn=redrawn, sir_i=sir_i)


def interference_sum_samples(
    config: SimConfig,
    trials: int,
    seed: SeedSpec,
    substream: int = 0,
) -> np.ndarray:
    """Per-interferer activated in-phase sums, shape (trials, I).

    These are the pre-squared quantities whose variance the analytic
    sigma2^2 models; used for variance calibration.
    """
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    factor = config.corr.factor
    out = np.empty((trials, config.interferers))
    for t in range(trials):
        rng = seed.rng(t, substream)
        real = _draw_from_rng(rng, factor, config.omega, config.interferers)
        k_i, _ = select_ports(real.desired)
        out[t] = real.interferers.real[:, k_i].sum(axis=1)
    return out


@dataclass(frozen=True)
class MCMetrics:
    er: float
    er_stderr: float
    op: tuple[float, ...]
    op_stderr: tuple[float, ...]
    gamma_grid: tuple[float, ...]
    mean_sir: float
    mean_k_i: float
    trials: int
    redrawn: int


def mc_metrics(
    config: SimConfig,
    trials: int,
    seed: SeedSpec,
    gamma_grid: tuple[float, ...] = (1.0,),
    workers: int = 1,
) -> MCMetrics:
    """Empirical ergodic rate and outage probabilities.

    ER is U * mean(log2(1 + sir)); OP at threshold g is the fraction of
    trials with log2(1 + sir) < g. Standard errors are sample estimates.
    """
    samples = sir_samples(config, trials, seed, workers=workers)
    rates = np.log2(1.0 + samples.sir)
    u = config.users
    er = u * float(rates.mean())
    er_se = u * float(rates.std(ddof=1)) / math.sqrt(trials)
    op = []
    op_se = []
    for g in gamma_grid:
        p = float(np.mean(rates < g))
        op.append(p)
        op_se.append(math.sqrt(p * (1.0 - p) / trials))
    return MCMetrics(
        er=er,
        er_stderr=er_se,
        op=tuple(op),
        op_stderr=tuple(op_se),
        gamma_grid=tuple(gamma_grid),
        mean_sir=float(samples.sir.mean()),
        mean_k_i=float(samples.k_i_sizes.mean()),
        trials=trials,
        redrawn=samples.redrawn,
    )


def mc_sop(
    config_b: SimConfig,
    config_e: SimConfig,
    rs: float,
    trials: int,
    seed: SeedSpec,
    workers: int = 1,
) -> tuple[float, float]:
    """Empirical secrecy outage probability and its binomial standard error.

    Bob and Eve use disjoint substreams of the same master seed, so their
    channels are independent yet the run is reproducible.
    """
    if rs < 0.0:
        raise DomainError(f"secrecy rate must be nonnegative, got {rs}")
    bob = sir_samples(config_b, trials, seed, substream=0, workers=workers)
    eve = sir_samples(config_e, trials, seed, substream=1, workers=workers)
    secrecy = np.maximum(0.0, np.log2(1.0 + bob.sir) - np.log2(1.0 + eve.sir))
    p = float(np.mean(secrecy < rs))
    return p, math.sqrt(p * (1.0 - p) / trials)
