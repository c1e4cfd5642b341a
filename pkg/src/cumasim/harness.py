"""Sweep driver: figure-style parameter sweeps with CSV emission.

A sweep walks one axis (number of users, secrecy rate, Bob's residual
interference factor, or Bob's total port count) and evaluates the
requested metrics three ways per point: closed-form approximation,
exact quadrature (optional, costly for many interferers) and Monte
Carlo with standard errors.

Rates are log2(1 + raw SIR) on every route. Distribution-level
comparisons (the KS checks) rescale SIR samples by sigma2^2 and use the
correspondingly scaled fit, which leaves the statistic unchanged; the
closed-form rate and outage formulas receive the scaled fit parameter so
that their implied rate variable is the raw SIR, while the secrecy bound
compares the two raw-unit scales directly.
"""

from __future__ import annotations

import dataclasses
import io
import math
from dataclasses import dataclass

import numpy as np

from . import analytic, approx, montecarlo
from .analytic import ChannelStats
from .geometry import (
    HANDSET_APERTURE_M,
    PortGrid,
    PRESETS,
    correlation_matrix,
    grid_from_aperture,
    preset_grid,
)
from .montecarlo import SeedSpec, SimConfig
from .specfun import DomainError

__all__ = [
    "SweepSpec",
    "Row",
    "ComparisonReport",
    "KSReport",
    "run_sweep",
    "compare_distributions",
    "ks_statistic",
    "parse_config",
    "CSV_HEADER",
]

_AXES = ("users", "rs", "delta_b", "ports")
_METRICS = ("er", "op", "sop", "sop_lower")
_SOP_METRICS = ("sop", "sop_lower")
_EXACT_MODES = ("auto", "on", "off")
_PORTS_AXIS_N1_SPACING = 0.05  # ports axis densifies dimension 2 of the 6 GHz VC layout

CSV_HEADER = "axis_value,metric,analytic_approx,analytic_exact,mc_mean,mc_stderr,trials,seed"


@dataclass(frozen=True)
class SweepSpec:
    """Declarative description of one sweep."""

    axis: str
    values: tuple[float, ...]
    metrics: tuple[str, ...]
    preset: str | None = None
    eve_preset: str | None = None
    users: int = 20
    gamma_th: float = 1.0
    rs: float = 1.0
    delta_b: float = 1.0
    delta_e: float = 1.0
    omega: float = 1.0
    trials: int = 10_000
    seed: int = 0
    quad_tol: float = 1e-6
    exact: str = "auto"
    mc: bool = True
    out: str | None = None
    schema: int = 1

    def __post_init__(self):
        if self.schema != 1:
            raise DomainError(f"unsupported sweep schema {self.schema}")
        if self.axis not in _AXES:
            raise DomainError(f"axis must be one of {_AXES}, got {self.axis!r}")
        if not self.values:
            raise DomainError("sweep needs at least one axis value")
        if not self.metrics:
            raise DomainError("sweep needs at least one metric")
        bad = [m for m in self.metrics if m not in _METRICS]
        if bad:
            raise DomainError(f"unknown metrics {bad}; known: {_METRICS}")
        if self.exact not in _EXACT_MODES:
            raise DomainError(f"exact must be one of {_EXACT_MODES}, got {self.exact!r}")
        if self.axis == "ports":
            if self.preset is not None:
                raise DomainError("the ports axis builds its own grids; drop the preset")
            if any(v != int(v) or v < 2 for v in self.values):
                raise DomainError("ports-axis values are integer row counts >= 2")
        elif self.preset is None:
            raise DomainError(f"axis {self.axis!r} requires a preset")
        elif self.preset not in PRESETS:
            raise DomainError(f"unknown preset {self.preset!r}; known: {', '.join(PRESETS)}")
        if any(m in _SOP_METRICS for m in self.metrics):
            if self.eve_preset is None:
                raise DomainError("secrecy metrics require eve_preset")
            if self.eve_preset not in PRESETS:
                raise DomainError(f"unknown eve preset {self.eve_preset!r}")
        if self.axis == "users" and any(v != int(v) or v < 2 for v in self.values):
            raise DomainError("users-axis values must be integers >= 2")
        if self.axis == "delta_b" and any(not 0.0 < v <= 1.0 for v in self.values):
            raise DomainError("delta_b values must lie in (0, 1]")
        if self.axis == "rs" and any(v < 0.0 for v in self.values):
            raise DomainError("rs values must be nonnegative")
        if self.mc and self.trials < 1000:
            raise DomainError("Monte Carlo sweeps need at least 1000 trials")


@dataclass(frozen=True)
class Row:
    axis_value: float
    metric: str
    analytic_approx: float
    analytic_exact: float | None
    mc_mean: float | None
    mc_stderr: float | None
    trials: int
    seed: int


@dataclass(frozen=True)
class ComparisonReport:
    spec: SweepSpec
    rows: tuple[Row, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for r in self.rows:
            cells = [
                _fmt(r.axis_value),
                r.metric,
                _fmt(r.analytic_approx),
                _fmt(r.analytic_exact),
                _fmt(r.mc_mean),
                _fmt(r.mc_stderr),
                str(r.trials),
                str(r.seed),
            ]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    def write(self, path: str) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_csv())


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float) and v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return format(v, ".12g")


@dataclass(frozen=True)
class _Side:
    """One terminal's grid, analytic bundle and simulation config."""

    stats: ChannelStats
    config: SimConfig

    @classmethod
    def build(cls, grid: PortGrid, users: int, delta: float, omega: float) -> "_Side":
        corr = correlation_matrix(grid)
        stats = ChannelStats.from_grid(grid, users, delta=delta, omega=omega)
        return cls(stats=stats, config=SimConfig(corr=corr, users=users, delta=delta, omega=omega))

    def with_users(self, users: int) -> "_Side":
        stats = dataclasses.replace(self.stats, interferers=users - 1)
        config = dataclasses.replace(self.config, users=users)
        return _Side(stats=stats, config=config)

    def with_delta(self, delta: float) -> "_Side":
        return _Side(
            stats=dataclasses.replace(self.stats, delta=delta),
            config=dataclasses.replace(self.config, delta=delta),
        )

    def beta_scaled(self) -> float:
        """Gamma-fit scale in the sigma2^2-rescaled units used for comparisons."""
        return self.stats.sigma2_sq * approx.beta_I(self.stats)

    def beta_raw(self) -> float:
        """Gamma-fit scale in raw-SIR units (the rate variable's units)."""
        return approx.beta_I(self.stats)


def _ports_axis_grid(n2: int) -> PortGrid:
    freq = PRESETS["6GHz-VC"].freq_hz
    base = grid_from_aperture(*HANDSET_APERTURE_M, freq, _PORTS_AXIS_N1_SPACING, 0.5)
    return PortGrid(n1=base.n1, n2=n2, w1=base.w1, w2=base.w2)


def run_sweep(spec: SweepSpec) -> ComparisonReport:
    """Evaluate the sweep and (optionally) write its CSV."""
    seed = SeedSpec(spec.seed)
    rows: list[Row] = []

    bob_base = None
    if spec.axis != "ports":
        bob_base = _Side.build(preset_grid(spec.preset), spec.users, spec.delta_b, spec.omega)
    eve_base = None
    if any(m in _SOP_METRICS for m in spec.metrics):
        eve_base = _Side.build(preset_grid(spec.eve_preset), spec.users, spec.delta_e, spec.omega)

    for v in spec.values:
        if spec.axis == "users":
            users = int(v)
            bob = bob_base.with_users(users)
            eve = eve_base.with_users(users) if eve_base else None
            axis_value, rs = float(users), spec.rs
        elif spec.axis == "rs":
            bob, eve = bob_base, eve_base
            axis_value, rs = float(v), float(v)
        elif spec.axis == "delta_b":
            bob = bob_base.with_delta(float(v))
            eve = eve_base
            axis_value, rs = float(v), spec.rs
        else:  # ports
            grid = _ports_axis_grid(int(v))
            bob = _Side.build(grid, spec.users, spec.delta_b, spec.omega)
            eve = eve_base
            axis_value, rs = float(grid.total_ports), spec.rs

        exact_on = spec.exact == "on" or (spec.exact == "auto" and bob.stats.interferers <= 19)
        rows.extend(
            _point_rows(spec, axis_value, bob, eve, rs, seed, exact_on)
        )

    report = ComparisonReport(spec=spec, rows=tuple(rows))
    if spec.out:
        report.write(spec.out)
    return report


def _point_rows(spec, axis_value, bob, eve, rs, seed, exact_on):
    tau_metrics = [m for m in spec.metrics if m in _SOP_METRICS]
    bob_samples = eve_samples = None
    if spec.mc:
        bob_samples = montecarlo.sir_samples(bob.config, spec.trials, seed, substream=0)
        if tau_metrics:
            eve_samples = montecarlo.sir_samples(eve.config, spec.trials, seed, substream=1)

    beta_b = bob.beta_scaled()
    s2_b = bob.stats.sigma2_sq
    n = spec.trials
    rows = []
    for metric in spec.metrics:
        exact_val = mc_mean = mc_se = None
        if metric == "er":
            approx_val = approx.approx_er(bob.config.users, beta_b, s2_b)
            if exact_on:
                exact_val = analytic.exact_er(bob.config.users, bob.stats, spec.quad_tol)
            if bob_samples is not None:
                rates = np.log2(1.0 + bob_samples.sir)
                mc_mean = bob.config.users * float(rates.mean())
                mc_se = bob.config.users * float(rates.std(ddof=1)) / math.sqrt(n)
        elif metric == "op":
            approx_val = approx.approx_op(spec.gamma_th, beta_b, s2_b)
            if exact_on:
                exact_val = analytic.exact_op(spec.gamma_th, bob.stats, spec.quad_tol)
            if bob_samples is not None:
                p = float(np.mean(np.log2(1.0 + bob_samples.sir) < spec.gamma_th))
                mc_mean, mc_se = p, math.sqrt(p * (1.0 - p) / n)
        elif metric == "sop":
            approx_val = approx.sop_lower_closed(bob.beta_raw(), eve.beta_raw(), rs)
            if exact_on:
                exact_val = analytic.exact_sop(bob.stats, eve.stats, rs, spec.quad_tol)
            if bob_samples is not None:
                cs = np.maximum(0.0, np.log2(1.0 + bob_samples.sir) - np.log2(1.0 + eve_samples.sir))
                p = float(np.mean(cs < rs))
                mc_mean, mc_se = p, math.sqrt(p * (1.0 - p) / n)
        else:  # sop_lower
            approx_val = approx.sop_lower_closed(bob.beta_raw(), eve.beta_raw(), rs)
            if exact_on:
                exact_val = analytic.sop_lower_numeric(bob.stats, eve.stats, rs, spec.quad_tol)
            if bob_samples is not None:
                tau = 2.0**rs
                p = float(np.mean(bob_samples.sir < tau * eve_samples.sir))
                mc_mean, mc_se = p, math.sqrt(p * (1.0 - p) / n)
        rows.append(
            Row(
                axis_value=axis_value,
                metric=metric,
                analytic_approx=approx_val,
                analytic_exact=exact_val,
                mc_mean=mc_mean,
                mc_stderr=mc_se,
                trials=spec.trials,
                seed=spec.seed,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# distribution comparison
# ---------------------------------------------------------------------------


def ks_statistic(samples: np.ndarray, cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic against a callable CDF."""
    s = np.sort(np.asarray(samples, dtype=float))
    n = len(s)
    if n == 0:
        raise DomainError("KS statistic needs at least one sample")
    f = np.asarray([cdf(x) for x in s])
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    return float(max(np.max(np.abs(hi - f)), np.max(np.abs(lo - f))))


@dataclass(frozen=True)
class KSReport:
    ks_total: float
    ks_inphase: float
    ks_total_exact: float | None
    beta_scaled: float
    trials: int


def compare_distributions(
    grid: PortGrid,
    users: int,
    trials: int,
    seed: SeedSpec,
    delta: float = 1.0,
    omega: float = 1.0,
    include_exact: bool = False,
    quad_tol: float = 1e-6,
    beta_factor: float = 1.0,
) -> KSReport:
    """KS distances between simulated SIR samples and the fitted laws.

    Samples are rescaled by sigma2^2; the total SIR is tested against the
    exponential fit and the in-phase branch against the Gamma(1/2) fit.
    ``beta_factor`` deliberately mis-scales the fit for negative controls.
    Setting ``include_exact`` also reports the distance to the exact
    (quadrature) distribution, which is the model-validation number.
    """
    side = _Side.build(grid, users, delta, omega)
    samples = montecarlo.sir_samples(side.config, trials, seed, keep_branch=True)
    s2 = side.stats.sigma2_sq
    beta = side.beta_scaled() * beta_factor
    z = s2 * samples.sir
    z_i = s2 * samples.sir_i
    ks_total = ks_statistic(z, lambda x: approx.approx_cdf_z(x, beta))
    ks_i = ks_statistic(z_i, lambda x: math.erf(math.sqrt(max(x, 0.0) / beta)))
    ks_exact = None
    if include_exact:
        # interpolate the exact CDF through a fixed grid; direct quadrature
        # per sample would be needlessly slow
        zs = np.quantile(samples.sir, np.linspace(0.0, 1.0, 257))
        table = np.asarray([analytic.exact_cdf_z(x, side.stats, quad_tol) for x in zs])
        ks_exact = ks_statistic(samples.sir, lambda x: float(np.interp(x, zs, table)))
    return KSReport(
        ks_total=ks_total,
        ks_inphase=ks_i,
        ks_total_exact=ks_exact,
        beta_scaled=beta,
        trials=trials,
    )


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def parse_config(text: str) -> SweepSpec:
    """Parse the key = value sweep format (schema field required)."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise DomainError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, val = body.split("=", 1)
        raw[key.strip().lower()] = val.strip()
    if "schema" not in raw:
        raise DomainError("config is missing the schema field")

    def take(key, conv, default):
        if key not in raw:
            return default
        try:
            return conv(raw.pop(key))
        except (TypeError, ValueError) as exc:
            raise DomainError(f"config field {key}: {exc}") from None

    def floats(s):
        return tuple(float(p) for p in s.replace(",", " ").split())

    def words(s):
        return tuple(p.strip() for p in s.replace(",", " ").split())

    spec = SweepSpec(
        schema=take("schema", int, 1),
        axis=take("axis", str, ""),
        values=take("values", floats, ()),
        metrics=take("metrics", words, ()),
        preset=take("preset", str, None),
        eve_preset=take("eve_preset", str, None),
        users=take("users", int, 20),
        gamma_th=take("gamma_th", float, 1.0),
        rs=take("rs", float, 1.0),
        delta_b=take("delta_b", float, 1.0),
        delta_e=take("delta_e", float, 1.0),
        omega=take("omega", float, 1.0),
        trials=take("trials", int, 10_000),
        seed=take("seed", int, 0),
        quad_tol=take("quad_tol", float, 1e-6),
        exact=take("exact", str, "auto"),
        mc=take("mc", lambda s: _BOOL[s.lower()], True),
        out=take("out", str, None),
    )
    if raw:
        raise DomainError(f"unknown config fields: {', '.join(sorted(raw))}")
    return spec
