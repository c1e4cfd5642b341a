"""Closed-form Gamma/exponential approximations of the SIR distributions.

The in-phase density behaves like a0 * z^(-1/2) as z -> 0; matching a
Gamma(1/2, beta) density to that asymptote gives beta = 1 / (pi a0^2).
The sum of the two i.i.d. branches is then exactly Gamma(1, beta), i.e.
exponential, which yields closed forms for ergodic rate, outage and the
secrecy-outage lower bound.

The linear coefficient uses E[sqrt(Q)] = sqrt(2) Gamma((I+1)/2) / Gamma(I/2)
for the chi-square interference power Q with one degree of freedom per
interferer:

    a0 = exp(-mu^2 / (2 sigma1^2)) * sqrt(delta) * sigma2 * E[sqrt(Q)]
         / (sqrt(2 pi) * sigma1)

All quantities are carried in the log domain internally; the tail factor
exp(-mu^2 / (2 sigma1^2)) is far below underflow for very large arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analytic import ChannelStats
from .specfun import DomainError, e1_scaled, log_gamma

__all__ = [
    "GammaFit",
    "AsymptoteCoeffs",
    "asymptote_coeffs",
    "beta_I",
    "log_beta_I",
    "approx_pdf_zI",
    "approx_pdf_z",
    "approx_cdf_z",
    "approx_er",
    "approx_op",
    "sop_lower_closed",
]

LN_PI = math.log(math.pi)
LN2 = math.log(2.0)


@dataclass(frozen=True)
class GammaFit:
    """Shape/scale of a fitted Gamma distribution.

    The in-phase fit has alpha = 1/2 exactly; the total-SIR fit has
    alpha = 1 exactly (exponential).
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise DomainError(f"GammaFit requires positive parameters, got {self}")


@dataclass(frozen=True)
class AsymptoteCoeffs:
    """Small-z behavior of the in-phase density and its two-branch convolution.

    f_I(z) ~ a0 * z^b0 with b0 = -1/2; combining J = 2 i.i.d. Gamma(1/2)
    branches gives linear coefficient c0 = 1 / beta and combined order
    d0 = 1 + sum of branch shapes = 2 (the convolved density's exponent
    near zero is d0 - 2, and the fitted total shape is d0 - 1 = 1).
    """

    a0: float
    b0: float
    c0: float
    d0: float

    def __post_init__(self):
        if self.a0 <= 0.0 or self.c0 <= 0.0:
            raise DomainError("linear coefficients must be positive")


def _log_a0(stats: ChannelStats) -> float:
    i_cnt = stats.interferers
    return (
        -stats.mu**2 / (2.0 * stats.sigma1_sq)
        + 0.5 * math.log(stats.delta * stats.sigma2_sq / stats.sigma1_sq)
        - 0.5 * LN_PI
        + log_gamma(0.5 * (i_cnt + 1))
        - log_gamma(0.5 * i_cnt)
    )


def log_beta_I(stats: ChannelStats) -> float:
    """log of the asymptote-matched Gamma scale (finite even when beta overflows)."""
    return -LN_PI - 2.0 * _log_a0(stats)


def beta_I(stats: ChannelStats) -> float:
    """Asymptote-matched scale beta = 1 / (pi a0^2) of the Gamma(1/2) fit."""
    return math.exp(log_beta_I(stats))


def asymptote_coeffs(stats: ChannelStats) -> AsymptoteCoeffs:
    """Linear and angular coefficients of the exact densities near zero."""
    a0 = math.exp(_log_a0(stats))
    beta = beta_I(stats)
    return AsymptoteCoeffs(a0=a0, b0=-0.5, c0=1.0 / beta, d0=2.0)


def gamma_fit_zI(stats: ChannelStats) -> GammaFit:
    return GammaFit(alpha=0.5, beta=beta_I(stats))


def gamma_fit_z(stats: ChannelStats) -> GammaFit:
    return GammaFit(alpha=1.0, beta=beta_I(stats))


def approx_pdf_zI(z: float, beta: float) -> float:
    """Gamma(1/2, beta) density: z^(-1/2) exp(-z/beta) / sqrt(pi beta)."""
    if beta <= 0.0:
        raise DomainError(f"beta must be positive, got {beta}")
    if z <= 0.0:
        raise DomainError(f"approx_pdf_zI requires z > 0, got {z}")
    return math.exp(-z / beta) / math.sqrt(math.pi * beta * z)


def approx_pdf_z(z: float, beta: float) -> float:
    """Exponential density exp(-z/beta)/beta for the total variable."""
    if beta <= 0.0:
        raise DomainError(f"beta must be positive, got {beta}")
    if z < 0.0:
        raise DomainError(f"approx_pdf_z requires z >= 0, got {z}")
    return math.exp(-z / beta) / beta


def approx_cdf_z(z: float, beta: float) -> float:
    """Exponential CDF 1 - exp(-z/beta); zero for z <= 0."""
    if beta <= 0.0:
        raise DomainError(f"beta must be positive, got {beta}")
    if z <= 0.0:
        return 0.0
    return -math.expm1(-z / beta)


def _exp_e1(x: float) -> float:
    # e^x Gamma(0, x); series-free asymptote below 1e-15 where e1_scaled
    # would waste effort, continued fraction elsewhere (safe past x=700).
    if x < 1e-15:
        return -math.log(x) - 0.5772156649015329
    return e1_scaled(x)


def approx_er(users: int, beta: float, sigma2_sq: float) -> float:
    """Closed-form ergodic sum rate U * e^x * Gamma(0, x) / ln 2, x = sigma2^2/beta."""
    if users < 2:
        raise DomainError(f"need at least 2 users, got {users}")
    if beta <= 0.0 or sigma2_sq <= 0.0:
        raise DomainError("beta and sigma2_sq must be positive")
    x = sigma2_sq / beta
    if x == 0.0:
        raise DomainError("sigma2_sq/beta underflowed to zero; use log_beta_I directly")
    return users * _exp_e1(x) / LN2


def approx_op(gamma_th: float, beta: float, sigma2_sq: float) -> float:
    """Closed-form outage probability 1 - exp(-(2^g - 1) sigma2^2 / beta)."""
    if gamma_th < 0.0:
        raise DomainError(f"gamma_th must be nonnegative, got {gamma_th}")
    if beta <= 0.0 or sigma2_sq <= 0.0:
        raise DomainError("beta and sigma2_sq must be positive")
    z_th = (2.0**gamma_th - 1.0) * sigma2_sq
    return -math.expm1(-z_th / beta)


def sop_lower_closed(beta_b: float, beta_e: float, rs: float) -> float:
    """Closed-form secrecy-outage lower bound 1 - beta_B / (tau beta_E + beta_B)."""
    if beta_b <= 0.0 or beta_e <= 0.0:
        raise DomainError("both scales must be positive")
    if rs < 0.0:
        raise DomainError(f"secrecy rate must be nonnegative, got {rs}")
    tau = 2.0**rs
    return tau * beta_e / (tau * beta_e + beta_b)
