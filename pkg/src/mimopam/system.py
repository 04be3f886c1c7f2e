"""Scenario parameters, power-allocation conventions and the PAM constellation.

Everything downstream (simulator, decoders, asymptotic predictors) consumes the
values derived here, so this module is the single owner of the power-split
arithmetic and of dB/linear conversion (stored powers are always linear).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

ENERGY_IDENTITY_RTOL = 1e-12


class PowerConvention(str, enum.Enum):
    """How the average power rho and the data ratio alpha split into
    pilot/data powers.

    ENERGY_CONSERVING: rho_d * T_d = alpha * rho * T and
    rho_p * T_p = (1 - alpha) * rho * T, so the total transmitted energy over
    the block equals rho * T exactly.

    DIRECT_SPLIT: rho_d = alpha * rho and rho_p = (1 - alpha) * rho. This is
    the convention the reference performance tables were generated with.
    """

    ENERGY_CONSERVING = "energy"
    DIRECT_SPLIT = "direct"


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class SystemConfig:
    """One transmission scenario.

    k, n:          transmit / receive antenna counts
    t_total:       symbols per coherence block
    t_pilot:       training symbols (t_pilot >= k for pilot orthogonality)
    rho:           average power, linear
    alpha:         data power ratio in (0, 1)
    m:             PAM order, power of two
    lam:           ridge regularization coefficient (>= 0)
    t_box:         box threshold for the box-constrained decoder, if fixed
    """

    k: int
    n: int
    t_total: int
    t_pilot: int
    rho: float
    alpha: float
    m: int = 2
    lam: float = 0.0
    t_box: float | None = None
    power_convention: PowerConvention = PowerConvention.ENERGY_CONSERVING

    def __post_init__(self) -> None:
        if self.k <= 0 or self.n <= 0 or self.t_total <= 0:
            raise ConfigError("antenna counts and block length must be positive")
        if self.t_pilot < self.k:
            raise ConfigError(
                f"pilot orthogonality requires t_pilot >= k (got t_pilot={self.t_pilot}, k={self.k})"
            )
        if self.t_pilot >= self.t_total:
            raise ConfigError("t_pilot must leave room for data symbols (t_pilot < t_total)")
        if not self.rho > 0:
            raise ConfigError("rho must be positive (linear power)")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie strictly inside (0, 1), got {self.alpha}")
        if self.m < 2 or (self.m & (self.m - 1)) != 0:
            raise ConfigError(f"m must be a power of two >= 2, got {self.m}")
        if self.lam < 0:
            raise ConfigError("lam must be nonnegative")
        if self.lam == 0 and self.n <= self.k:
            raise ConfigError("lam = 0 requires n > k (the unregularized decoder needs delta > 1)")
        if self.t_box is not None and not self.t_box > 0:
            raise ConfigError("t_box must be positive")


@dataclass(frozen=True)
class DerivedParams:
    """Quantities derived from a SystemConfig under its power convention."""

    delta: float
    tau: float
    tau_p: float
    tau_d: float
    rho_p: float
    rho_d: float
    energy_e: float
    sigma_delta_sq: float
    sigma_hhat_sq: float
    rho_eff: float


def derive_params(cfg: SystemConfig) -> DerivedParams:
    """Populate all derived scalars for a validated config.

    The estimation-error variance is sigma_delta_sq = 1 / (1 + rho_p * T_p / K)
    and the effective SNR is rho_d * sigma_hhat_sq / (1 + rho_d * sigma_delta_sq).
    """
    k = cfg.k
    delta = cfg.n / k
    tau = cfg.t_total / k
    tau_p = cfg.t_pilot / k
    tau_d = (cfg.t_total - cfg.t_pilot) / k
    if cfg.power_convention is PowerConvention.DIRECT_SPLIT:
        rho_d = cfg.alpha * cfg.rho
        rho_p = (1.0 - cfg.alpha) * cfg.rho
    else:
        rho_d = cfg.alpha * cfg.rho * tau / tau_d
        rho_p = (1.0 - cfg.alpha) * cfg.rho * tau / tau_p
        total = rho_p * cfg.t_pilot + rho_d * (cfg.t_total - cfg.t_pilot)
        if abs(total - cfg.rho * cfg.t_total) > ENERGY_IDENTITY_RTOL * cfg.rho * cfg.t_total:
            raise ConfigError("energy-conservation identity violated in derivation")
    sigma_delta_sq = 1.0 / (1.0 + rho_p * cfg.t_pilot / k)
    sigma_hhat_sq = 1.0 - sigma_delta_sq
    rho_eff = rho_d * sigma_hhat_sq / (1.0 + rho_d * sigma_delta_sq)
    return DerivedParams(
        delta=delta,
        tau=tau,
        tau_p=tau_p,
        tau_d=tau_d,
        rho_p=rho_p,
        rho_d=rho_d,
        energy_e=(cfg.m**2 - 1) / 3.0,
        sigma_delta_sq=sigma_delta_sq,
        sigma_hhat_sq=sigma_hhat_sq,
        rho_eff=rho_eff,
    )


def rho_eff_of_alpha(rho: float, tau: float, tau_d: float, alpha: float) -> float:
    """Effective SNR as a function of the data power ratio, under the
    energy-conserving convention.

    Continuous in alpha on (0, 1) and vanishing at both endpoints. The
    tau_d = 1 case is handled by its dedicated limit form.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    rt = rho * tau
    if tau_d == 1.0:
        return rt * rt / (1.0 + rt) * alpha * (1.0 - alpha)
    vartheta = (1.0 + rt) / (rt * (1.0 - 1.0 / tau_d))
    return rt / (tau_d - 1.0) * alpha * (1.0 - alpha) / (vartheta - alpha)


@dataclass(frozen=True)
class Constellation:
    """Unit-variance M-PAM alphabet: points +/- (2k-1)/sqrt(E), E = (M^2-1)/3."""

    points: np.ndarray
    m: int
    energy_e: float


def pam_constellation(m: int) -> Constellation:
    if m < 2 or (m & (m - 1)) != 0:
        raise ConfigError(f"m must be a power of two >= 2, got {m}")
    energy_e = (m**2 - 1) / 3.0
    points = (2.0 * np.arange(m) - (m - 1)) / math.sqrt(energy_e)
    return Constellation(points=points, m=m, energy_e=energy_e)


def slice_symbols(values, constellation: Constellation):
    """Map each value to the nearest constellation point.

    Ties on the midpoint between two points break toward the smaller point,
    deterministically. Scalar in, scalar out; array in, array out.
    """
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("slice_symbols requires finite inputs")
    # argmin over |v - s| with first-wins tie-breaking; points are ascending,
    # so the first minimum is the smaller symbol.
    dist = np.abs(arr[..., None] - constellation.points)
    out = constellation.points[np.argmin(dist, axis=-1)]
    if np.isscalar(values) or np.ndim(values) == 0:
        return float(out)
    return out
