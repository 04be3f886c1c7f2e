"""Pilot/data power split and training-duration optimization.

The optimal data power ratio maximizes the effective SNR and has an exact
branch formula in vartheta = (1 + rho*tau) / (rho*tau*(1 - 1/tau_d)); the
goodput-optimal training duration is found by exhaustive search over integer
pilot counts (pilots are whole symbols).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import ls_sep, mse_rls_opt_lambda, qfunc
from .errors import ConfigError
from .system import PowerConvention, SystemConfig, rho_eff_of_alpha


@dataclass(frozen=True)
class AllocationResult:
    alpha_star: float
    vartheta: float
    branch: str
    rho_eff_at_star: float
    tau_p_star: float | None = None
    goodput: float | None = None
    conjecture_based: bool = False


def alpha_star(rho: float, tau: float, tau_d: float) -> AllocationResult:
    """Data power ratio maximizing the effective SNR (energy-conserving split).

    alpha* = vartheta - sqrt(vartheta (vartheta - 1)) for tau_d > 1, exactly
    1/2 for tau_d = 1, and the + branch for tau_d < 1.
    """
    if rho <= 0:
        raise ConfigError("rho must be positive")
    if tau <= 1:
        raise ConfigError("tau must exceed 1 (the block needs data symbols)")
    if tau_d <= 0:
        raise ConfigError("tau_d must be positive")
    rt = rho * tau
    if tau_d == 1.0:
        a = 0.5
        vartheta = math.nan
        branch = "tau_d=1"
    else:
        vartheta = (1.0 + rt) / (rt * (1.0 - 1.0 / tau_d))
        root = math.sqrt(vartheta * (vartheta - 1.0))
        if tau_d > 1.0:
            a = vartheta - root
            branch = "tau_d>1"
        else:
            a = vartheta + root
            branch = "tau_d<1"
    return AllocationResult(
        alpha_star=a,
        vartheta=vartheta,
        branch=branch,
        rho_eff_at_star=rho_eff_of_alpha(rho, tau, tau_d, a),
    )


def alpha_star_for_config(cfg: SystemConfig) -> AllocationResult:
    """Config-level wrapper; the closed form assumes the energy-conserving
    convention, so direct-split configs are refused (grid-search rho_eff
    directly for those)."""
    if cfg.power_convention is not PowerConvention.ENERGY_CONSERVING:
        raise ConfigError(
            "alpha_star applies to the energy-conserving convention only; "
            "use a grid search over rho_eff for direct-split configs"
        )
    tau = cfg.t_total / cfg.k
    tau_d = (cfg.t_total - cfg.t_pilot) / cfg.k
    return alpha_star(cfg.rho, tau, tau_d)


def _sep_at(rho_eff: float, delta: float, m: int, decoder: str) -> float:
    if decoder == "ls":
        return ls_sep(rho_eff, delta, m)
    # ridge decoder at its optimal coefficient; also the conjectured optimum
    # shape for the box decoder
    energy_e = (m * m - 1) / 3.0
    mse = mse_rls_opt_lambda(rho_eff, delta)
    return float(2.0 * (1.0 - 1.0 / m) * qfunc(math.sqrt(delta / (energy_e * (mse + 1.0 / rho_eff)))))


def goodput_grid(
    rho: float, k: int, t_total: int, delta: float, m: int = 2, decoder: str = "rls"
):
    """Goodput at every feasible integer pilot count, with alpha optimized at
    each point. Returns (t_pilot values, alpha*, goodput) arrays."""
    if t_total <= k:
        raise ConfigError("t_total must exceed k")
    tau = t_total / k
    t_pilots = np.arange(k, t_total)
    alphas = np.empty(len(t_pilots))
    goodputs = np.empty(len(t_pilots))
    for idx, t_p in enumerate(t_pilots):
        tau_p = t_p / k
        tau_d = tau - tau_p
        res = alpha_star(rho, tau, tau_d)
        sep = _sep_at(res.rho_eff_at_star, delta, m, decoder)
        alphas[idx] = res.alpha_star
        goodputs[idx] = (1.0 - tau_p / tau) * (1.0 - sep)
    return t_pilots, alphas, goodputs


def optimize_goodput(
    rho: float, k: int, t_total: int, delta: float, m: int = 2, decoder: str = "rls"
) -> AllocationResult:
    """Jointly optimal (tau_p, alpha) in the goodput sense, by grid search
    over integer pilot counts with the closed-form alpha* at each count.

    For the box decoder the alpha* formula rests on a conjecture (its MSE/SEP
    monotonicity in effective SNR is verified numerically, not proved), which
    the result flags.
    """
    if decoder not in ("ls", "rls", "box"):
        raise ConfigError(f"unknown decoder for goodput optimization: {decoder}")
    t_pilots, alphas, goodputs = goodput_grid(
        rho, k, t_total, delta, m, "rls" if decoder == "box" else decoder
    )
    j = int(np.argmax(goodputs))
    tau = t_total / k
    tau_d = tau - t_pilots[j] / k
    base = alpha_star(rho, tau, tau_d)
    return AllocationResult(
        alpha_star=float(alphas[j]),
        vartheta=base.vartheta,
        branch=base.branch,
        rho_eff_at_star=base.rho_eff_at_star,
        tau_p_star=float(t_pilots[j] / k),
        goodput=float(goodputs[j]),
        conjecture_based=(decoder == "box"),
    )


@dataclass(frozen=True)
class MonotonicityReport:
    all_monotone: bool
    mse_margins: np.ndarray
    sep_margins: np.ndarray


def verify_monotone_mse_sep(rho_eff_grid, delta: float, m: int) -> MonotonicityReport:
    """Check that optimal-coefficient MSE and SEP are non-increasing along an
    increasing effective-SNR grid; margins are the per-step decrements."""
    grid = np.asarray(rho_eff_grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ConfigError("rho_eff_grid must be strictly increasing")
    mse = np.array([mse_rls_opt_lambda(r, delta) for r in grid])
    sep = np.array([_sep_at(r, delta, m, "rls") for r in grid])
    mse_margins = -np.diff(mse)
    sep_margins = -np.diff(sep)
    ok = bool(np.all(mse_margins >= 0) and np.all(sep_margins >= 0))
    return MonotonicityReport(all_monotone=ok, mse_margins=mse_margins, sep_margins=sep_margins)
