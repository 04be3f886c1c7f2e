"""Seeded Monte Carlo link simulation.

Per-trial randomness comes from an independent stream keyed by
(master_seed, trial_index), so a batch is reproducible bit-for-bit and its
trials can be evaluated in any order or in parallel. Within a trial the draw
order is fixed: channel, pilot noise, data symbols, data noise.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import scalar_solution
from .decoders import DecodeRequest, DecoderKind, DecoderSpec, box_rls_solve, lmmse_decode, rls_solve
from .errors import ConfigError
from .system import SystemConfig, derive_params, pam_constellation, slice_symbols

PILOT_ORTH_TOL = 1e-9
_PILOT_STREAM_TAG = 0x50494C4F  # distinguishes the pilot stream from trial streams


@dataclass(frozen=True)
class PilotBlock:
    x_p: np.ndarray
    y_p: np.ndarray
    z_p: np.ndarray


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray
    hhat: np.ndarray
    delta: np.ndarray


@dataclass(frozen=True)
class TrialOutcome:
    mse: float
    ser: float
    seed_path: tuple[int, int]


@dataclass(frozen=True)
class BatchStats:
    trials: int
    mean_mse: float
    mean_ser: float
    stderr_mse: float
    stderr_ser: float


def trial_stream(master_seed: int, trial_idx: int) -> np.random.Generator:
    """Independent per-trial generator keyed by (master_seed, trial index)."""
    return np.random.default_rng([int(master_seed), int(trial_idx)])


def make_pilots(k: int, t_pilot: int, seed: int) -> np.ndarray:
    """K x T_p pilot matrix with X X' = T_p I, deterministic given seed.

    Built as sqrt(T_p) times the first K rows of an orthonormal matrix
    obtained by orthonormalizing a seeded Gaussian square matrix; column signs
    are fixed from the factorization so the result does not depend on LAPACK
    sign choices.
    """
    if t_pilot < k:
        raise ConfigError(f"pilot orthogonality requires t_pilot >= k (got {t_pilot} < {k})")
    rng = np.random.default_rng([int(seed), _PILOT_STREAM_TAG])
    gauss = rng.standard_normal((t_pilot, t_pilot))
    q, r = np.linalg.qr(gauss)
    q = q * np.sign(np.diag(r))
    x_p = math.sqrt(t_pilot) * q[:k, :]
    err = np.abs(x_p @ x_p.T - t_pilot * np.eye(k)).max()
    if err > PILOT_ORTH_TOL:
        raise ConfigError(f"pilot orthogonalization residual {err:.3e} out of tolerance")
    return x_p


def estimate_channel(
    h: np.ndarray,
    x_p: np.ndarray,
    rho_p: float,
    noise_seed,
) -> tuple[np.ndarray, np.ndarray]:
    """Train over the pilot block and return (hhat, delta = h - hhat).

    With orthogonal pilots the linear MMSE channel estimate collapses to a
    scalar multiple of Y_p X_p'. noise_seed may be an int or a Generator.
    """
    if rho_p <= 0:
        raise ConfigError("rho_p must be positive")
    rng = np.random.default_rng(noise_seed)
    n, k = h.shape
    t_pilot = x_p.shape[1]
    z_p = rng.standard_normal((n, t_pilot))
    y_p = math.sqrt(rho_p / k) * h @ x_p + z_p
    scale = math.sqrt(k / rho_p) / (k / rho_p + t_pilot)
    hhat = scale * (y_p @ x_p.T)
    return hhat, h - hhat


def _resolve_b_norm(cfg: SystemConfig, spec: DecoderSpec) -> float:
    if spec.kind is DecoderKind.LS:
        return 1.0
    return scalar_solution(cfg, spec).b_norm


def run_trial(
    cfg: SystemConfig,
    decoder_spec: DecoderSpec,
    seed: int,
    trial_idx: int,
    pilots: np.ndarray | None = None,
    b_norm: float | None = None,
) -> TrialOutcome:
    """One full pilot + data transmission, decode, normalize and slice.

    Deterministic given (seed, trial_idx). pilots and b_norm can be passed in
    to amortize their construction across a batch; when omitted they are
    derived from the same seed and config, so results are unchanged.
    """
    dp = derive_params(cfg)
    constellation = pam_constellation(cfg.m)
    if pilots is None:
        pilots = make_pilots(cfg.k, cfg.t_pilot, seed)
    if b_norm is None:
        b_norm = _resolve_b_norm(cfg, decoder_spec)

    rng = trial_stream(seed, trial_idx)
    h = rng.standard_normal((cfg.n, cfg.k))
    hhat, _ = estimate_channel(h, pilots, dp.rho_p, rng)
    x0 = constellation.points[rng.integers(0, cfg.m, size=cfg.k)]
    z = rng.standard_normal(cfg.n)
    y = math.sqrt(dp.rho_d / cfg.k) * h @ x0 + z

    a = math.sqrt(dp.rho_d / cfg.k) * hhat
    kind = decoder_spec.kind
    if kind is DecoderKind.LMMSE:
        x_hat = lmmse_decode(hhat, y, dp.rho_d, dp.sigma_delta_sq)
    elif kind is DecoderKind.BOX:
        x_hat, _ = box_rls_solve(
            DecodeRequest(a=a, y=y, lam_rho_d=decoder_spec.lam * dp.rho_d, t_box=decoder_spec.t_box)
        )
    else:
        lam = 0.0 if kind is DecoderKind.LS else decoder_spec.lam
        x_hat = rls_solve(DecodeRequest(a=a, y=y, lam_rho_d=lam * dp.rho_d))

    x_star = slice_symbols(x_hat / b_norm, constellation)
    mse = float(np.mean((x_hat - x0) ** 2))
    ser = float(np.mean(x_star != x0))
    return TrialOutcome(mse=mse, ser=ser, seed_path=(seed, trial_idx))


def run_batch(
    cfg: SystemConfig,
    decoder_spec: DecoderSpec,
    trials: int,
    master_seed: int,
    workers: int = 1,
    b_norm: float | None = None,
) -> BatchStats:
    """Aggregate independent trials into sample means and standard errors.

    Trials are indexed 0..trials-1 and aggregated in index order, so the
    result is identical whether they were computed sequentially or by a
    thread pool. b_norm may be supplied when the caller already solved for
    the debias constant.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    pilots = make_pilots(cfg.k, cfg.t_pilot, master_seed)
    if b_norm is None:
        b_norm = _resolve_b_norm(cfg, decoder_spec)

    def one(idx: int) -> TrialOutcome:
        return run_trial(cfg, decoder_spec, master_seed, idx, pilots=pilots, b_norm=b_norm)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, range(trials)))
    else:
        outcomes = [one(i) for i in range(trials)]
    return aggregate(outcomes)


def aggregate(outcomes: list[TrialOutcome]) -> BatchStats:
    """Sample means and standard errors; a single trial reports stderr 0."""
    mses = np.array([o.mse for o in outcomes])
    sers = np.array([o.ser for o in outcomes])
    n = len(outcomes)
    if n > 1:
        se_mse = float(mses.std(ddof=1) / math.sqrt(n))
        se_ser = float(sers.std(ddof=1) / math.sqrt(n))
    else:
        se_mse = se_ser = 0.0
    return BatchStats(
        trials=n,
        mean_mse=float(mses.mean()),
        mean_ser=float(sers.mean()),
        stderr_mse=se_mse,
        stderr_ser=se_ser,
    )
