"""Linear and box-constrained decoders plus normalize-and-slice detection.

All solvers are pure functions of their inputs. The box-constrained solver is
cyclic coordinate descent with exact per-coordinate minimization and clipping,
which is deterministic and needs no step-size tuning on a quadratic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError
from .system import Constellation, slice_symbols

RLS_RESIDUAL_RTOL = 1e-8
CD_STEP_TOL = 1e-10
CD_MAX_SWEEPS = 10_000
CD_FAIL_RESIDUAL = 1e-6


class DecoderKind(str, enum.Enum):
    LS = "ls"
    RLS = "rls"
    BOX = "box"
    LMMSE = "lmmse"


@dataclass(frozen=True)
class DecoderSpec:
    """Which decoder to run and with what knobs.

    lam is the ridge coefficient (multiplied by rho_d inside the solvers);
    t_box is the box half-width and is only meaningful for BOX.
    """

    kind: DecoderKind
    lam: float = 0.0
    t_box: float | None = None

    @staticmethod
    def ls() -> "DecoderSpec":
        return DecoderSpec(DecoderKind.LS, lam=0.0)

    @staticmethod
    def rls(lam: float) -> "DecoderSpec":
        return DecoderSpec(DecoderKind.RLS, lam=lam)

    @staticmethod
    def box(lam: float, t_box: float) -> "DecoderSpec":
        return DecoderSpec(DecoderKind.BOX, lam=lam, t_box=t_box)

    @staticmethod
    def lmmse() -> "DecoderSpec":
        return DecoderSpec(DecoderKind.LMMSE)


@dataclass(frozen=True)
class DecodeRequest:
    """One decode problem: minimize ||y - A x||^2 + lam_rho_d ||x||^2,
    optionally subject to |x_j| <= t_box, then slice x / b_norm."""

    a: np.ndarray
    y: np.ndarray
    lam_rho_d: float = 0.0
    t_box: float | None = None
    b_norm: float = 1.0


@dataclass(frozen=True)
class DecodeResult:
    x_hat: np.ndarray
    x_star: np.ndarray
    kkt_residual: float | None = None


def rls_solve(req: DecodeRequest) -> np.ndarray:
    """Solve (A'A + lam_rho_d I) x = A'y through a Cholesky factorization.

    Raises ConvergenceError if the system is not positive definite (e.g.
    lam_rho_d = 0 with a wide A) or if the solve residual is out of tolerance.
    """
    a, y = req.a, req.y
    n, k = a.shape
    if req.lam_rho_d < 0:
        raise ValueError("lam_rho_d must be nonnegative")
    if req.lam_rho_d == 0 and n < k:
        raise ConvergenceError("unregularized solve needs at least as many rows as columns")
    gram = a.T @ a
    gram[np.diag_indices_from(gram)] += req.lam_rho_d
    rhs = a.T @ y
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise ConvergenceError(f"normal-equations matrix is singular: {exc}") from exc
    x = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    resid = np.abs(gram @ x - rhs).max()
    scale = max(np.abs(rhs).max(), 1e-300)
    if resid > RLS_RESIDUAL_RTOL * scale:
        raise ConvergenceError(f"linear solve residual {resid:.3e} exceeds tolerance")
    return x


def box_rls_solve(req: DecodeRequest) -> tuple[np.ndarray, float]:
    """Minimize ||y - A x||^2 + lam_rho_d ||x||^2 over the box [-t, t]^K.

    Cyclic coordinate descent with exact coordinate updates; the running
    objective must be non-increasing every sweep, and the solution is checked
    against the projected-gradient fixed-point condition on exit. Returns
    (x_hat, kkt_residual).
    """
    if req.t_box is None or not req.t_box > 0:
        raise ValueError("box_rls_solve needs a positive t_box")
    a, y, t = req.a, req.y, float(req.t_box)
    lr = float(req.lam_rho_d)
    k = a.shape[1]
    gram = a.T @ a
    rhs = a.T @ y
    diag = np.diag(gram) + lr
    if np.any(diag <= 0):
        raise ConvergenceError("objective is not strongly convex coordinate-wise")
    cols = [np.ascontiguousarray(gram[:, j]) for j in range(k)]

    # Warm start from the clipped unconstrained solution when it is available;
    # fall back to zero otherwise.
    try:
        x = np.clip(rls_solve(DecodeRequest(a=a, y=y, lam_rho_d=lr)), -t, t)
    except ConvergenceError:
        x = np.zeros(k)
    half_grad = gram @ x + lr * x - rhs

    def objective() -> float:
        # ||y - Ax||^2 + lr||x||^2 = y'y - x'rhs + x'half_grad
        return float(y @ y - x @ rhs + x @ half_grad)

    prev_obj = objective()
    converged = False
    for _ in range(CD_MAX_SWEEPS):
        largest_step = 0.0
        for j in range(k):
            xj = x[j] - half_grad[j] / diag[j]
            if xj > t:
                xj = t
            elif xj < -t:
                xj = -t
            step = xj - x[j]
            if step != 0.0:
                half_grad += step * cols[j]
                half_grad[j] += step * lr
                x[j] = xj
                if abs(step) > largest_step:
                    largest_step = abs(step)
        obj = objective()
        if obj > prev_obj + 1e-9 * max(1.0, abs(prev_obj)):
            raise ConvergenceError("coordinate-descent objective increased within a sweep")
        prev_obj = obj
        if largest_step < CD_STEP_TOL:
            converged = True
            break

    kkt = _projected_gradient_residual(x, half_grad, t)
    if not converged and kkt > CD_FAIL_RESIDUAL:
        raise ConvergenceError(
            f"coordinate descent hit the sweep cap with KKT residual {kkt:.3e}"
        )
    return x, kkt


def _projected_gradient_residual(x: np.ndarray, half_grad: np.ndarray, t: float) -> float:
    """Max-norm of x - clip(x - grad, -t, t); zero exactly at a KKT point."""
    grad = 2.0 * half_grad
    return float(np.abs(x - np.clip(x - grad, -t, t)).max())


def lmmse_decode(
    hhat: np.ndarray, y: np.ndarray, rho_d: float, sigma_delta_sq: float
) -> np.ndarray:
    """Linear MMSE estimate of the data vector given the channel estimate.

    Algebraically identical to the ridge solution with
    lam_rho_d = 1 + rho_d * sigma_delta_sq.
    """
    n, k = hhat.shape
    a = math.sqrt(rho_d / k) * hhat
    return rls_solve(DecodeRequest(a=a, y=y, lam_rho_d=1.0 + rho_d * sigma_delta_sq))


def normalize_and_slice(x_hat: np.ndarray, b_norm: float, constellation: Constellation):
    """Element-wise nearest-symbol decision on x_hat / b_norm."""
    if not b_norm > 0:
        raise ValueError("b_norm must be positive")
    return slice_symbols(x_hat / b_norm, constellation)


def decode(req: DecodeRequest, constellation: Constellation) -> DecodeResult:
    """Run the solver selected by the request shape, then slice."""
    if req.t_box is not None:
        x_hat, kkt = box_rls_solve(req)
    else:
        x_hat, kkt = rls_solve(req), None
    x_star = normalize_and_slice(x_hat, req.b_norm, constellation)
    return DecodeResult(x_hat=x_hat, x_star=x_star, kkt_residual=kkt)
