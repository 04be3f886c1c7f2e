"""Deterministic large-system predictors for the linear and box decoders.

The ridge/plain least-squares predictors are closed forms in the effective
SNR. The box-constrained decoder has no closed form: its limiting MSE/SEP come
from a two-variable scalar saddle problem sup_beta min_theta D(theta, beta)
whose Gaussian integrals are evaluated in closed form via partial second
moments of a standard normal. The saddle is solved by golden-section searches:
the theta profile is minimized after bracketing a derivative sign change from
a coarse scan, and the beta profile (which is strictly concave) is maximized
over an expanding bracket.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .decoders import DecoderKind, DecoderSpec
from .errors import ConfigError, ConvergenceError, DegenerateThresholdError, InfeasibleError
from .system import SystemConfig, derive_params

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

GOLDEN_REL_TOL = 1e-12
SCALAR_SEARCH_TOL = 1e-6
STATIONARITY_STEP = 1e-5
STATIONARITY_SOFT = 1e-6
STATIONARITY_HARD = 1e-4
DEGENERATE_T_TOL = 1e-9


def qfunc(x):
    """Standard normal tail probability Q(x); array-safe, Q(-inf)=1, Q(inf)=0."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / _SQRT2)


def gauss_pdf(x):
    """Standard normal density with p(+/-inf) = 0 (no nan from the sentinel).

    Arguments beyond |x| = 40 map to exactly 0 (the true value underflows
    double precision well before that), which also keeps the squaring safe
    for arbitrarily large finite inputs.
    """
    arr = np.asarray(x, dtype=float)
    out = np.zeros_like(arr)
    small = np.isfinite(arr) & (np.abs(arr) < 40.0)
    out[small] = np.exp(-0.5 * arr[small] ** 2) / _SQRT2PI
    if arr.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# Ridge (RLS) and plain LS closed forms
# ---------------------------------------------------------------------------


def upsilon(lambda_prime: float, delta: float) -> float:
    """Positive root of delta*u^2 + (delta - lambda' - 1)*u - lambda' = 0.

    lambda_prime is the regularization coefficient normalized by the channel
    estimate variance. Vanishes at lambda_prime = 0 when delta >= 1 and grows
    like lambda_prime / delta for large regularization.
    """
    if lambda_prime < 0 or delta <= 0:
        raise ValueError("need lambda_prime >= 0 and delta > 0")
    a = delta - lambda_prime - 1.0
    return (-a + math.sqrt(a * a + 4.0 * lambda_prime * delta)) / (2.0 * delta)


def rls_theta_star(
    rho_d: float, sigma_hhat_sq: float, sigma_delta_sq: float, lam: float, delta: float
) -> float:
    """Closed-form scalar solution for the ridge decoder.

    theta* = sqrt((rho_d sH2 (u/(1+u))^2 + rho_d sD2 + 1) / (delta - 1/(1+u)^2))
    with u = upsilon(lam / sH2, delta). The denominator must be positive,
    which holds for any lam > 0 and for lam = 0 when delta > 1.
    """
    u = upsilon(lam / sigma_hhat_sq, delta)
    shrink = u / (1.0 + u)
    den = delta - 1.0 / (1.0 + u) ** 2
    if den <= 0:
        raise InfeasibleError(
            f"theta* undefined: delta={delta} <= 1/(1+upsilon)^2 at lam={lam}"
        )
    num = rho_d * sigma_hhat_sq * shrink * shrink + rho_d * sigma_delta_sq + 1.0
    return math.sqrt(num / den)


def rls_beta_star(theta_star: float, lam: float, sigma_hhat_sq: float, delta: float) -> float:
    """Companion dual scalar: beta* = 2((delta - lam' - 1) + delta*u) theta*.

    Equals 2 lam theta* / (sH2 u) when lam > 0, but this form stays finite in
    the lam -> 0 limit as well.
    """
    lp = lam / sigma_hhat_sq
    u = upsilon(lp, delta)
    return 2.0 * ((delta - lp - 1.0) + delta * u) * theta_star


def mse_from_theta(
    theta_star: float, rho_d: float, sigma_hhat_sq: float, sigma_delta_sq: float, delta: float
) -> float:
    """Limiting per-antenna MSE implied by the scalar solution."""
    return (delta * theta_star**2 - rho_d * sigma_delta_sq - 1.0) / (rho_d * sigma_hhat_sq)


def rls_sep(theta_star: float, rho_d: float, sigma_hhat_sq: float, m: int) -> float:
    """Limiting symbol error probability of the debiased ridge decoder:
    2(1 - 1/M) Q(sqrt(rho_d sH2) / (sqrt(E) theta*))."""
    if theta_star <= 0:
        raise ValueError("theta_star must be positive")
    energy_e = (m * m - 1) / 3.0
    return float(2.0 * (1.0 - 1.0 / m) * qfunc(math.sqrt(rho_d * sigma_hhat_sq / energy_e) / theta_star))


def lambda_star_rls(rho_d: float, sigma_delta_sq: float) -> float:
    """MSE- and SEP-optimal ridge coefficient: 1/rho_d + sigma_delta_sq."""
    if rho_d <= 0:
        raise ValueError("rho_d must be positive")
    return 1.0 / rho_d + sigma_delta_sq


def mse_rls_opt_lambda(rho_eff: float, delta: float) -> float:
    """Limiting MSE of the ridge decoder at the optimal coefficient, written
    directly in the effective SNR."""
    if rho_eff <= 0:
        raise ValueError("rho_eff must be positive")
    a = delta - 1.0 + 1.0 / rho_eff
    return 0.5 * (-a + math.sqrt(a * a + 4.0 / rho_eff))


def ls_mse(rho_eff: float, delta: float) -> float:
    """Limiting MSE of the unregularized decoder: 1 / ((delta - 1) rho_eff)."""
    if delta <= 1:
        raise InfeasibleError("plain least squares needs delta > 1")
    return 1.0 / ((delta - 1.0) * rho_eff)


def ls_sep(rho_eff: float, delta: float, m: int) -> float:
    """Limiting SEP of the unregularized decoder:
    2(1 - 1/M) Q(sqrt((delta - 1) rho_eff / E))."""
    if delta <= 1:
        raise InfeasibleError("plain least squares needs delta > 1")
    energy_e = (m * m - 1) / 3.0
    return float(2.0 * (1.0 - 1.0 / m) * qfunc(math.sqrt((delta - 1.0) * rho_eff / energy_e)))


def rls_stationarity_residuals(
    theta: float,
    beta: float,
    rho_d: float,
    sigma_hhat_sq: float,
    sigma_delta_sq: float,
    lam: float,
    delta: float,
) -> tuple[float, float]:
    """Analytic first-order system for the unboxed scalar saddle; both
    components vanish at (theta*, beta*)."""
    s2 = sigma_hhat_sq
    den = (beta * s2 + 2.0 * lam * theta) ** 2
    f_theta = (
        delta * beta
        - beta / theta**2
        - rho_d * sigma_delta_sq * beta / theta**2
        - beta * s2 * (beta**2 * s2 + 4.0 * rho_d * lam**2) / den
    )
    f_beta = (
        delta * theta
        + 1.0 / theta
        - beta
        + rho_d * sigma_delta_sq / theta
        - s2 * theta * (beta**2 * s2 + 4.0 * lam * theta * beta - 4.0 * rho_d * lam**2) / den
    )
    return f_theta, f_beta


# ---------------------------------------------------------------------------
# Gaussian partial moment and the box-decoder saddle objective
# ---------------------------------------------------------------------------


def gaussian_partial_second_moment(a: float, b: float, lower: float, upper: float) -> float:
    """int_lower^upper (a + b h)^2 p(h) dh in closed form.

    Expands to (a^2+b^2)(Q(l)-Q(u)) + b(bl+2a)p(l) - b(bu+2a)p(u); infinite
    limits are legal and drop their density terms.
    """
    if lower > upper:
        raise ValueError("need lower <= upper")
    val = (a * a + b * b) * (float(qfunc(lower)) - float(qfunc(upper)))
    if math.isfinite(lower):
        val += b * (b * lower + 2.0 * a) * gauss_pdf(lower)
    if math.isfinite(upper):
        val -= b * (b * upper + 2.0 * a) * gauss_pdf(upper)
    return val


@dataclass(frozen=True)
class BoxObjectiveParams:
    """Scenario constants entering the box-decoder saddle objective."""

    rho_d: float
    sigma_hhat_sq: float
    sigma_delta_sq: float
    lam: float
    delta: float
    t: float
    m: int

    @property
    def xi(self) -> float:
        return math.sqrt(self.rho_d * self.sigma_hhat_sq)

    @property
    def lam_rho_d(self) -> float:
        return self.lam * self.rho_d

    @property
    def energy_e(self) -> float:
        return (self.m * self.m - 1) / 3.0

    def symbol_terms(self, theta: float, beta: float):
        """Per-symbol interval ends and slab weights (ell_i, mu_i, c_i, d_i)
        for i = -(M-1), ..., -1, 1, ..., M-1 in ascending order."""
        i = np.concatenate([-np.arange(self.m - 1, 0, -2), np.arange(1, self.m, 2)]).astype(float)
        xi = self.xi
        width = self.t * (xi / theta + 2.0 * self.lam_rho_d / (xi * beta))
        drift = xi * i / (theta * math.sqrt(self.energy_e))
        ell = -width - drift
        mu = width - drift
        c = (beta * xi / 2.0) * (drift - ell)
        d = (beta * xi / 2.0) * (mu - drift)
        return ell, mu, c, d

    @staticmethod
    def from_config(cfg: SystemConfig, lam: float, t: float) -> "BoxObjectiveParams":
        dp = derive_params(cfg)
        return BoxObjectiveParams(
            rho_d=dp.rho_d,
            sigma_hhat_sq=dp.sigma_hhat_sq,
            sigma_delta_sq=dp.sigma_delta_sq,
            lam=lam,
            delta=dp.delta,
            t=t,
            m=cfg.m,
        )


def _objective_grid(thetas: np.ndarray, beta: float, p: BoxObjectiveParams) -> np.ndarray:
    """Vectorized D(theta, beta) over an array of theta values.

    The +i / -i symbol contributions are equal by symmetry of the Gaussian, so
    only positive offsets are summed and doubled.
    """
    th = np.asarray(thetas, dtype=float)
    xi = p.xi
    lr = p.lam_rho_d
    sqrt_e = math.sqrt(p.energy_e)
    base = beta * p.delta * th / 2.0 + beta * (1.0 + p.rho_d) / (2.0 * th) - beta * beta / 4.0
    pref = beta * beta / (2.0 * xi * xi * beta / th + 4.0 * lr)
    i = np.arange(1, p.m, 2, dtype=float).reshape(-1, *([1] * th.ndim))
    width = p.t * (xi / th + 2.0 * lr / (xi * beta))
    drift = xi * i / (th * sqrt_e)
    ell = -width - drift
    mu = width - drift
    c = (beta * xi / 2.0) * (drift - ell)
    d = (beta * xi / 2.0) * (mu - drift)
    q_ell, q_mu = qfunc(ell), qfunc(mu)
    p_ell, p_mu = gauss_pdf(ell), gauss_pdf(mu)
    a_m = xi * drift
    moment = (
        (a_m * a_m + xi * xi) * (q_ell - q_mu)
        + xi * (xi * ell + 2.0 * a_m) * p_ell
        - xi * (xi * mu + 2.0 * a_m) * p_mu
    )
    psi = p.t * (c * qfunc(-ell) + d * q_mu) - beta * xi * p.t * (p_ell + p_mu) - pref * moment
    return base + 2.0 * psi.sum(axis=0) / p.m


def box_objective(theta: float, beta: float, params: BoxObjectiveParams) -> float:
    """Scalar saddle objective D(theta, beta) of the box decoder.

    Finite everywhere the saddle search can reach; astronomically small or
    large arguments whose value cannot be represented in double precision are
    rejected instead of returning NaN.
    """
    if theta <= 0 or beta <= 0:
        raise ValueError("theta and beta must be positive")
    with np.errstate(over="ignore", invalid="ignore"):
        val = float(_objective_grid(np.asarray(theta, dtype=float), beta, params))
    if math.isnan(val):
        raise ValueError(f"objective not representable at theta={theta!r}, beta={beta!r}")
    return val


# ---------------------------------------------------------------------------
# Scalar search machinery
# ---------------------------------------------------------------------------


def _golden_min(f, lo: float, hi: float, rel_tol: float = GOLDEN_REL_TOL, max_iter: int = 400):
    """Golden-section minimization on a bracketed unimodal interval."""
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if (hi - lo) <= rel_tol * max(1.0, abs(lo), abs(hi)):
            break
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
    x = 0.5 * (lo + hi)
    return x, f(x)


def box_theta_min(
    params: BoxObjectiveParams,
    beta: float,
    theta_hint: float | None = None,
    rel_tol: float = GOLDEN_REL_TOL,
) -> tuple[float, float]:
    """Inner minimization min_theta D(theta, beta).

    A geometric scan locates the sign change of the theta-derivative (as a
    discrete descent-then-ascent pattern); golden section refines inside that
    bracket. D diverges at both ends of (0, inf), so the scan window is grown
    until the minimum is interior.
    """
    hint = theta_hint
    if hint is None or not np.isfinite(hint) or hint <= 0:
        hint = rls_theta_star(
            params.rho_d, params.sigma_hhat_sq, params.sigma_delta_sq,
            max(params.lam, 1e-12), params.delta,
        )
    lo, hi = hint / 16.0, hint * 16.0
    for _ in range(12):
        grid = np.geomspace(lo, hi, 41)
        vals = _objective_grid(grid, beta, params)
        j = int(np.argmin(vals))
        if j == 0:
            lo, hi = lo / 256.0, grid[2]
        elif j == len(grid) - 1:
            lo, hi = grid[-3], hi * 256.0
        else:
            f = lambda th: float(_objective_grid(np.float64(th), beta, params))
            theta, val = _golden_min(f, grid[j - 1], grid[j + 1], rel_tol=rel_tol)
            return float(theta), float(val)
    raise ConvergenceError(
        f"could not bracket the inner minimum in theta (beta={beta}, window=[{lo:.3e},{hi:.3e}])"
    )


@dataclass(frozen=True)
class ScalarSolution:
    """Solution of a scalar saddle problem (closed form or numeric).

    upsilon is set on the ridge path only; objective and stationarity_residual
    on the box path only.
    """

    theta_star: float
    beta_star: float
    b_norm: float
    upsilon: float | None = None
    objective: float | None = None
    stationarity_residual: float | None = None


def box_saddle_solve(
    params: BoxObjectiveParams,
    rel_tol: float = GOLDEN_REL_TOL,
    beta_hint: float | None = None,
) -> ScalarSolution:
    """Solve sup_beta min_theta D(theta, beta) for the box decoder.

    The beta profile g(beta) = min_theta D is strictly concave, so an
    expanding geometric bracket plus golden section is reliable. beta_hint
    narrows the initial bracket (useful when sweeping a knob); the bracket
    still expands if the hint is off. The returned solution carries a central
    finite-difference stationarity residual; a residual above the hard
    threshold raises ConvergenceError.
    """
    if params.lam < 0 or params.t <= 0 or params.delta <= 0:
        raise ValueError("need lam >= 0, t > 0, delta > 0")
    lam_safe = max(params.lam, 1e-12)
    theta_hint = rls_theta_star(
        params.rho_d, params.sigma_hhat_sq, params.sigma_delta_sq, lam_safe, params.delta
    )
    if beta_hint is None:
        beta_hint = max(rls_beta_star(theta_hint, lam_safe, params.sigma_hhat_sq, params.delta), 1e-8)
        spread = 32.0
    else:
        spread = 4.0

    last_theta = [theta_hint]

    def profile(beta: float) -> float:
        th, val = box_theta_min(params, beta, theta_hint=last_theta[0], rel_tol=rel_tol)
        last_theta[0] = th
        return val

    lo, hi = beta_hint / spread, beta_hint * spread
    for _ in range(12):
        grid = np.geomspace(lo, hi, 17)
        vals = np.array([profile(b) for b in grid])
        j = int(np.argmax(vals))
        if j == 0:
            lo, hi = lo / 256.0, grid[2]
        elif j == len(grid) - 1:
            lo, hi = grid[-3], hi * 256.0
        else:
            beta_star, _ = _golden_min(
                lambda b: -profile(b), grid[j - 1], grid[j + 1], rel_tol=max(rel_tol, 1e-11)
            )
            break
    else:
        raise ConvergenceError("could not bracket the concave beta profile")

    theta_star, objective = box_theta_min(
        params, beta_star, theta_hint=last_theta[0], rel_tol=rel_tol
    )
    resid = _box_stationarity_residual(params, theta_star, beta_star)
    if resid > STATIONARITY_HARD:
        raise ConvergenceError(
            f"box saddle stationarity residual {resid:.3e} > {STATIONARITY_HARD:.0e} "
            f"(theta*={theta_star:.6g}, beta*={beta_star:.6g}, lam={params.lam}, t={params.t})"
        )
    ratio = params.sigma_hhat_sq * beta_star / theta_star
    b_norm = ratio / (ratio + 2.0 * params.lam)
    return ScalarSolution(
        theta_star=float(theta_star),
        beta_star=float(beta_star),
        b_norm=float(b_norm),
        objective=float(objective),
        stationarity_residual=float(resid),
    )


def _box_stationarity_residual(params: BoxObjectiveParams, theta: float, beta: float) -> float:
    """max(|dD/dtheta|, |dD/dbeta|) by central differences."""
    h_t = STATIONARITY_STEP * max(1.0, abs(theta))
    h_b = STATIONARITY_STEP * max(1.0, abs(beta))
    d_t = (box_objective(theta + h_t, beta, params) - box_objective(theta - h_t, beta, params)) / (2 * h_t)
    d_b = (box_objective(theta, beta + h_b, params) - box_objective(theta, beta - h_b, params)) / (2 * h_b)
    return max(abs(d_t), abs(d_b))


def box_sep(theta_star: float, b_norm: float, params: BoxObjectiveParams) -> float:
    """Limiting SEP of the box decoder for a general threshold.

    Four indicator groups cover inner symbols whose decision region is fully
    inside the box, partially clipped, or entirely outside, plus the edge
    symbols. Thresholds exactly on the odd lattice t/B = i/sqrt(E) are
    rejected as degenerate.
    """
    m = params.m
    sqrt_e = math.sqrt(params.energy_e)
    ratio = params.t / b_norm
    for i in range(1, m, 2):
        if abs(ratio - i / sqrt_e) < DEGENERATE_T_TOL:
            raise DegenerateThresholdError(
                f"t / B = {ratio!r} sits on the degenerate lattice point {i}/sqrt(E)"
            )
    q = float(qfunc(math.sqrt(params.rho_d * params.sigma_hhat_sq / params.energy_e) / theta_star))
    sep = 0.0
    for i in range(1, m - 2, 2):
        if ratio >= (i + 1) / sqrt_e:
            sep += 4.0 / m * q
        if (i - 1) / sqrt_e <= ratio <= (i + 1) / sqrt_e:
            sep += 2.0 / m * q
        if ratio <= (i - 1) / sqrt_e:
            sep += 2.0 / m
    if ratio >= (m - 2) / sqrt_e:
        sep += 2.0 / m * q
    if ratio <= (m - 2) / sqrt_e:
        sep += 2.0 / m
    return sep


# ---------------------------------------------------------------------------
# Numeric knob optimization and scenario-level prediction
# ---------------------------------------------------------------------------


def _theta_of_lambda(cfg: SystemConfig, kind: DecoderKind, t_box: float | None):
    dp = derive_params(cfg)

    if kind is DecoderKind.RLS:
        def f(lam: float) -> float:
            return rls_theta_star(dp.rho_d, dp.sigma_hhat_sq, dp.sigma_delta_sq, lam, dp.delta)
        return f
    if kind is DecoderKind.BOX:
        t = t_box if t_box is not None else (cfg.m - 1) / math.sqrt((cfg.m**2 - 1) / 3.0)
        last_beta: list[float | None] = [None]

        def f(lam: float) -> float:
            p = BoxObjectiveParams.from_config(cfg, lam=lam, t=t)
            sol = box_saddle_solve(p, rel_tol=1e-10, beta_hint=last_beta[0])
            last_beta[0] = sol.beta_star
            return sol.theta_star
        return f
    raise ValueError(f"no lambda to optimize for decoder {kind}")


def _scan_minimize(f, grid: np.ndarray, tol: float, label: str) -> float:
    """Sample f on grid, detect non-unimodality, refine the best interval by
    golden section. Falls back to a dense global scan when the sampled shape
    is not unimodal."""
    vals = np.array([f(g) for g in grid])
    diffs = np.sign(np.diff(vals))
    descents = np.where((diffs[:-1] < 0) & (diffs[1:] > 0))[0]
    if len(descents) > 1:
        warnings.warn(
            f"{label}: sampled objective is not unimodal; using dense-grid fallback",
            RuntimeWarning,
            stacklevel=2,
        )
        dense = np.linspace(grid[0], grid[-1], 1201)
        dvals = np.array([f(g) for g in dense])
        j = int(np.argmin(dvals))
        lo = dense[max(j - 1, 0)]
        hi = dense[min(j + 1, len(dense) - 1)]
    else:
        j = int(np.argmin(vals))
        lo = grid[max(j - 1, 0)]
        hi = grid[min(j + 1, len(grid) - 1)]
    x, _ = _golden_min(f, lo, hi, rel_tol=tol)
    return float(x)


def lambda_star_numeric(
    cfg: SystemConfig,
    kind: DecoderKind = DecoderKind.RLS,
    t_box: float | None = None,
    tol: float = SCALAR_SEARCH_TOL,
) -> float:
    """argmin over lam >= 0 of theta*(lam) for the requested decoder.

    The upper end of the bracket starts at a multiple of the closed-form
    ridge optimum and expands until the objective is increasing.
    """
    dp = derive_params(cfg)
    f = _theta_of_lambda(cfg, kind, t_box)
    hi = 4.0 * lambda_star_rls(dp.rho_d, dp.sigma_delta_sq)
    for _ in range(10):
        if f(hi) > f(hi / 2.0):
            break
        hi *= 4.0
    else:
        raise ConvergenceError("lambda bracket kept expanding without an interior minimum")
    grid = np.concatenate([[0.0], np.geomspace(hi * 1e-6, hi, 25)])
    return _scan_minimize(f, grid, tol, "lambda_star_numeric")


def t_star_numeric(
    cfg: SystemConfig,
    lam: float,
    tol: float = SCALAR_SEARCH_TOL,
) -> float:
    """argmin over t > 0 of the box decoder's theta*(t) at fixed lam."""
    t_ref = (cfg.m - 1) / math.sqrt((cfg.m**2 - 1) / 3.0)
    last_beta: list[float | None] = [None]

    def f(t: float) -> float:
        p = BoxObjectiveParams.from_config(cfg, lam=lam, t=t)
        sol = box_saddle_solve(p, rel_tol=1e-10, beta_hint=last_beta[0])
        last_beta[0] = sol.beta_star
        return sol.theta_star

    hi = 2.0 * t_ref
    for _ in range(10):
        if f(hi) > f(hi / 2.0):
            break
        hi *= 4.0
    else:
        raise ConvergenceError("t bracket kept expanding without an interior minimum")
    grid = np.geomspace(t_ref / 8.0, hi, 25)
    return _scan_minimize(f, grid, tol, "t_star_numeric")


@dataclass(frozen=True)
class Prediction:
    """Asymptotic performance triple for one scenario and decoder."""

    mse: float
    sep: float
    goodput: float


def scalar_solution(cfg: SystemConfig, spec: DecoderSpec) -> ScalarSolution:
    """Scalar saddle solution (theta*, beta*, B) for any decoder spec."""
    dp = derive_params(cfg)
    if spec.kind is DecoderKind.BOX:
        if spec.t_box is None:
            raise ConfigError("box decoder spec needs t_box")
        params = BoxObjectiveParams.from_config(cfg, lam=spec.lam, t=spec.t_box)
        return box_saddle_solve(params)
    if spec.kind is DecoderKind.LS:
        lam = 0.0
    elif spec.kind is DecoderKind.LMMSE:
        lam = lambda_star_rls(dp.rho_d, dp.sigma_delta_sq)
    else:
        lam = spec.lam
    theta = rls_theta_star(dp.rho_d, dp.sigma_hhat_sq, dp.sigma_delta_sq, lam, dp.delta)
    beta = rls_beta_star(theta, lam, dp.sigma_hhat_sq, dp.delta)
    u = upsilon(lam / dp.sigma_hhat_sq, dp.delta)
    return ScalarSolution(theta_star=theta, beta_star=beta, b_norm=1.0 / (1.0 + u), upsilon=u)


def predict(cfg: SystemConfig, spec: DecoderSpec, solution: ScalarSolution | None = None) -> Prediction:
    """Asymptotic MSE, SEP and goodput for one scenario and decoder.

    Pass a precomputed scalar_solution to avoid re-solving the box saddle.
    """
    dp = derive_params(cfg)
    sol = solution if solution is not None else scalar_solution(cfg, spec)
    mse = mse_from_theta(sol.theta_star, dp.rho_d, dp.sigma_hhat_sq, dp.sigma_delta_sq, dp.delta)
    if spec.kind is DecoderKind.BOX:
        params = BoxObjectiveParams.from_config(cfg, lam=spec.lam, t=spec.t_box)
        sep = box_sep(sol.theta_star, sol.b_norm, params)
    else:
        sep = rls_sep(sol.theta_star, dp.rho_d, dp.sigma_hhat_sq, cfg.m)
    goodput = (1.0 - dp.tau_p / dp.tau) * (1.0 - sep)
    return Prediction(mse=mse, sep=sep, goodput=goodput)
