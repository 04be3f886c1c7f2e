"""Sweep orchestration: config files, theory/simulation runs, CSV output.

Config files are flat key=value text. A sweep walks one axis (rho in dB, the
data power ratio, the ridge coefficient, the box threshold, or the normalized
training duration) and evaluates each requested decoder at every point,
joining the asymptotic predictions with Monte Carlo statistics in one CSV row
per (value, decoder).
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, replace

from .allocation import alpha_star_for_config, optimize_goodput
from .asymptotics import (
    Prediction,
    ScalarSolution,
    lambda_star_numeric,
    lambda_star_rls,
    predict,
    scalar_solution,
    t_star_numeric,
)
from .decoders import DecoderKind, DecoderSpec
from .errors import ConfigError, ConvergenceError, DegenerateThresholdError, InfeasibleError
from .simulate import run_batch
from .system import PowerConvention, SystemConfig, db_to_linear, derive_params, linear_to_db

DEFAULT_TRIALS = 500
DEFAULT_MASTER_SEED = 1729
COMPARE_SIGMAS = 3.0


class SweepAxis(str, enum.Enum):
    RHO_DB = "rho_db"
    ALPHA = "alpha"
    LAMBDA = "lambda"
    T_BOX = "t_box"
    TAU_P = "tau_p"


class LambdaPolicy(str, enum.Enum):
    FIXED = "fixed"
    CLOSED_FORM_OPTIMAL = "closed_form_optimal"
    NUMERIC_OPTIMAL = "numeric_optimal"


class TPolicy(str, enum.Enum):
    FIXED = "fixed"
    MAX_SYMBOL = "max_symbol"
    NUMERIC_OPTIMAL = "numeric_optimal"


@dataclass(frozen=True)
class SweepSpec:
    base: SystemConfig
    sweep_axis: SweepAxis
    values: tuple[float, ...]
    decoders: tuple[DecoderKind, ...]
    trials: int = DEFAULT_TRIALS
    master_seed: int = DEFAULT_MASTER_SEED
    lambda_policy: LambdaPolicy = LambdaPolicy.CLOSED_FORM_OPTIMAL
    t_policy: TPolicy = TPolicy.MAX_SYMBOL

    def __post_init__(self) -> None:
        if not self.values:
            raise ConfigError("values must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ConfigError("values must be strictly increasing")
        if not self.decoders:
            raise ConfigError("decoders must be non-empty")
        if self.trials < 0:
            raise ConfigError("trials must be nonnegative")


_REQUIRED_KEYS = (
    "k", "n", "t_total", "t_pilot", "rho_db", "alpha", "m",
    "sweep_axis", "values", "decoders",
)
_OPTIONAL_KEYS = (
    "power_convention", "trials", "master_seed", "lambda_policy", "t_policy",
    "lambda", "t_box",
)
_CONVENTIONS = {
    "energy": PowerConvention.ENERGY_CONSERVING,
    "direct": PowerConvention.DIRECT_SPLIT,
}


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected an integer, got {raw!r}") from exc


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected a number, got {raw!r}") from exc


def load_config(path: str) -> SweepSpec:
    """Parse a flat key=value sweep config; unknown keys are hard errors."""
    pairs: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {stripped!r}")
            key, _, raw = stripped.partition("=")
            key = key.strip().lower()
            if key in pairs:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            pairs[key] = raw.strip()
    for key in pairs:
        if key not in _REQUIRED_KEYS and key not in _OPTIONAL_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
    for key in _REQUIRED_KEYS:
        if key not in pairs:
            raise ConfigError(f"missing required config key {key!r}")

    convention = pairs.get("power_convention", "energy").lower()
    if convention not in _CONVENTIONS:
        raise ConfigError(f"key 'power_convention': expected energy|direct, got {convention!r}")
    t_box = _parse_float(pairs["t_box"], "t_box") if "t_box" in pairs else None
    base = SystemConfig(
        k=_parse_int(pairs["k"], "k"),
        n=_parse_int(pairs["n"], "n"),
        t_total=_parse_int(pairs["t_total"], "t_total"),
        t_pilot=_parse_int(pairs["t_pilot"], "t_pilot"),
        rho=db_to_linear(_parse_float(pairs["rho_db"], "rho_db")),
        alpha=_parse_float(pairs["alpha"], "alpha"),
        m=_parse_int(pairs["m"], "m"),
        lam=_parse_float(pairs.get("lambda", "0"), "lambda"),
        t_box=t_box,
        power_convention=_CONVENTIONS[convention],
    )
    try:
        axis = SweepAxis(pairs["sweep_axis"].lower())
    except ValueError as exc:
        raise ConfigError(f"key 'sweep_axis': unknown axis {pairs['sweep_axis']!r}") from exc
    values = tuple(_parse_float(v, "values") for v in pairs["values"].split(",") if v.strip())
    try:
        decoders = tuple(DecoderKind(d.strip().lower()) for d in pairs["decoders"].split(",") if d.strip())
    except ValueError as exc:
        raise ConfigError(f"key 'decoders': {exc}") from exc
    try:
        lambda_policy = LambdaPolicy(pairs.get("lambda_policy", "closed_form_optimal").lower())
        t_policy = TPolicy(pairs.get("t_policy", "max_symbol").lower())
    except ValueError as exc:
        raise ConfigError(f"bad policy value: {exc}") from exc
    if lambda_policy is LambdaPolicy.FIXED and "lambda" not in pairs:
        raise ConfigError("lambda_policy = fixed requires an explicit 'lambda' key")
    if t_policy is TPolicy.FIXED and t_box is None:
        raise ConfigError("t_policy = fixed requires an explicit 't_box' key")
    return SweepSpec(
        base=base,
        sweep_axis=axis,
        values=values,
        decoders=decoders,
        trials=_parse_int(pairs.get("trials", str(DEFAULT_TRIALS)), "trials"),
        master_seed=_parse_int(pairs.get("master_seed", str(DEFAULT_MASTER_SEED)), "master_seed"),
        lambda_policy=lambda_policy,
        t_policy=t_policy,
    )


def write_config(spec: SweepSpec, path: str) -> None:
    """Serialize a sweep spec so load_config round-trips it exactly."""
    base = spec.base
    lines = [
        f"k = {base.k}",
        f"n = {base.n}",
        f"t_total = {base.t_total}",
        f"t_pilot = {base.t_pilot}",
        f"rho_db = {linear_to_db(base.rho)!r}",
        f"alpha = {base.alpha!r}",
        f"m = {base.m}",
        f"lambda = {base.lam!r}",
        f"power_convention = {base.power_convention.value}",
        f"sweep_axis = {spec.sweep_axis.value}",
        "values = " + ",".join(repr(v) for v in spec.values),
        "decoders = " + ",".join(d.value for d in spec.decoders),
        f"trials = {spec.trials}",
        f"master_seed = {spec.master_seed}",
        f"lambda_policy = {spec.lambda_policy.value}",
        f"t_policy = {spec.t_policy.value}",
    ]
    if base.t_box is not None:
        lines.append(f"t_box = {base.t_box!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


CSV_COLUMNS = (
    "k", "n", "t_total", "t_pilot", "rho_db", "alpha", "m", "decoder", "lambda",
    "t_box", "power_convention", "theta_star", "beta_star", "b_norm",
    "mse_theory", "sep_theory", "goodput_theory",
    "mse_sim", "ser_sim", "stderr_mse", "stderr_ser", "trials", "master_seed", "error",
)


@dataclass(frozen=True)
class SweepRecord:
    k: int
    n: int
    t_total: int
    t_pilot: int
    rho_db: float
    alpha: float
    m: int
    decoder: str
    lam: float | None
    t_box: float | None
    power_convention: str
    theta_star: float | None = None
    beta_star: float | None = None
    b_norm: float | None = None
    mse_theory: float | None = None
    sep_theory: float | None = None
    goodput_theory: float | None = None
    mse_sim: float | None = None
    ser_sim: float | None = None
    stderr_mse: float | None = None
    stderr_ser: float | None = None
    trials: int = 0
    master_seed: int = 0
    error: str = ""

    def row(self) -> list:
        def fmt(v):
            # float() strips numpy scalar wrappers so repr stays parseable
            return "" if v is None else (repr(float(v)) if isinstance(v, float) else v)

        return [
            self.k, self.n, self.t_total, self.t_pilot, fmt(self.rho_db), fmt(self.alpha),
            self.m, self.decoder, fmt(self.lam), fmt(self.t_box), self.power_convention,
            fmt(self.theta_star), fmt(self.beta_star), fmt(self.b_norm),
            fmt(self.mse_theory), fmt(self.sep_theory), fmt(self.goodput_theory),
            fmt(self.mse_sim), fmt(self.ser_sim), fmt(self.stderr_mse), fmt(self.stderr_ser),
            self.trials, self.master_seed, self.error,
        ]


def records_to_csv(records: list[SweepRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def apply_sweep_value(spec: SweepSpec, value: float) -> SystemConfig:
    """Instantiate the base config at one sweep point."""
    base = spec.base
    axis = spec.sweep_axis
    if axis is SweepAxis.RHO_DB:
        return replace(base, rho=db_to_linear(value))
    if axis is SweepAxis.ALPHA:
        return replace(base, alpha=value)
    if axis is SweepAxis.LAMBDA:
        return replace(base, lam=value)
    if axis is SweepAxis.T_BOX:
        return replace(base, t_box=value)
    t_pilot = value * base.k
    if abs(t_pilot - round(t_pilot)) > 1e-9:
        raise ConfigError(f"tau_p value {value} does not give an integer pilot count")
    return replace(base, t_pilot=int(round(t_pilot)))


def resolve_decoder(spec: SweepSpec, cfg: SystemConfig, kind: DecoderKind) -> DecoderSpec:
    """Pin lambda and the box threshold for one decoder at one sweep point.

    Sweeping the lambda (resp. t_box) axis overrides the corresponding policy
    at the swept value. When both knobs are numeric-optimal, lambda is
    optimized first at the max-symbol threshold, then the threshold at that
    lambda.
    """
    dp = derive_params(cfg)
    if kind is DecoderKind.LS:
        return DecoderSpec.ls()
    if kind is DecoderKind.LMMSE:
        return DecoderSpec.lmmse()

    t_box = None
    if kind is DecoderKind.BOX:
        if spec.sweep_axis is SweepAxis.T_BOX:
            t_box = cfg.t_box
        elif spec.t_policy is TPolicy.FIXED:
            if cfg.t_box is None:
                raise ConfigError("t_policy = fixed needs t_box in the config")
            t_box = cfg.t_box
        else:
            t_box = (cfg.m - 1) / math.sqrt((cfg.m**2 - 1) / 3.0)

    if spec.sweep_axis is SweepAxis.LAMBDA:
        lam = cfg.lam
    elif spec.lambda_policy is LambdaPolicy.FIXED:
        lam = cfg.lam
    elif spec.lambda_policy is LambdaPolicy.CLOSED_FORM_OPTIMAL:
        lam = lambda_star_rls(dp.rho_d, dp.sigma_delta_sq)
    else:
        lam = lambda_star_numeric(cfg, kind, t_box=t_box)

    if kind is DecoderKind.BOX and spec.t_policy is TPolicy.NUMERIC_OPTIMAL and spec.sweep_axis is not SweepAxis.T_BOX:
        t_box = t_star_numeric(cfg, lam)

    if kind is DecoderKind.BOX:
        return DecoderSpec.box(lam, t_box)
    return DecoderSpec.rls(lam)


_SOLVER_ERRORS = (ConvergenceError, InfeasibleError, DegenerateThresholdError)


def _evaluate_point(
    spec: SweepSpec, cfg: SystemConfig, kind: DecoderKind, simulate: bool, workers: int
) -> SweepRecord:
    shell = SweepRecord(
        k=cfg.k, n=cfg.n, t_total=cfg.t_total, t_pilot=cfg.t_pilot,
        rho_db=linear_to_db(cfg.rho), alpha=cfg.alpha, m=cfg.m, decoder=kind.value,
        lam=None, t_box=None, power_convention=cfg.power_convention.value,
        trials=0, master_seed=spec.master_seed,
    )
    try:
        dspec = resolve_decoder(spec, cfg, kind)
    except _SOLVER_ERRORS as exc:
        return replace(shell, error=str(exc))
    shell = replace(shell, lam=dspec.lam if kind is not DecoderKind.LMMSE else None,
                    t_box=dspec.t_box)
    try:
        sol: ScalarSolution = scalar_solution(cfg, dspec)
        pred: Prediction = predict(cfg, dspec, solution=sol)
    except _SOLVER_ERRORS as exc:
        return replace(shell, error=str(exc))
    shell = replace(
        shell,
        theta_star=sol.theta_star, beta_star=sol.beta_star, b_norm=sol.b_norm,
        mse_theory=pred.mse, sep_theory=pred.sep, goodput_theory=pred.goodput,
    )
    if not simulate or spec.trials == 0:
        return shell
    try:
        stats = run_batch(cfg, dspec, spec.trials, spec.master_seed,
                          workers=workers, b_norm=sol.b_norm)
    except _SOLVER_ERRORS as exc:
        return replace(shell, error=str(exc))
    return replace(
        shell,
        mse_sim=stats.mean_mse, ser_sim=stats.mean_ser,
        stderr_mse=stats.stderr_mse, stderr_ser=stats.stderr_ser,
        trials=stats.trials,
    )


@dataclass(frozen=True)
class RunResult:
    records: list[SweepRecord]
    report: str
    flagged: int
    solver_errors: int


MODES = ("predict", "simulate", "compare", "optimize_power", "optimize_goodput")


def run(spec: SweepSpec, mode: str, workers: int = 1) -> RunResult:
    """Execute one mode over the sweep and build records plus a text report.

    Optimization modes sweep rho when the axis is rho_db and otherwise run a
    single optimization at the base config's rho.
    """
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    records: list[SweepRecord] = []
    lines: list[str] = [f"mode={mode} axis={spec.sweep_axis.value} decoders=" +
                        ",".join(d.value for d in spec.decoders)]
    flagged = 0

    if mode in ("predict", "simulate", "compare"):
        simulate = mode != "predict"
        for value in spec.values:
            cfg = apply_sweep_value(spec, value)
            for kind in spec.decoders:
                rec = _evaluate_point(spec, cfg, kind, simulate, workers)
                records.append(rec)
                if rec.error:
                    lines.append(f"{spec.sweep_axis.value}={value} {kind.value}: ERROR {rec.error}")
                    continue
                msg = (f"{spec.sweep_axis.value}={value} {kind.value}: "
                       f"mse={rec.mse_theory:.6g} sep={rec.sep_theory:.6g}")
                if rec.mse_sim is not None:
                    msg += f" mse_sim={rec.mse_sim:.6g} ser_sim={rec.ser_sim:.6g}"
                if mode == "compare" and rec.mse_sim is not None and rec.trials > 1:
                    gap = abs(rec.mse_sim - rec.mse_theory)
                    if gap > COMPARE_SIGMAS * rec.stderr_mse:
                        flagged += 1
                        msg += f"  FLAGGED |mse gap|={gap:.3g} > {COMPARE_SIGMAS}*stderr={COMPARE_SIGMAS * rec.stderr_mse:.3g}"
                lines.append(msg)
    else:
        rho_values = list(spec.values) if spec.sweep_axis is SweepAxis.RHO_DB \
            else [linear_to_db(spec.base.rho)]
        for rho_db in rho_values:
            cfg = replace(spec.base, rho=db_to_linear(rho_db))
            if mode == "optimize_power":
                alloc = alpha_star_for_config(cfg)
                cfg = replace(cfg, alpha=alloc.alpha_star)
                lines.append(f"rho_db={rho_db}: alpha_star={alloc.alpha_star:.6f} "
                             f"branch={alloc.branch} rho_eff={alloc.rho_eff_at_star:.6g}")
            else:
                dp = derive_params(cfg)
                alloc = optimize_goodput(cfg.rho, cfg.k, cfg.t_total, dp.delta, cfg.m)
                t_pilot_star = int(round(alloc.tau_p_star * cfg.k))
                cfg = replace(cfg, alpha=alloc.alpha_star, t_pilot=t_pilot_star)
                lines.append(f"rho_db={rho_db}: t_pilot_star={t_pilot_star} "
                             f"alpha_star={alloc.alpha_star:.6f} goodput={alloc.goodput:.6f}")
            for kind in spec.decoders:
                rec = _evaluate_point(spec, cfg, kind, False, workers)
                records.append(rec)
                if rec.error:
                    lines.append(f"  {kind.value}: ERROR {rec.error}")

    solver_errors = sum(1 for r in records if r.error)
    if mode == "compare":
        lines.append(f"flagged points: {flagged}")
    if solver_errors:
        lines.append(f"solver errors: {solver_errors}")
    return RunResult(records=records, report="\n".join(lines) + "\n",
                     flagged=flagged, solver_errors=solver_errors)


def write_outputs(result: RunResult, csv_path: str, report_path: str | None = None) -> None:
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(result.records))
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(result.report)
