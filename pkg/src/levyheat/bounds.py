"""Heat-kernel bound checks assembled from densities and rate functions.

* off-diagonal:  p_t(x) <= exp(-D_t^2(x)) p_t(0)
* on-diagonal:   sup_x p_t(x) <= c [f^{-1}(1 / (gamma t))]^{n/2}
* combined:      p_t(x) <= c exp(-D_t^2(x)) [f^{-1}(1 / (gamma t))]^{n/2},  t <= 1
* closed-form upper bounds for rate functions of compactly supported and
  tempered measures (Laplace-method constants).

Fits are carried out on log-scale quantities so that rows in the far tail
do not underflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .bernstein import BernsteinFn, invert_bernstein
from .density import density_grid
from .errors import (
    FeatureUnavailableError,
    LevyHeatError,
    OutOfRangeError,
    PreconditionError,
    RegimeError,
    RegimeWarning,
)
from .levy_model import LevyModel, TemperedTail
from .rate import rate_function

OFF_DIAGONAL_RTOL = 1e-8
DEFAULT_GAMMAS = tuple(2.0**-k for k in range(11))
UNDERFLOW = 1e-300
DEFAULT_EPS = 0.2


@dataclass
class BoundReport:
    bound_id: str
    fits: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    worst_slack: float = -math.inf
    tolerance: float = 0.0
    verdict: bool = False
    notes: list = field(default_factory=list)

    @property
    def verdict_text(self) -> str:
        return "pass" if self.verdict else "fail"

    def summary(self) -> dict:
        out = {"bound_id": self.bound_id, "verdict": self.verdict_text,
               "worst_slack": self.worst_slack, "tolerance": self.tolerance}
        out.update(self.fits)
        return out

    def csv_rows(self):
        for r in self.rows:
            yield (r["point"], r["lhs"], r["rhs"], r["slack"], r["flag"])


def _row(point, lhs, rhs, flag="ok", **extra):
    slack = lhs - rhs if math.isfinite(lhs) and math.isfinite(rhs) else math.nan
    return {"point": point, "lhs": lhs, "rhs": rhs, "slack": slack, "flag": flag, **extra}


def _finish(report: BoundReport) -> BoundReport:
    scored = [r["slack"] for r in report.rows if r["flag"] == "ok"]
    errors = any(r["flag"] == "error" for r in report.rows)
    report.worst_slack = max(scored) if scored else -math.inf
    report.verdict = (not errors) and report.worst_slack <= report.tolerance
    return report


def _density_for(model, t, xs):
    x_max = max([abs(float(x)) for x in xs] + [1.0]) + 1.0
    return density_grid(model, t, x_max=x_max)


def off_diagonal_check(model: LevyModel, t: float, xs: Sequence[float],
                       rtol: float = OFF_DIAGONAL_RTOL) -> BoundReport:
    """p_t(x) <= exp(-D_t^2(x)) p_t(0) on the points xs (1-D)."""
    if not model.has_exp_moments:
        raise PreconditionError("the off-diagonal bound needs exponential moments")
    grid = _density_for(model, t, xs)
    p0 = grid.at_origin
    report = BoundReport("off-diagonal", fits={"t": t, "p0": p0},
                         tolerance=rtol * p0)
    for x in xs:
        try:
            lhs = float(grid.value_at(float(x)))
            res = rate_function(model, t, float(x))
            rhs = math.exp(-res.D_sq) * p0
            flag = "ok" if res.converged else "boundary-capped"
            report.rows.append(_row(float(x), lhs, rhs, flag, D_sq=res.D_sq))
        except LevyHeatError as exc:
            report.rows.append(_row(float(x), math.nan, math.nan, "error",
                                    error=f"{exc.code}: {exc}"))
    return _finish(report)


def _require_admissible(f: BernsteinFn):
    if f.b > 0 or f.a > 0:
        raise PreconditionError(
            f"{f.name or f.kind} is not admissible: the on-diagonal bound needs "
            "f(0) = 0 and no linear term")


def _log_profile(f: BernsteinFn, gamma: float, t: float, n: int) -> float:
    """(n/2) log f^{-1}(1/(gamma t)); +inf when 1/(gamma t) is at or beyond sup f."""
    try:
        inv = invert_bernstein(f, 1.0 / (gamma * t))
    except OutOfRangeError:
        return math.inf
    return 0.5 * n * math.log(inv) if inv > 0 else -math.inf


def on_diagonal_fit(model: LevyModel, f: BernsteinFn, ts: Sequence[float],
                    n: Optional[int] = None,
                    gammas: Sequence[float] = DEFAULT_GAMMAS) -> BoundReport:
    """Smallest c per trial gamma with sup_x p_t(x) <= c [f^{-1}(1/(gamma t))]^{n/2}."""
    _require_admissible(f)
    n = model.dim if n is None else n
    peaks = {}
    errors = {}
    for t in ts:
        try:
            peaks[float(t)] = density_grid(model, t, x_max=2.0).peak
        except LevyHeatError as exc:
            errors[float(t)] = f"{exc.code}: {exc}"
    table = []
    for gamma in gammas:
        logs = [math.log(m) - _log_profile(f, gamma, t, n) for t, m in peaks.items()]
        finite = [v for v in logs if math.isfinite(v)]
        c = math.exp(max(finite)) if finite else 0.0
        table.append({"gamma": gamma, "c": c})
    best = table[0]
    report = BoundReport("on-diagonal", fits={"c": best["c"], "gamma": best["gamma"],
                                              "gamma_table": table, "n": n})
    for t in ts:
        t = float(t)
        if t in errors:
            report.rows.append(_row(t, math.nan, math.nan, "error", error=errors[t]))
            continue
        log_rhs = math.log(best["c"]) + _log_profile(f, best["gamma"], t, n) \
            if best["c"] > 0 else -math.inf
        rhs = math.exp(log_rhs) if log_rhs < 709 else math.inf
        report.rows.append(_row(t, peaks[t], rhs, "ok" if math.isfinite(rhs) else
                                "unbounded", log_lhs=math.log(peaks[t]), log_rhs=log_rhs))
    report.tolerance = 1e-12 * max(peaks.values(), default=1.0)
    _finish(report)
    report.verdict = report.verdict and any(
        math.isfinite(r["c"]) and r["c"] > 0 and r["gamma"] <= 1 for r in table)
    return report


def combined_bound_check(model: LevyModel, f: BernsteinFn, t: float,
                         xs: Sequence[float], fit: Optional[BoundReport] = None,
                         ts: Sequence[float] = (0.05, 0.1, 0.25, 0.5, 1.0),
                         rtol: float = OFF_DIAGONAL_RTOL) -> BoundReport:
    """p_t(x) <= c exp(-D_t^2(x)) [f^{-1}(1/(gamma t))]^{n/2} with fitted (c, gamma)."""
    if not 0 < t <= 1:
        raise PreconditionError("the combined bound is checked for 0 < t <= 1 only")
    _require_admissible(f)
    if fit is None:
        fit = on_diagonal_fit(model, f, ts)
    c, gamma, n = fit.fits["c"], fit.fits["gamma"], fit.fits["n"]
    log_scale = math.log(c) + _log_profile(f, gamma, t, n)
    grid = _density_for(model, t, xs)
    report = BoundReport("combined", fits={"c": c, "gamma": gamma, "t": t},
                         tolerance=rtol * grid.peak)
    for x in xs:
        x = float(x)
        try:
            res = rate_function(model, t, x)
            log_rhs = log_scale - res.D_sq
            rhs = math.exp(log_rhs) if log_rhs > math.log(UNDERFLOW) else 0.0
            try:
                lhs = float(grid.value_at(x))
            except LevyHeatError:
                lhs = 0.0 if rhs == 0.0 else math.nan
            if rhs == 0.0 and lhs <= report.tolerance:
                flag = "pass-by-underflow"
            else:
                flag = "ok"
            report.rows.append(_row(x, lhs, rhs, flag, log_rhs=log_rhs, D_sq=res.D_sq))
        except LevyHeatError as exc:
            report.rows.append(_row(x, math.nan, math.nan, "error",
                                    error=f"{exc.code}: {exc}"))
    return _finish(report)


# --------------------------------------------------------------------------
# closed-form rate bounds


def example_i_rate_bound(c1: float, eps: float, t: float, x: float) -> float:
    """min_xi(-xi x + c1 t e^{(1+eps) xi}) = -x/(1+eps) log(x/(t c1 (1+eps))) + x/(1+eps)."""
    if not (c1 > 0 and eps > 0 and t > 0):
        raise PreconditionError("c1, eps and t must be positive")
    x = abs(x)
    b = t * c1 * (1.0 + eps)
    if not x > b:
        raise RegimeError(f"bound needs x > t c1 (1+eps) = {b!r}, got x={x!r}")
    return -x / (1.0 + eps) * math.log(x / b) + x / (1.0 + eps)


def fit_c1(model: LevyModel, eps: float = DEFAULT_EPS, method: str = "sup") -> float:
    """Constant c1 with Lambda(xi) <= c1 exp((1+eps) xi) for xi >= 0.

    ``sup`` returns the sharp value sup_xi Lambda(xi) e^{-(1+eps) xi};
    ``moment`` the cruder (2/(e eps))^2 / 2 * int y^2 nu(dy), valid when the
    measure lives on [-1, 1].
    """
    if model.dim != 1:
        raise FeatureUnavailableError("c1 is fitted for one-dimensional models")
    if method == "moment":
        return 0.5 * (2.0 / (math.e * eps)) ** 2 * float(model.second_moment_matrix[0, 0])
    if method != "sup":
        raise PreconditionError(f"unknown c1 method {method!r}")

    def neg_log(s):
        lam = float(model._cumulant(np.array([[s]]))[0])
        return -(math.log(lam) - (1.0 + eps) * s) if lam > 0 else math.inf

    grid = np.geomspace(1e-3, 200.0, 200)
    vals = [neg_log(s) for s in grid]
    k = int(np.argmin(vals))
    # the ratio may keep growing (tails heavier than e^{-|y|}) -> unbounded
    if k == grid.size - 1 or not all(math.isfinite(v) for v in vals):
        raise PreconditionError("Lambda(xi) e^{-(1+eps) xi} is unbounded; no finite c1")
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = optimize.minimize_scalar(neg_log, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-10})
    best = min(res.fun, vals[k])
    return math.exp(-best)


@dataclass(frozen=True)
class LaplaceConstants:
    beta: float
    c1: float
    xi_power: float
    exp_power: float
    c2: float

    def asymptotic(self, xi):
        """c2 xi^{xi_power} exp(c1 xi^{exp_power}) ~ int_1^inf e^{xi y - y^beta} dy."""
        xi = np.asarray(xi, dtype=float)
        return self.c2 * xi**self.xi_power * np.exp(self.c1 * xi**self.exp_power)

    def log_asymptotic(self, xi):
        xi = np.asarray(xi, dtype=float)
        return math.log(self.c2) + self.xi_power * np.log(xi) + self.c1 * xi**self.exp_power


def laplace_constants(beta: float) -> LaplaceConstants:
    """Laplace-method constants for I(xi) = int_1^inf exp(xi y - y^beta) dy."""
    if not beta > 1:
        raise PreconditionError("beta must exceed 1 (no exponential moments otherwise)")
    if beta < 1.05:
        warnings.warn(f"beta={beta!r} is close to 1: c_beta1 -> 0 and the "
                      "asymptotics set in only for very large xi", RegimeWarning,
                      stacklevel=2)
    c1 = (beta - 1.0) * beta ** (beta / (1.0 - beta))
    xi_power = (2.0 - beta) / (2.0 * (beta - 1.0))
    exp_power = beta / (beta - 1.0)
    c2 = math.sqrt(2.0 * math.pi / (beta * (beta - 1.0))) * \
        beta ** ((beta - 2.0) / (2.0 * (beta - 1.0)))
    return LaplaceConstants(beta, c1, xi_power, exp_power, c2)


@dataclass
class AsymptoticsReport:
    beta: float
    t: float
    eps: float
    rows: list = field(default_factory=list)

    @property
    def scored(self):
        return [r for r in self.rows if r["flag"] == "ok"]

    @property
    def deviations(self) -> np.ndarray:
        return np.array([r["deviation"] for r in self.scored])

    @property
    def ratio_trend_ok(self) -> bool:
        d = self.deviations
        return bool(d.size >= 2 and np.all(np.diff(d) < 0))

    @property
    def last_deviation(self) -> float:
        d = self.deviations
        return float(d[-1]) if d.size else math.inf

    @property
    def rate_bound_ok(self) -> bool:
        s = self.scored
        return bool(s) and s[-1]["rate_bound_ok"]

    @property
    def verdict(self) -> bool:
        return self.ratio_trend_ok and self.rate_bound_ok


def example_iii_asymptotics_check(model: LevyModel, t: float, xs: Sequence[float],
                                  eps: float = DEFAULT_EPS, beta: Optional[float] = None,
                                  regime: float = 10.0) -> AsymptoticsReport:
    """Compare xi_0(x) with (log(x/t) / c_beta1)^{(beta-1)/beta} along increasing x."""
    if beta is None:
        measure = model.measure
        if not isinstance(measure, TemperedTail):
            raise PreconditionError("pass beta or use a tempered-tail model")
        beta = measure.beta
    lc = laplace_constants(beta)
    q = (beta - 1.0) / beta
    report = AsymptoticsReport(beta=beta, t=t, eps=eps)
    for x in xs:
        x = float(x)
        row = {"x": x, "xi0": math.nan, "reference": math.nan, "ratio": math.nan,
               "deviation": math.nan, "D_sq": math.nan, "rate_bound": math.nan,
               "rate_bound_ok": False, "flag": "ok"}
        if x / t <= regime:
            row["flag"] = "below-regime"
            report.rows.append(row)
            continue
        try:
            res = rate_function(model, t, x)
        except LevyHeatError as exc:
            row["flag"] = f"error: {exc}"
            report.rows.append(row)
            continue
        ref = (math.log(x / t) / lc.c1) ** q
        bound = (1.0 - eps) * x * ref
        row.update(xi0=float(res.xi0), reference=ref, ratio=float(res.xi0) / ref,
                   deviation=abs(float(res.xi0) / ref - 1.0), D_sq=res.D_sq,
                   rate_bound=bound, rate_bound_ok=res.D_sq >= bound)
        if not res.converged:
            row["flag"] = "boundary-capped"
        report.rows.append(row)
    return report
