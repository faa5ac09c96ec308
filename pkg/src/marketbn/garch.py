"""Autoregressive mean filtering with GARCH conditional variance, BIC-selected."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize, signal
from scipy.special import expit

from .errors import FitError, InputError
from .panel import TimePanel

log = logging.getLogger(__name__)

INTERNAL_SCALE = 1000.0
MIN_OBS = 500
MODES = ("ar_garch", "garch_only")
LOG_2PI = math.log(2.0 * math.pi)
_PERSISTENCE_CAP = 1.0 - 1e-6


@dataclass(frozen=True, eq=False)
class FilterModel:
    """Fitted mean/variance filter for one series.

    ``mean_params`` is (intercept, ar_1..ar_L) and ``variance_params`` is
    (omega, alpha_1..p, beta_1..q), both on the input scale. ``bic`` keeps
    the internally scaled likelihood so magnitudes are comparable across
    series. ``residuals`` are standardized innovations divided by 1,000.
    """

    instrument: str
    mode: str
    ar_order: int
    garch_p: int
    garch_q: int
    mean_params: tuple[float, ...]
    variance_params: tuple[float, ...]
    bic: float
    residuals: np.ndarray

    def __post_init__(self):
        if self.mode not in MODES:
            raise InputError(f"unknown filter mode {self.mode!r}")
        omega = self.variance_params[0]
        alphas = self.variance_params[1 : 1 + self.garch_p]
        betas = self.variance_params[1 + self.garch_p :]
        if len(betas) != self.garch_q:
            raise InputError("variance parameter count disagrees with (p, q)")
        if not omega > 0.0:
            raise InputError("omega must be positive")
        if any(a < 0.0 for a in alphas) or any(b < 0.0 for b in betas):
            raise InputError("alpha and beta must be non-negative")
        if sum(alphas) + sum(betas) >= 1.0:
            raise InputError("persistence must stay below one")
        if len(self.mean_params) != self.ar_order + 1:
            raise InputError("mean parameter count disagrees with the AR order")


class _CellProblem:
    """Negative log likelihood of one (lag, p, q) grid cell on scaled data."""

    def __init__(self, y: np.ndarray, lag: int, p: int, q: int):
        self.lag, self.p, self.q = lag, p, q
        self.y_eff = y[lag:]
        self.n = self.y_eff.size
        if lag:
            self.lagmat = np.column_stack(
                [y[lag - k : y.size - k] for k in range(1, lag + 1)]
            )
        else:
            self.lagmat = np.empty((self.n, 0))
        self.dim = (lag + 1) + 1 + p + q
        self._beta_poly = np.empty(q + 1)

    # parameter vector layout: [intercept, ar..., ln omega, logit alpha..., logit beta...]

    def decode(self, x: np.ndarray):
        lag, p, q = self.lag, self.p, self.q
        c = x[0]
        phi = x[1 : 1 + lag]
        omega = math.exp(min(x[1 + lag], 700.0))
        ab = expit(x[2 + lag :])
        total = ab.sum()
        if total > _PERSISTENCE_CAP:
            ab = ab * (_PERSISTENCE_CAP / total)
        return c, phi, omega, ab[:p], ab[p:]

    def encode(self, c, phi, omega, alphas, betas) -> np.ndarray:
        def logit(v):
            return math.log(v / (1.0 - v))

        return np.array(
            [c, *phi, math.log(omega), *[logit(a) for a in alphas],
             *[logit(b) for b in betas]]
        )

    def sigma2(self, eps2: np.ndarray, omega, alphas, betas) -> np.ndarray:
        """Conditional variance recursion, seeded at the mean of eps2."""
        p, q, n = self.p, self.q, self.n
        vbar = eps2.mean()
        u = np.full(n, omega)
        if p:
            ext = np.concatenate([np.full(p, vbar), eps2])
            for i in range(1, p + 1):
                u += alphas[i - 1] * ext[p - i : p - i + n]
        if q:
            # pre-sample variances equal vbar; fold them into the drive term
            tail = np.cumsum(betas[::-1])[::-1]  # tail[t] = beta_{t+1} + ... + beta_q
            m = min(q, n)
            u[:m] += tail[:m] * vbar
            poly = self._beta_poly
            poly[0] = 1.0
            poly[1:] = -betas
            s2 = signal.lfilter([1.0], poly, u)
        else:
            s2 = u
        return s2

    def nll(self, x: np.ndarray) -> float:
        c, phi, omega, alphas, betas = self.decode(x)
        if not math.isfinite(omega):
            return float("inf")
        eps = self.y_eff - c - self.lagmat @ phi
        eps2 = eps * eps
        if not np.isfinite(eps2).all() or eps2.mean() <= 0.0:
            return float("inf")
        s2 = self.sigma2(eps2, omega, alphas, betas)
        if not np.isfinite(s2).all() or (s2 <= 0.0).any():
            return float("inf")
        value = 0.5 * (self.n * LOG_2PI + np.log(s2).sum() + (eps2 / s2).sum())
        return float(value) if math.isfinite(value) else float("inf")

    def nll_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        """Objective value with its exact gradient in transformed coordinates.

        The reverse pass runs the variance recursion's adjoint through the
        same lfilter, so the gradient is exact including the vbar seeding and
        the soft persistence rescale. Used only by the quasi-Newton polish;
        finite differences stall at the likelihood's rounding noise floor,
        which is too coarse for residuals to agree across input scalings.
        """
        lag, p, q, n = self.lag, self.p, self.q, self.n
        c = x[0]
        phi = x[1 : 1 + lag]
        omega = math.exp(min(x[1 + lag], 700.0))
        raw = expit(x[2 + lag :])
        total = raw.sum()
        rescaled = total > _PERSISTENCE_CAP
        ab = raw * (_PERSISTENCE_CAP / total) if rescaled else raw
        alphas, betas = ab[:p], ab[p:]

        eps = self.y_eff - c - self.lagmat @ phi
        eps2 = eps * eps
        if not np.isfinite(eps2).all() or eps2.mean() <= 0.0:
            return float("inf"), np.zeros(self.dim)
        vbar = eps2.mean()
        s2 = self.sigma2(eps2, omega, alphas, betas)
        if not np.isfinite(s2).all() or (s2 <= 0.0).any():
            return float("inf"), np.zeros(self.dim)
        value = 0.5 * (n * LOG_2PI + np.log(s2).sum() + (eps2 / s2).sum())
        if not math.isfinite(value):
            return float("inf"), np.zeros(self.dim)

        # adjoint of s2_t = drive_t + sum_j beta_j s2_{t-j}
        w = 0.5 * (1.0 / s2 - eps2 / (s2 * s2))
        if q:
            poly = self._beta_poly
            poly[0] = 1.0
            poly[1:] = -betas
            lam = signal.lfilter([1.0], poly, w[::-1])[::-1]
        else:
            lam = w

        d_omega = float(lam.sum())
        d_alpha = np.empty(p)
        for i in range(1, p + 1):
            d_alpha[i - 1] = float(lam[i:] @ eps2[: n - i]) + vbar * float(
                lam[: min(i, n)].sum()
            )
        d_beta = np.empty(q)
        for j in range(1, q + 1):
            d_beta[j - 1] = float(lam[j:] @ s2[: n - j]) + vbar * float(
                lam[: min(j, n)].sum()
            )

        # pre-sample terms depend on vbar, which depends on eps
        atail = np.cumsum(alphas[::-1])[::-1] if p else np.empty(0)
        btail = np.cumsum(betas[::-1])[::-1] if q else np.empty(0)
        d_vbar = 0.0
        if p:
            m = min(p, n)
            d_vbar += float(lam[:m] @ atail[:m])
        if q:
            m = min(q, n)
            d_vbar += float(lam[:m] @ btail[:m])

        g2 = np.zeros(n)
        for i in range(1, p + 1):
            g2[: n - i] += alphas[i - 1] * lam[i:]
        d_eps = eps / s2 + 2.0 * eps * g2 + (2.0 / n) * d_vbar * eps

        grad = np.empty(self.dim)
        grad[0] = -float(d_eps.sum())
        grad[1 : 1 + lag] = -(self.lagmat.T @ d_eps)
        grad[1 + lag] = omega * d_omega if x[1 + lag] < 700.0 else 0.0
        d_ab = np.concatenate([d_alpha, d_beta])
        if rescaled:
            scale = _PERSISTENCE_CAP / total
            d_raw = scale * d_ab - (scale / total) * float(raw @ d_ab)
        else:
            d_raw = d_ab
        grad[2 + lag :] = raw * (1.0 - raw) * d_raw
        return float(value), grad

    def initial_point(self) -> np.ndarray:
        """OLS mean start plus a mildly persistent variance start."""
        X = np.column_stack([np.ones(self.n), self.lagmat])
        coef, *_ = np.linalg.lstsq(X, self.y_eff, rcond=None)
        eps = self.y_eff - X @ coef
        vbar = float((eps * eps).mean())
        if vbar <= 0.0:
            vbar = 1.0
        omega0 = 0.1 * vbar
        alphas = [0.10 / self.p] * self.p
        betas = [0.80 / self.q] * self.q
        return self.encode(coef[0], coef[1:], omega0, alphas, betas)

    def initial_simplex(self, x0: np.ndarray) -> np.ndarray:
        """Absolute coordinate steps so the search path is scale-stable."""
        steps = np.full(self.dim, 0.5)
        scale = float(self.y_eff.std()) or 1.0
        steps[0] = 0.1 * scale
        steps[1 : 1 + self.lag] = 0.1
        simplex = np.tile(x0, (self.dim + 1, 1))
        for i in range(self.dim):
            simplex[i + 1, i] += steps[i]
        return simplex


def _fit_cell(problem: _CellProblem) -> tuple[float, np.ndarray] | None:
    """Simplex minimization with deterministic restarts; None when the cell
    never produces a finite objective."""
    x0 = problem.initial_point()
    shifts = (0.0, 0.3, -0.3)
    best: tuple[float, np.ndarray] | None = None
    for shift in shifts:
        start = x0 + shift
        result = optimize.minimize(
            problem.nll,
            start,
            method="Nelder-Mead",
            options={
                "initial_simplex": problem.initial_simplex(start),
                "xatol": 1e-4,
                "fatol": 1e-7,
                "maxfev": 200 * problem.dim,
                "adaptive": True,
            },
        )
        if math.isfinite(result.fun):
            if best is None or result.fun < best[0]:
                best = (float(result.fun), np.asarray(result.x))
            if result.success:
                break
    return best


def _polish(problem: _CellProblem, x: np.ndarray, fun: float) -> tuple[float, np.ndarray]:
    """Drive the winning cell to a high-precision optimum.

    The simplex stops within its tolerance of the optimum, which is not tight
    enough for residuals to agree across rescaled inputs; a quasi-Newton
    polish pins the final point down to solver precision.
    """
    result = optimize.minimize(
        problem.nll_grad,
        x,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": 500, "ftol": 1e-15, "gtol": 1e-12},
    )
    if math.isfinite(result.fun) and result.fun <= fun:
        fun, x = float(result.fun), np.asarray(result.x)

    # line searches stop at the objective's rounding noise; solving for a
    # gradient zero localizes the optimum well past that floor
    grad_norm = float(np.abs(problem.nll_grad(x)[1]).max())
    if math.isfinite(grad_norm) and grad_norm > 0.0:
        root = optimize.root(
            lambda v: problem.nll_grad(v)[1], x, method="hybr",
            options={"xtol": 1e-13},
        )
        if root.success:
            f_root, g_root = problem.nll_grad(np.asarray(root.x))
            if (
                math.isfinite(f_root)
                and f_root <= fun + 1e-7 * (1.0 + abs(fun))
                and float(np.abs(g_root).max()) < grad_norm
            ):
                return f_root, np.asarray(root.x)
    return fun, x
    return fun, x


def fit_filter(
    series: Sequence[float] | np.ndarray,
    mode: str = "ar_garch",
    *,
    instrument: str = "",
    max_lag: int = 7,
    max_p: int = 9,
    max_q: int = 9,
) -> FilterModel:
    """Select and fit the BIC-best mean/variance filter for one series.

    ``ar_garch`` scans AR lags 0..max_lag jointly with GARCH orders
    1..max_p x 1..max_q; ``garch_only`` pins the lag to zero. The series is
    multiplied by 1,000 internally before optimization; reported parameters
    are mapped back to the input scale and the standardized residuals are
    divided by 1,000. BIC is k*ln(n) - 2*lnL with n the residual count of
    the cell; exact ties go to the lexicographically smallest (lag, p, q).
    """
    if mode not in MODES:
        raise InputError(f"unknown filter mode {mode!r}")
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise InputError("series must be one-dimensional")
    if not np.isfinite(x).all():
        raise InputError("series contains non-finite values")
    if x.size < MIN_OBS:
        raise InputError(
            f"series has {x.size} observations; at least {MIN_OBS} required"
        )
    if max_lag < 0 or max_p < 1 or max_q < 1:
        raise InputError("grid bounds out of range")

    y = x * INTERNAL_SCALE
    lags = range(0, max_lag + 1) if mode == "ar_garch" else range(0, 1)

    best_key: tuple[float, int, int, int] | None = None
    best_fit: tuple[_CellProblem, float, np.ndarray] | None = None
    for lag in lags:
        for p in range(1, max_p + 1):
            for q in range(1, max_q + 1):
                problem = _CellProblem(y, lag, p, q)
                fit = _fit_cell(problem)
                if fit is None:
                    log.warning(
                        "grid cell (lag=%d, p=%d, q=%d) did not converge; skipped",
                        lag, p, q,
                    )
                    continue
                nll, xv = fit
                k = (lag + 1) + 1 + p + q
                bic = k * math.log(problem.n) + 2.0 * nll
                key = (bic, lag, p, q)
                if best_key is None or key < best_key:
                    best_key = key
                    best_fit = (problem, nll, xv)
    if best_fit is None:
        raise FitError(
            f"no grid cell produced a finite likelihood for {instrument or 'series'}"
        )

    problem, nll, xv = best_fit
    nll, xv = _polish(problem, xv, nll)
    lag, p, q = problem.lag, problem.p, problem.q
    k = (lag + 1) + 1 + p + q
    bic = k * math.log(problem.n) + 2.0 * nll

    c, phi, omega, alphas, betas = problem.decode(xv)
    eps = problem.y_eff - c - problem.lagmat @ phi
    s2 = problem.sigma2(eps * eps, omega, alphas, betas)
    z = eps / np.sqrt(s2)

    return FilterModel(
        instrument=instrument,
        mode=mode,
        ar_order=lag,
        garch_p=p,
        garch_q=q,
        mean_params=(
            float(c / INTERNAL_SCALE),
            *[float(v) for v in phi],
        ),
        variance_params=(
            float(omega / INTERNAL_SCALE**2),
            *[float(a) for a in alphas],
            *[float(b) for b in betas],
        ),
        bic=float(bic),
        residuals=z / INTERNAL_SCALE,
    )


def ljung_box(series: Sequence[float] | np.ndarray, lags: int = 20) -> float:
    """Portmanteau autocorrelation statistic over the first ``lags`` lags."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if n <= lags:
        raise InputError("series too short for the requested lag count")
    xc = x - x.mean()
    denom = float((xc * xc).sum())
    if denom == 0.0:
        return 0.0
    q = 0.0
    for k in range(1, lags + 1):
        rk = float((xc[k:] * xc[:-k]).sum()) / denom
        q += rk * rk / (n - k)
    return n * (n + 2.0) * q


def filter_panel(
    panel: TimePanel,
    mode: str = "ar_garch",
    *,
    max_lag: int = 7,
    max_p: int = 9,
    max_q: int = 9,
) -> tuple[TimePanel, dict[str, FilterModel]]:
    """Filter every column of a return panel and align on the common suffix.

    Residual series start ``lag`` observations late, so the panel keeps the
    last ``n - max(lag_i)`` rows of every column to stay rectangular.
    """
    if panel.kind != "log_returns":
        raise InputError(f"filtering expects a log-return panel, got {panel.kind!r}")
    models: dict[str, FilterModel] = {}
    for name in panel.names:
        models[name] = fit_filter(
            panel.columns[name],
            mode,
            instrument=name,
            max_lag=max_lag,
            max_p=max_p,
            max_q=max_q,
        )
    worst = max(m.ar_order for m in models.values())
    keep = panel.n_rows - worst
    cols = {name: models[name].residuals[-keep:] for name in panel.names}
    return TimePanel(panel.dates[-keep:], cols, "residuals"), models
