"""ARIMA(p, d, q) fitting by conditional least squares, and order grid search.

The series is differenced ``d`` times; on the differenced scale

    w_t = c + phi_1 w_{t-1} + ... + phi_p w_{t-p}
            + eps_t + theta_1 eps_{t-1} + ... + theta_q eps_{t-q}

and the conditional sum of squared innovations (pre-sample innovations fixed
at zero) is minimized: a Hannan-Rissanen start (long-AR residual proxy, then
least squares) refined by damped Gauss-Newton iterations.  Forecasts set
future innovations to zero and integrate back to the raw scale.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .forecasting import collect_forecasts
from .metrics import kmape
from .series import SeriesTooShort, split_train_val_test, window_array

MAX_ORDER = 5
GRID_VALUES = (1, 2, 3)
_GN_MAX_ITER = 200
_GN_RTOL = 1e-8
# Unconstrained CSS on short windows can push coefficients far outside the
# stable region and wreck forecasts; every iterate is projected into this box.
_COEF_BOUND = 0.99


class InsufficientTail(ValueError):
    """Too few trailing raw values to undo the differencing."""


class NoViableOrders(RuntimeError):
    """Every order combination in the grid failed to fit or score."""


class NonConvergenceWarning(RuntimeWarning):
    """Gauss-Newton hit the iteration cap; the best iterate is kept."""


@dataclass(frozen=True)
class ArimaOrders:
    """Lag order p, differencing degree d, moving-average order q."""

    p: int
    d: int
    q: int

    def __post_init__(self):
        for name, value in (("p", self.p), ("d", self.d), ("q", self.q)):
            if not 0 <= value <= MAX_ORDER:
                raise ValueError(f"{name} must be in [0, {MAX_ORDER}], got {value}")


@dataclass(frozen=True, eq=False)
class ArimaModel:
    """A fitted model: coefficients plus the history needed to forecast.

    ``residuals`` aligns with the differenced history; its first p entries
    are the pre-sample zeros.  ``converged`` is False when the fit stopped
    at the iteration cap.
    """

    orders: ArimaOrders
    ar_coeffs: np.ndarray
    ma_coeffs: np.ndarray
    intercept: float
    residuals: np.ndarray
    history: np.ndarray
    converged: bool = True


def difference(values, d: int) -> np.ndarray:
    """Apply first differences ``d`` times; output shrinks by d."""
    values = np.asarray(values, dtype=float)
    if d < 0:
        raise ValueError("d must be non-negative")
    if values.size <= d:
        raise SeriesTooShort(f"need more than {d} points to difference, got {values.size}")
    return np.diff(values, n=d) if d > 0 else values.copy()


def integrate(diff_forecasts, tail, d: int) -> np.ndarray:
    """Invert ``d`` levels of differencing for a forecast continuation.

    ``tail`` must hold at least the last ``d`` raw values; the last value of
    every intermediate difference level is recovered from it.
    """
    diff_forecasts = np.asarray(diff_forecasts, dtype=float)
    if d == 0:
        return diff_forecasts.copy()
    tail = np.asarray(tail, dtype=float)
    if tail.size < d:
        raise InsufficientTail(f"need the last {d} raw values, got {tail.size}")
    level = tail[-d:]
    lasts = []
    for _ in range(d):
        lasts.append(level[-1])
        level = np.diff(level)
    out = np.empty_like(diff_forecasts)
    for idx, w in enumerate(diff_forecasts):
        value = w
        for lvl in reversed(range(d)):
            value = lasts[lvl] + value
            lasts[lvl] = value
        out[idx] = value
    return out


def _css_residuals(w: np.ndarray, c: float, phi: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Innovations of the differenced series, zeros before index p."""
    p, q = phi.size, theta.size
    eps = np.zeros(w.size)
    for t in range(p, w.size):
        acc = w[t] - c
        for i in range(p):
            acc -= phi[i] * w[t - 1 - i]
        for j in range(q):
            k = t - 1 - j
            if k >= 0:
                acc -= theta[j] * eps[k]
        eps[t] = acc
    return eps


def _css_objective(w, params, p, q) -> float:
    eps = _css_residuals(w, params[0], params[1 : 1 + p], params[1 + p :])
    return float(np.sum(eps[p:] ** 2))


def _css_jacobian(w, eps, phi, theta) -> np.ndarray:
    """d eps_t / d (c, phi, theta), with the same zero pre-sample convention."""
    p, q = phi.size, theta.size
    jac = np.zeros((w.size, 1 + p + q))
    for t in range(p, w.size):
        row = jac[t]
        row[0] = -1.0
        for i in range(p):
            row[1 + i] = -w[t - 1 - i]
        for j in range(q):
            k = t - 1 - j
            if k >= 0:
                row[1 + p + j] = -eps[k]
        for j in range(q):
            k = t - 1 - j
            if k >= 0:
                row -= theta[j] * jac[k]
    return jac


def _project_coefficients(params: np.ndarray) -> np.ndarray:
    """Clamp phi and theta (not the intercept) into the stable box."""
    out = params.copy()
    np.clip(out[1:], -_COEF_BOUND, _COEF_BOUND, out=out[1:])
    return out


def _hannan_rissanen_start(w: np.ndarray, p: int, q: int) -> np.ndarray:
    """Initial (c, phi, theta) from a long-AR residual proxy and least squares."""
    m = w.size
    params = np.zeros(1 + p + q)
    params[0] = float(np.mean(w))
    if q == 0 and p == 0:
        return params

    # Long-AR order: generous but capped so regressions stay overdetermined.
    h = max(p, q) + 2
    h = min(h, m - (2 + p + q))
    if h < max(p, 1):
        return params

    cols = [np.ones(m - h)]
    for lag in range(1, h + 1):
        cols.append(w[h - lag : m - lag])
    x_long = np.column_stack(cols)
    y_long = w[h:]
    beta, *_ = np.linalg.lstsq(x_long, y_long, rcond=None)
    eps_hat = np.zeros(m)
    eps_hat[h:] = y_long - x_long @ beta

    t0 = h + q if m - (h + q) >= 2 + p + q else h
    rows = range(t0, m)
    cols = [np.ones(len(rows))]
    for lag in range(1, p + 1):
        cols.append(np.array([w[t - lag] for t in rows]))
    for lag in range(1, q + 1):
        cols.append(np.array([eps_hat[t - lag] for t in rows]))
    x_ls = np.column_stack(cols)
    y_ls = np.array([w[t] for t in rows])
    fitted, *_ = np.linalg.lstsq(x_ls, y_ls, rcond=None)
    params[: fitted.size] = fitted
    return params


def fit_arima(values, orders: ArimaOrders) -> ArimaModel:
    """Difference to degree d and estimate (c, phi, theta) by conditional least squares."""
    values = np.asarray(values, dtype=float)
    p, d, q = orders.p, orders.d, orders.q
    if values.size < d + max(p, q) + 3:
        raise SeriesTooShort(
            f"need at least {d + max(p, q) + 3} points for orders {orders}, got {values.size}"
        )
    w = difference(values, d)
    m = w.size

    # Zero-variance differenced series: least squares is singular, so the
    # model degenerates to its intercept (the constant difference).
    if float(np.var(w)) <= 1e-18 * max(1.0, float(np.mean(np.abs(w))) ** 2):
        return ArimaModel(
            orders=orders,
            ar_coeffs=np.zeros(p),
            ma_coeffs=np.zeros(q),
            intercept=float(np.mean(w)),
            residuals=np.zeros(m),
            history=values.copy(),
        )

    params = _project_coefficients(_hannan_rissanen_start(w, p, q))
    objective = _css_objective(w, params, p, q)
    if not np.isfinite(objective):
        params = np.zeros(1 + p + q)
        objective = _css_objective(w, params, p, q)

    converged = False
    for _ in range(_GN_MAX_ITER):
        eps = _css_residuals(w, params[0], params[1 : 1 + p], params[1 + p :])
        jac = _css_jacobian(w, eps, params[1 : 1 + p], params[1 + p :])
        delta, *_ = np.linalg.lstsq(jac[p:], -eps[p:], rcond=None)
        step = 1.0
        improved = False
        while step > 1e-12:
            candidate = _project_coefficients(params + step * delta)
            value = _css_objective(w, candidate, p, q)
            if np.isfinite(value) and value < objective:
                improved = True
                break
            step *= 0.5
        if not improved:
            converged = True
            break
        params, previous, objective = candidate, objective, value
        if previous - objective <= _GN_RTOL * max(objective, 1e-30):
            converged = True
            break
    if not converged:
        warnings.warn(
            f"conditional least squares hit {_GN_MAX_ITER} iterations for {orders}",
            NonConvergenceWarning,
            stacklevel=2,
        )

    residuals = _css_residuals(w, params[0], params[1 : 1 + p], params[1 + p :])
    return ArimaModel(
        orders=orders,
        ar_coeffs=params[1 : 1 + p].copy(),
        ma_coeffs=params[1 + p :].copy(),
        intercept=float(params[0]),
        residuals=residuals,
        history=values.copy(),
        converged=converged,
    )


def forecast_one(model: ArimaModel) -> float:
    """Next raw-scale value: one step on the differenced scale, integrated back.

    The future innovation is zero, so repeated calls are deterministic.
    """
    p, d, q = model.orders.p, model.orders.d, model.orders.q
    w = difference(model.history, d)
    w_next = model.intercept
    for i in range(p):
        w_next += model.ar_coeffs[i] * w[w.size - 1 - i]
    for j in range(q):
        k = model.residuals.size - 1 - j
        if k >= 0:
            w_next += model.ma_coeffs[j] * model.residuals[k]
    if d == 0:
        return float(w_next)
    return float(integrate([w_next], model.history[-d:], d)[0])


def extend_with_forecast(model: ArimaModel) -> tuple[ArimaModel, float]:
    """Append the one-step forecast to the history with innovation zero.

    Coefficients stay frozen, so chaining this implements the recursive
    multi-day forecast without re-estimation.
    """
    prediction = forecast_one(model)
    extended = replace(
        model,
        history=np.append(model.history, prediction),
        residuals=np.append(model.residuals, 0.0),
    )
    return extended, prediction


def forecast_steps(model: ArimaModel, n_steps: int) -> np.ndarray:
    """``n_steps`` recursive forecasts with frozen coefficients."""
    predictions = np.empty(n_steps)
    for i in range(n_steps):
        model, predictions[i] = extend_with_forecast(model)
    return predictions


class ArimaForecaster:
    """Window forecaster: fit per window, reuse frozen coefficients on continuations.

    When the incoming window is the previous window shifted by one with the
    previous prediction appended (the recursive scheme), the fitted model is
    extended instead of refit, so a k-day forecast estimates once and then
    iterates the difference equation.
    """

    def __init__(self, orders: ArimaOrders, n_s: int = 15):
        self.orders = orders
        self.n_s = n_s
        self._continuation_window: np.ndarray | None = None
        self._continuation_model: ArimaModel | None = None

    def predict_next(self, window) -> float:
        window = np.asarray(window, dtype=float)
        if window.size != self.n_s:
            raise ValueError(f"expected window of length {self.n_s}, got {window.size}")
        if self._continuation_window is not None and np.array_equal(
            window, self._continuation_window
        ):
            model = self._continuation_model
        else:
            model = fit_arima(window, self.orders)
        model, prediction = extend_with_forecast(model)
        self._continuation_model = model
        self._continuation_window = np.append(window[1:], prediction)
        return prediction


def validation_kmape_scorer(values, n_s: int = 15):
    """Scorer for grid search: 1-step kMAPE on the chronological validation windows."""
    samples = window_array(np.asarray(values, dtype=float), n_s, 1)
    split = split_train_val_test(samples)

    def score(orders: ArimaOrders) -> float:
        forecaster = ArimaForecaster(orders, n_s=n_s)
        return kmape(collect_forecasts(forecaster, split.validation, 1))

    return score


def grid_search_orders(values, score=None, n_s: int = 15) -> ArimaOrders:
    """Best (p, d, q) over {1, 2, 3}^3 by validation score (lower is better).

    Ties break toward smaller p + d + q, then lexicographically; order
    combinations that fail to fit or score are skipped.
    """
    if score is None:
        score = validation_kmape_scorer(values, n_s=n_s)
    best_key = None
    best_orders = None
    for p, d, q in itertools.product(GRID_VALUES, repeat=3):
        orders = ArimaOrders(p, d, q)
        try:
            value = score(orders)
        except Exception:
            continue
        if not np.isfinite(value):
            continue
        key = (value, p + d + q, (p, d, q))
        if best_key is None or key < best_key:
            best_key, best_orders = key, orders
    if best_orders is None:
        raise NoViableOrders("every (p, d, q) combination failed")
    return best_orders
