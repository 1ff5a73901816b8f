"""Reference optimizers: centralized Nesterov AGD, DGD, EXTRA and NIDS.

Decentralized baselines mix once per iteration (DGD optionally ``K_mix``
times). Every runner returns a :class:`BaselineResult` whose trace uses the
same schema as the Mudag runner; on divergence a :class:`DivergenceError`
carrying the partial trace is raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .consensus import plain_mix
from .errors import ConfigError, DivergenceError
from .trace import TraceRecord, block_record, diverged, first_reaching

METHODS = ("agd", "dgd", "extra", "nids")


@dataclass(frozen=True)
class BaselineConfig:
    method: str
    T: int
    step_size: float | None = None
    momentum: float | None = None
    K_mix: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown baseline {self.method!r}; expected one of {METHODS}")
        if self.T < 0:
            raise ConfigError("T must be non-negative")
        if self.step_size is not None and not self.step_size >= 0.0:
            raise ConfigError("step size must be non-negative")
        if self.momentum is not None and not 0.0 <= self.momentum < 1.0:
            raise ConfigError("momentum must lie in [0, 1)")
        if self.K_mix < 0:
            raise ConfigError("K_mix must be non-negative")


@dataclass
class BaselineResult:
    method: str
    x: np.ndarray
    trace: list[TraceRecord] = field(default_factory=list)
    step_size: float = math.nan

    @property
    def x_bar(self) -> np.ndarray:
        return self.x.mean(axis=0) if self.x.ndim == 2 else self.x


def agd_momentum(L: float, mu: float) -> float:
    """``(sqrt(L) - sqrt(mu)) / (sqrt(L) + sqrt(mu))``."""
    sl, sm = math.sqrt(L), math.sqrt(mu)
    return (sl - sm) / (sl + sm)


def nesterov_minimize(grad, x0, L, mu, tol, max_iter):
    """Constant-momentum Nesterov AGD until ``||grad(x)|| <= tol``.

    Returns ``(x, iterations)``; the caller decides whether the tolerance
    was met.
    """
    eta = 1.0 / L
    beta = agd_momentum(L, mu)
    x = np.array(x0, dtype=np.float64)
    y = x.copy()
    for it in range(max_iter):
        # the stopping test costs a gradient, so only check every few steps
        if it % 8 == 0 and np.linalg.norm(grad(x)) <= tol:
            return x, it
        x_new = y - eta * grad(y)
        y = x_new + beta * (x_new - x)
        x = x_new
    return x, max_iter


def _initial_block(problem, x0):
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.ndim == 1:
        return np.tile(x0, (problem.m, 1))
    return x0.copy()


def _initial_gap(first: TraceRecord) -> float:
    return first.f_gap if math.isfinite(first.f_gap) else 0.0


def _check(rec, gap0, trace, method):
    trace.append(rec)
    if diverged(rec, gap0):
        raise DivergenceError(f"{method} diverged at t={rec.t}", t=rec.t, trace=trace, method=method)


def run_agd(problem, cfg: BaselineConfig, x0, reference=None, stop_at=None) -> BaselineResult:
    """Centralized Nesterov AGD on ``f``.

    ``x_{t+1} = y_t - eta grad f(y_t)``, ``y_{t+1} = x_{t+1} + beta (x_{t+1} - x_t)``.
    Records ``m * ||x_t - x*||^2`` as the distance (every agent holding
    ``x_t``) and the estimate-sequence potential as ``V_t``. One gradient
    evaluation and one communication round are counted per iteration.
    """
    c = problem.constants
    eta = cfg.step_size if cfg.step_size is not None else 1.0 / c.L
    beta = cfg.momentum if cfg.momentum is not None else agd_momentum(c.L, c.mu)
    alpha = (1.0 - beta) / (1.0 + beta)
    x = np.asarray(x0, dtype=np.float64)
    if x.ndim == 2:
        x = x.mean(axis=0)
    x = x.copy()
    y = x.copy()
    x_prev = x.copy()
    trace: list[TraceRecord] = []

    def record(t):
        if reference is None:
            return TraceRecord(t, math.nan, 0.0, math.nan, None, t, t)
        v = x_prev + (x - x_prev) / alpha
        f_gap = problem.value(x) - reference.f_star
        V = f_gap + 0.5 * c.mu * float(np.sum((v - reference.x_star) ** 2))
        dist = problem.m * float(np.sum((x - reference.x_star) ** 2))
        return TraceRecord(t, f_gap, 0.0, dist, V, t, t)

    first = record(0)
    gap0 = _initial_gap(first)
    _check(first, gap0, trace, "agd")
    for t in range(cfg.T):
        if stop_at is not None and trace[-1].f_gap <= stop_at:
            break
        x_new = y - eta * problem.grad(y)
        y = x_new + beta * (x_new - x)
        x_prev, x = x, x_new
        _check(record(t + 1), gap0, trace, "agd")
    return BaselineResult("agd", x, trace, eta)


def run_dgd(problem, w, cfg: BaselineConfig, x0, reference=None, stop_at=None) -> BaselineResult:
    """Decentralized gradient descent ``x_{t+1} = W^K x_t - eta grad F(x_t)``."""
    eta = cfg.step_size if cfg.step_size is not None else 1.0 / problem.constants.M
    x = _initial_block(problem, x0)
    trace: list[TraceRecord] = []
    first = block_record(problem, x, 0, reference, 0, 0)
    gap0 = _initial_gap(first)
    _check(first, gap0, trace, "dgd")
    for t in range(cfg.T):
        if stop_at is not None and trace[-1].f_gap <= stop_at:
            break
        x = plain_mix(x, w, cfg.K_mix) - eta * problem.grad_block(x)
        _check(block_record(problem, x, t + 1, reference, t + 1, (t + 1) * cfg.K_mix), gap0, trace, "dgd")
    return BaselineResult("dgd", x, trace, eta)


def extra_step(x_prev, x, wx_prev, wx, g_prev, g, eta):
    """``(I + W) x_{t+1} - (I + W)/2 x_t - eta (grad F(x_{t+1}) - grad F(x_t))``."""
    return x + wx - 0.5 * (x_prev + wx_prev) - eta * (g - g_prev)


def nids_step(x_prev, x, g_prev, g, eta, w):
    """``(I + W)/2 (2 x_{t+1} - x_t - eta (grad F(x_{t+1}) - grad F(x_t)))``."""
    z = 2.0 * x - x_prev - eta * (g - g_prev)
    wz = plain_mix(z, w, 1)
    return 0.5 * (z + wz)


def _run_two_step(method, problem, w, cfg, x0, reference, stop_at):
    eta = cfg.step_size if cfg.step_size is not None else 1.0 / problem.constants.M
    x_prev = _initial_block(problem, x0)
    trace: list[TraceRecord] = []
    first = block_record(problem, x_prev, 0, reference, 0, 0)
    gap0 = _initial_gap(first)
    _check(first, gap0, trace, method)
    if cfg.T == 0:
        return BaselineResult(method, x_prev, trace, eta)

    g_prev = problem.grad_block(x_prev)
    wx_prev = plain_mix(x_prev, w, 1)
    x = wx_prev - eta * g_prev
    grads, comms = 1, 1
    _check(block_record(problem, x, 1, reference, grads, comms), gap0, trace, method)
    for t in range(1, cfg.T):
        if stop_at is not None and trace[-1].f_gap <= stop_at:
            break
        g = problem.grad_block(x)
        if method == "extra":
            wx = plain_mix(x, w, 1)
            x_next = extra_step(x_prev, x, wx_prev, wx, g_prev, g, eta)
            wx_prev = wx
        else:
            x_next = nids_step(x_prev, x, g_prev, g, eta, w)
        grads += 1
        comms += 1
        x_prev, x, g_prev = x, x_next, g
        _check(block_record(problem, x, t + 1, reference, grads, comms), gap0, trace, method)
    return BaselineResult(method, x, trace, eta)


def run_extra(problem, w, cfg: BaselineConfig, x0, reference=None, stop_at=None) -> BaselineResult:
    """EXTRA with ``W~ = (I + W)/2`` and first step ``x_1 = W x_0 - eta grad F(x_0)``."""
    return _run_two_step("extra", problem, w, cfg, x0, reference, stop_at)


def run_nids(problem, w, cfg: BaselineConfig, x0, reference=None, stop_at=None) -> BaselineResult:
    """NIDS with ``W~ = (I + W)/2`` and first step ``x_1 = W x_0 - eta grad F(x_0)``."""
    return _run_two_step("nids", problem, w, cfg, x0, reference, stop_at)


def run_baseline(problem, w, cfg: BaselineConfig, x0, reference=None, stop_at=None) -> BaselineResult:
    if cfg.method == "agd":
        return run_agd(problem, cfg, x0, reference, stop_at)
    runner = {"dgd": run_dgd, "extra": run_extra, "nids": run_nids}[cfg.method]
    return runner(problem, w, cfg, x0, reference, stop_at)


@dataclass
class TuningResult:
    step_size: float
    result: BaselineResult | None
    table: list[dict]


def step_size_grid(M: float, k_max: int = 12) -> list[float]:
    """``2**-k / M`` for ``k = 0..k_max``."""
    return [2.0 ** (-k) / M for k in range(k_max + 1)]


def tune_step_size(problem, w, cfg: BaselineConfig, x0, reference, eps: float = 1e-8, grid=None) -> TuningResult:
    """Pick the step size on ``grid`` whose run is fastest without diverging.

    Runs that reach an optimality gap of ``eps`` times the initial gap are
    ranked by the iteration at which they do; otherwise by final gap.
    """
    grid = grid if grid is not None else step_size_grid(problem.constants.M)
    table, best, best_key = [], None, None
    for eta in grid:
        trial = BaselineConfig(cfg.method, cfg.T, eta, cfg.momentum, cfg.K_mix)
        try:
            res = run_baseline(problem, w, trial, x0, reference)
        except DivergenceError as exc:
            table.append({"step_size": eta, "status": "diverged", "t": exc.t})
            continue
        gap0 = res.trace[0].f_gap
        hit = first_reaching(res.trace, eps * gap0)
        key = (0, hit.t, 0.0) if hit is not None else (1, 0, res.trace[-1].f_gap)
        table.append({"step_size": eta, "status": "ok", "reached_at": hit.t if hit else None, "final_gap": res.trace[-1].f_gap})
        if best_key is None or key < best_key:
            best, best_key = res, key
    if best is None:
        return TuningResult(math.nan, None, table)
    return TuningResult(best.step_size, best, table)
