"""Mudag: accelerated decentralized gradient method with multi-consensus.

Two algebraically equivalent forms are provided. The direct form mixes
``y_t + (x_t - y_{t-1}) - eta (grad F(y_t) - grad F(y_{t-1}))`` with K rounds of
FastMix and extrapolates with momentum ``(1 - alpha) / (1 + alpha)``. The
tracking form carries an explicit gradient-tracking block ``s_t`` whose
row average equals ``eta`` times the average local gradient.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .consensus import fastmix
from .errors import ConfigError, DisconnectedGraphError, DivergenceError
from .linalg import perron_pair_3x3
from .trace import TraceRecord, block_record, diverged

ALPHA_CAP = 0.999
K_MODES = ("manual", "theoretical", "auto-tuned")
FORMS = ("direct", "tracking")

# constants of the sufficient condition on the consensus accuracy
_RHO_CONSTANT = 2304.0
_THETA_CONSTANT = 288.0


@dataclass(frozen=True)
class MudagConfig:
    """Step size ``eta``, momentum parameter ``alpha``, K mixing rounds, T steps."""

    eta: float
    alpha: float
    K: int
    T: int
    K_mode: str = "manual"

    def __post_init__(self):
        if not self.eta > 0.0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.K < 0:
            raise ConfigError(f"K must be non-negative, got {self.K}")
        if self.T < 0:
            raise ConfigError(f"T must be non-negative, got {self.T}")
        if self.K_mode not in K_MODES:
            raise ConfigError(f"unknown K_mode {self.K_mode!r}; expected one of {K_MODES}")

    @property
    def momentum(self) -> float:
        return (1.0 - self.alpha) / (1.0 + self.alpha)

    @classmethod
    def from_problem(cls, problem, K: int, T: int, eta=None, alpha=None, K_mode="manual") -> "MudagConfig":
        """Defaults ``eta = 1/L`` and ``alpha = min(sqrt(mu/L), 0.999)``."""
        c = problem.constants
        if eta is None:
            eta = 1.0 / c.L
        if alpha is None:
            alpha = default_alpha(c.L, c.mu)
        return cls(eta=float(eta), alpha=float(alpha), K=int(K), T=int(T), K_mode=K_mode)


def default_alpha(L: float, mu: float) -> float:
    return min(math.sqrt(mu / L), ALPHA_CAP)


@dataclass
class MudagState:
    """Iterate blocks at step ``t``.

    ``grad`` is ``grad F(y_t)`` and ``grad_prev`` is ``grad F(y_{t-1})``;
    ``s`` is only carried by the tracking form.
    """

    x: np.ndarray
    y: np.ndarray
    y_prev: np.ndarray
    grad: np.ndarray
    grad_prev: np.ndarray
    s: np.ndarray | None = None
    t: int = 0
    grad_evals: int = 0
    comm_rounds: int = 0


def _consensus_start(problem, x0) -> np.ndarray:
    x0 = np.asarray(x0, dtype=np.float64)
    xbar = x0.mean(axis=0) if x0.ndim == 2 else x0
    if xbar.shape != (problem.d,):
        raise ConfigError(f"starting point has shape {x0.shape}, expected ({problem.d},) or ({problem.m}, {problem.d})")
    return np.tile(xbar, (problem.m, 1))


def init_state(problem, x0, cfg: MudagConfig, form: str = "direct") -> MudagState:
    """Rows of ``x_0 = y_0 = y_{-1}`` all equal the average of ``x0``; ``grad F(y_{-1}) = 0``."""
    if form not in FORMS:
        raise ConfigError(f"unknown form {form!r}; expected one of {FORMS}")
    x = _consensus_start(problem, x0)
    g = problem.grad_block(x)
    s = cfg.eta * g if form == "tracking" else None
    return MudagState(x=x, y=x.copy(), y_prev=x.copy(), grad=g, grad_prev=np.zeros_like(g), s=s)


def mudag_step_direct(state: MudagState, problem, w, cfg: MudagConfig) -> MudagState:
    z = state.y + (state.x - state.y_prev) - cfg.eta * (state.grad - state.grad_prev)
    x_new = fastmix(z, w, cfg.K)
    y_new = x_new + cfg.momentum * (x_new - state.x)
    return MudagState(
        x=x_new,
        y=y_new,
        y_prev=state.y,
        grad=problem.grad_block(y_new),
        grad_prev=state.grad,
        t=state.t + 1,
        grad_evals=state.grad_evals + 1,
        comm_rounds=state.comm_rounds + cfg.K,
    )


def mudag_step_tracking(state: MudagState, problem, w, cfg: MudagConfig) -> MudagState:
    """One step of the ``(x, y, s)`` form.

    ``T(y_t)`` is recovered as ``T(y_t - s_t) + T(s_t)`` since FastMix is
    linear, so a step costs two FastMix calls (2K rounds).
    """
    if state.s is None:
        raise ConfigError("tracking step needs a state initialized with form='tracking'")
    x_new = fastmix(state.y - state.s, w, cfg.K)
    mixed_s = fastmix(state.s, w, cfg.K)
    mixed_y = x_new + mixed_s
    y_new = x_new + cfg.momentum * (x_new - state.x)
    g_new = problem.grad_block(y_new)
    s_new = mixed_s + cfg.eta * (g_new - state.grad) - (mixed_y - state.y)
    return MudagState(
        x=x_new,
        y=y_new,
        y_prev=state.y,
        grad=g_new,
        grad_prev=state.grad,
        s=s_new,
        t=state.t + 1,
        grad_evals=state.grad_evals + 1,
        comm_rounds=state.comm_rounds + 2 * cfg.K,
    )


# -- Lyapunov potential -------------------------------------------------------

def momentum_point(xbar, xbar_prev, alpha: float) -> np.ndarray:
    """``v_t = x_{t-1} + (x_t - x_{t-1}) / alpha``."""
    return xbar_prev + (xbar - xbar_prev) / alpha


def lyapunov(problem, xbar, xbar_prev, alpha: float, reference) -> float:
    """``f(x_t) - f* + (mu/2) ||v_t - x*||^2``."""
    v = momentum_point(xbar, xbar_prev, alpha)
    gap = problem.value(xbar) - reference.f_star
    return float(gap + 0.5 * problem.constants.mu * np.sum((v - reference.x_star) ** 2))


# -- runner -------------------------------------------------------------------

@dataclass
class MudagResult:
    x_bar: np.ndarray
    state: MudagState
    trace: list[TraceRecord] = field(default_factory=list)
    config: MudagConfig | None = None


def run_mudag(problem, w, cfg: MudagConfig, x0, reference=None, form="direct", on_step=None, stop_at=None) -> MudagResult:
    """Run ``cfg.T`` Mudag steps and record one trace row per step.

    ``on_step(prev_state, new_state)`` is called after each step.
    ``stop_at`` ends the run early once the optimality gap reaches it.
    Raises :class:`DivergenceError` (carrying the partial trace) on
    non-finite iterates or a gap beyond ``1e6`` times the initial one.
    """
    if cfg.alpha > 0.5:
        warnings.warn(f"alpha = {cfg.alpha:.3g} exceeds 1/2, outside the analysed regime", RuntimeWarning, stacklevel=2)
    step = mudag_step_direct if form == "direct" else mudag_step_tracking
    state = init_state(problem, x0, cfg, form)
    xbar_prev = state.x.mean(axis=0)

    def record(st, xbar_prev):
        V = None
        if reference is not None:
            V = lyapunov(problem, st.x.mean(axis=0), xbar_prev, cfg.alpha, reference)
        return block_record(problem, st.x, st.t, reference, st.grad_evals, st.comm_rounds, V)

    trace = [record(state, xbar_prev)]
    gap0 = trace[0].f_gap if math.isfinite(trace[0].f_gap) else 0.0
    for _ in range(cfg.T):
        if stop_at is not None and trace[-1].f_gap <= stop_at:
            break
        new = step(state, problem, w, cfg)
        if on_step is not None:
            on_step(state, new)
        xbar_prev = state.x.mean(axis=0)
        state = new
        trace.append(record(state, xbar_prev))
        if not np.isfinite(state.x).all() or diverged(trace[-1], gap0):
            raise DivergenceError(f"mudag diverged at t={state.t}", t=state.t, trace=trace, method="mudag")
    return MudagResult(x_bar=state.x.mean(axis=0), state=state, trace=trace, config=cfg)


# -- consensus-accuracy requirements -----------------------------------------

def rho_perron_bound(M: float, eta: float) -> float:
    """``1 / (2 (21 M eta + 6 (M eta)^2 + 1)(3 + 2 M eta))``."""
    me = M * eta
    return 1.0 / (2.0 * (21.0 * me + 6.0 * me * me + 1.0) * (3.0 + 2.0 * me))


def rate_rho(mu: float, L: float, M: float, alpha: float, theta: float) -> float:
    """Largest ``rho`` with ``sqrt(rho) <= mu alpha / (2304 L) min(2L/(M theta), L^2/(M theta)^2)``."""
    r = M * theta
    sqrt_rho = mu * alpha / (_RHO_CONSTANT * L) * min(2.0 * L / r, (L / r) ** 2)
    return sqrt_rho * sqrt_rho


def smallest_K(rho: float, gap: float) -> int:
    """Smallest ``K >= 1`` with ``(1 - sqrt(gap))**K <= rho``."""
    if not 0.0 < gap <= 1.0:
        raise DisconnectedGraphError(f"spectral gap {gap} is not in (0, 1]")
    base = 1.0 - math.sqrt(gap)
    if base <= 0.0 or rho >= 1.0:
        return 1
    K = max(1, math.ceil(math.log(rho) / math.log(base)))
    while K > 1 and base ** (K - 1) <= rho:
        K -= 1
    while base**K > rho:
        K += 1
    return K


def initial_theta(problem, x0, reference, alpha: float) -> float:
    """``1 + mu/(288 m) ||grad f(x0) - grad f(x*)||^2 / (f(x0) - f* + (mu/2)||x0/alpha - x*||^2)``."""
    c = problem.constants
    x0 = np.asarray(x0, dtype=np.float64)
    xbar = x0.mean(axis=0) if x0.ndim == 2 else x0
    num = float(np.sum((problem.grad(xbar) - problem.grad(reference.x_star)) ** 2))
    if num == 0.0:
        return 1.0
    den = problem.value(xbar) - reference.f_star + 0.5 * c.mu * float(np.sum((xbar / alpha - reference.x_star) ** 2))
    return 1.0 + c.mu / (_THETA_CONSTANT * problem.m) * num / den


@dataclass(frozen=True)
class KSelection:
    """Mixing rounds sufficient for the linear rate, with their inputs.

    ``K`` is the smallest count whose contraction reaches ``rho``;
    ``K_closed_form`` is ``ceil(sqrt(kappa_g / gap) log(1/rho))``.
    ``certified`` is False when ``theta`` is the optimistic value 1 used
    without a reference solution.
    """

    K: int
    rho: float
    theta: float
    certified: bool
    K_closed_form: int


def theoretical_K(problem, w, x0=None, reference=None, eta=None, alpha=None) -> KSelection:
    c = problem.constants
    if not w.gap > 0.0:
        raise DisconnectedGraphError("mixing matrix has no spectral gap")
    eta = 1.0 / c.L if eta is None else eta
    alpha = default_alpha(c.L, c.mu) if alpha is None else alpha
    if reference is not None and x0 is not None:
        theta, certified = initial_theta(problem, x0, reference, alpha), True
    else:
        theta, certified = 1.0, False
    rho = min(rate_rho(c.mu, c.L, c.M, alpha, theta), rho_perron_bound(c.M, eta))
    closed = math.ceil(math.sqrt(c.kappa_g / w.gap) * math.log(1.0 / rho))
    return KSelection(K=smallest_K(rho, w.gap), rho=rho, theta=theta, certified=certified, K_closed_form=closed)


# -- Perron diagnostic of the error recursion --------------------------------

@dataclass(frozen=True, eq=False)
class PerronDiagnostic:
    """Nonnegative 3x3 matrix driving the coupled error recursion.

    ``vector`` is the Perron vector scaled so its last entry is 1.
    """

    rho: float
    M_eta: float
    matrix: np.ndarray
    lambda1: float
    vector: np.ndarray


def perron_matrix(rho: float, M_eta: float) -> np.ndarray:
    me = M_eta
    return np.array(
        [
            [2.0 * rho, rho, 2.0 * rho * me],
            [1.0, 0.0, me],
            [7.0 + 2.0 * me, rho, rho * (1.0 + 2.0 * rho * me)],
        ]
    )


def perron_diagnostic(rho: float, M: float, eta: float) -> PerronDiagnostic:
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    a = perron_matrix(rho, M * eta)
    lam, vec = perron_pair_3x3(a)
    return PerronDiagnostic(rho=rho, M_eta=M * eta, matrix=a, lambda1=lam, vector=vec)


def check_perron_bounds(diag: PerronDiagnostic, tol: float = 0.0) -> dict:
    """Evaluate the eigenvalue and eigenvector bounds needed for the rate.

    Returns each quantity with a boolean verdict; ``all`` combines them.
    """
    me, rho = diag.M_eta, diag.rho
    sr = math.sqrt(rho)
    v1, v2 = float(diag.vector[0]), float(diag.vector[1])
    v1_bound = 1.0 / (2.0 * (7.0 + 2.0 * me))
    v2_bound = 1.0 / (2.0 * sr * (7.0 + 2.0 * me)) + me / sr
    report = {
        "rho": rho,
        "rho_bound": rho_perron_bound(me, 1.0),
        "lambda1": diag.lambda1,
        "lambda1_le_half": diag.lambda1 <= 0.5 + tol,
        "sqrt_rho_lt_lambda1": sr < diag.lambda1 + tol,
        "v1": v1,
        "v1_bound": v1_bound,
        "v1_ok": v1 <= v1_bound + tol,
        "v2": v2,
        "v2_bound": v2_bound,
        "v2_ok": v2 <= v2_bound + tol,
    }
    report["all"] = all(report[k] for k in ("lambda1_le_half", "sqrt_rho_lt_lambda1", "v1_ok", "v2_ok"))
    return report


def with_K(cfg: MudagConfig, K: int, K_mode: str | None = None) -> MudagConfig:
    return replace(cfg, K=int(K), K_mode=K_mode or cfg.K_mode)
