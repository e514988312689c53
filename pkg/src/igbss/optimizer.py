"""e-projection of an empirical distribution onto the log-linear family.

Two solvers share one loop: plain gradient descent on ``theta`` and block
natural gradient, which preconditions the source and mixing blocks with
their own Fisher information and updates them in that order.
"""
from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .loglinear import (EmpiricalDistribution, LogLinearState, compute_p, fisher_block,
                        kl_divergence, kl_gradient)
from .poset import Layer, SampleSpace

log = logging.getLogger(__name__)


class Method(str, enum.Enum):
    GD = "gd"
    NG = "ng"


class OptimizationError(RuntimeError):
    """Raised when the parameters leave the finite reals."""


@dataclass
class FitConfig:
    method: Method | str = Method.NG
    lr: float = 1.0
    tol: float = 1e-8
    max_iter: int | None = None
    damping: float = 1e-9
    init: str = "zeros"
    init_sigma: float = 0.1
    seed: int | None = None
    # halvings allowed when a natural-gradient block step raises the KL divergence
    max_backtrack: int = 40

    def __post_init__(self):
        self.method = Method(self.method)
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.damping < 0:
            raise ValueError("damping must be nonnegative")
        if self.init not in ("zeros", "random"):
            raise ValueError("init must be 'zeros' or 'random', got %r" % self.init)
        if self.max_iter is None:
            self.max_iter = 100_000 if self.method is Method.GD else 1_000
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")

    def initial_theta(self, space: SampleSpace) -> np.ndarray:
        if self.init == "zeros":
            return np.zeros(space.n_params)
        rng = np.random.default_rng(self.seed)
        return rng.normal(0.0, self.init_sigma, space.n_params)


@dataclass
class FitReport:
    iterations: int
    final_kl: float
    final_grad_inf_norm: float
    converged: bool
    kl_trace: list[float]
    fallback_steps: int = 0
    backtracks: int = 0
    timings: dict = field(default_factory=dict)

    def to_dict(self, trace: bool = False) -> dict:
        d = {
            "iterations": self.iterations,
            "final_kl": self.final_kl,
            "final_grad_inf_norm": self.final_grad_inf_norm,
            "converged": self.converged,
            "fallback_steps": self.fallback_steps,
            "backtracks": self.backtracks,
            "timings": dict(self.timings),
        }
        if trace:
            d["kl_trace"] = list(self.kl_trace)
        return d


class _Timer:
    def __init__(self):
        self.totals: dict[str, float] = {}

    def add(self, key: str, t0: float) -> float:
        t1 = time.perf_counter()
        self.totals[key] = self.totals.get(key, 0.0) + (t1 - t0)
        return t1


def _check_finite(theta: np.ndarray, it: int) -> None:
    if not np.all(np.isfinite(theta)):
        bad = np.flatnonzero(~np.isfinite(theta))
        raise OptimizationError("non-finite theta at iteration %d (parameters %s)" % (it, bad[:10].tolist()))


def fit_step_gd(state: LogLinearState, emp: EmpiricalDistribution, lr: float = 1.0) -> np.ndarray:
    """One gradient-descent update of ``theta``."""
    return state.theta - lr * kl_gradient(state, emp)


def _block_direction(state: LogLinearState, emp: EmpiricalDistribution, layer: Layer,
                     damping: float, timer: _Timer | None = None
                     ) -> tuple[np.ndarray, np.ndarray, bool]:
    """Damped Newton direction for one layer; falls back to the plain gradient
    (``ok=False``) when the damped Fisher block cannot be factorized."""
    t0 = time.perf_counter()
    block = fisher_block(state, layer)
    if timer is not None:
        t0 = timer.add("fisher", t0)
    grad = kl_gradient(state, emp)[block.params]
    G = block.G + damping * np.eye(len(block.G))
    try:
        step = linalg.solve(G, grad, assume_a="pos", check_finite=False)
        ok = bool(np.all(np.isfinite(step)))
    except (linalg.LinAlgError, ValueError):
        ok = False
    if timer is not None:
        timer.add("solve", t0)
    return block.params, (step if ok else grad), ok


def _guarded_update(state: LogLinearState, emp: EmpiricalDistribution, params: np.ndarray,
                    step: np.ndarray, max_backtrack: int) -> tuple[LogLinearState, int]:
    """Apply ``theta[params] -= t * step`` with the largest t in 1, 1/2, ... that
    does not increase the KL divergence."""
    kl0 = kl_divergence(emp, state)
    slack = 1e-13 * max(1.0, abs(kl0))
    t = 1.0
    for halvings in range(max_backtrack + 1):
        theta = state.theta.copy()
        theta[params] -= t * step
        if np.all(np.isfinite(theta)):
            trial = compute_p(state.space, theta)
            if kl_divergence(emp, trial) <= kl0 + slack:
                return trial, halvings
        t *= 0.5
    return state, max_backtrack


def fit_step_ng(state: LogLinearState, emp: EmpiricalDistribution, damping: float = 1e-9,
                guard: bool = True, max_backtrack: int = 40) -> np.ndarray:
    """One block natural-gradient sweep: source block first, then mixing block.

    With ``guard=False`` each block takes the full damped Newton step.
    """
    for layer in (Layer.SOURCE, Layer.MIXING):
        params, step, _ = _block_direction(state, emp, layer, damping)
        if guard:
            state, _ = _guarded_update(state, emp, params, step, max_backtrack)
        else:
            theta = state.theta.copy()
            theta[params] -= step
            state = compute_p(state.space, theta)
    return state.theta


def fit(space: SampleSpace, emp: EmpiricalDistribution, config: FitConfig | None = None,
        theta0: np.ndarray | None = None) -> tuple[LogLinearState, FitReport]:
    """Minimize KL(p_hat || p) over ``theta``.

    Stops when ``max |eta - eta_hat| <= config.tol`` or after ``config.max_iter``
    parameter updates.  The returned report is marked unconverged in the
    latter case; the state is still the last iterate.
    """
    config = config or FitConfig()
    if emp.space is not space:
        raise ValueError("empirical distribution belongs to a different sample space")
    theta = config.initial_theta(space) if theta0 is None else np.array(theta0, dtype=float)
    timer = _Timer()
    t0 = time.perf_counter()
    state = compute_p(space, theta)
    t0 = timer.add("p_eta", t0)

    kl_trace: list[float] = []
    fallbacks = backtracks = 0
    it = 0
    while True:
        grad = kl_gradient(state, emp)
        gnorm = float(np.max(np.abs(grad))) if grad.size else 0.0
        kl_trace.append(kl_divergence(emp, state))
        t0 = timer.add("p_eta", t0)
        if gnorm <= config.tol or it >= config.max_iter:
            break
        if config.method is Method.GD:
            with np.errstate(over="ignore", invalid="ignore"):
                theta = state.theta - config.lr * grad
            _check_finite(theta, it)
            state = compute_p(space, theta)
            t0 = timer.add("p_eta", t0)
        else:
            for layer in (Layer.SOURCE, Layer.MIXING):
                params, step, ok = _block_direction(state, emp, layer, config.damping, timer)
                if not ok:
                    fallbacks += 1
                    log.debug("singular %s block at iteration %d; gradient step", layer.name, it)
                t0 = time.perf_counter()
                state, n_half = _guarded_update(state, emp, params, step, config.max_backtrack)
                backtracks += n_half
                t0 = timer.add("p_eta", t0)
            _check_finite(state.theta, it)
        it += 1

    converged = gnorm <= config.tol
    if not converged:
        log.info("no convergence after %d iterations (max |grad| = %.3g)", it, gnorm)
    report = FitReport(
        iterations=it,
        final_kl=kl_trace[-1],
        final_grad_inf_norm=gnorm,
        converged=converged,
        kl_trace=kl_trace,
        fallback_steps=fallbacks,
        backtracks=backtracks,
        timings=timer.totals,
    )
    return state, report
