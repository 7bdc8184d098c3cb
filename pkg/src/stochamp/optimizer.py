"""Gain-constrained maximization of the success probability.

The problem

    maximize   P_succ(a, r1, r2, r3)
    subject to g_eff(a, r1, r2, r3) >= g_min,  0 < r_i < 1,  0 < a <= a_max

is solved with a logarithmic barrier: for a decreasing weight mu we minimize

    -log P_succ - mu * sum_j log c_j(z)

with a damped Newton method that never leaves the strict interior.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .amplifier import AmplifierConfig, f_eff_closed_form, g_eff_closed_form, p_succ_closed_form

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BarrierSchedule:
    mu0: float = 1.0
    shrink: float = 0.1
    mu_min: float = 1e-9
    grad_tol: float = 1e-9
    max_inner: int = 200
    max_outer: int = 40


@dataclass(frozen=True)
class OptimizationProblem:
    g_min: float
    alpha_max: float = 3.0
    multistart_count: int = 16
    seed: int = 0
    schedule: BarrierSchedule = field(default_factory=BarrierSchedule)

    def __post_init__(self) -> None:
        if not 1.0 < self.g_min < 2.0:
            raise ValueError(f"g_min must lie in (1, 2), got {self.g_min}")
        if self.alpha_max <= 0:
            raise ValueError("alpha_max must be positive")
        if self.multistart_count < 1:
            raise ValueError("multistart_count must be positive")


@dataclass(frozen=True)
class OptimizationResult:
    g_min: float
    p_opt: float
    alpha_opt: float
    r_opt: tuple[float, float, float]
    f_opt: float
    g_at_opt: float
    converged: bool
    iterations: int

    @property
    def r_mean(self) -> float:
        return sum(self.r_opt) / 3.0

    @property
    def r_spread(self) -> float:
        return max(self.r_opt) - min(self.r_opt)


class InfeasibleProblem(RuntimeError):
    pass


# objective and constraint with analytic gradients ---------------------------


def log_p_and_gain(z: np.ndarray) -> tuple[float, np.ndarray, float, np.ndarray]:
    """log P_succ, its gradient, g_eff and its gradient at z = (a, r1, r2, r3)."""
    a, r = z[0], z[1:]
    t2 = 1.0 - r * r
    T = math.sqrt(float(np.prod(t2)))
    u = T * T * a * a
    D = 1.0 + 3.0 * u + u * u
    N = 2.0 + 4.0 * u + u * u
    dD, dN = 3.0 + 2.0 * u, 4.0 + 2.0 * u

    du = np.empty(4)
    du[0] = 2.0 * T * T * a
    du[1:] = -2.0 * u * r / t2
    dT = np.zeros(4)
    dT[1:] = -T * r / t2

    logp = math.log(D) + 2.0 * float(np.sum(np.log(r))) + 2.0 * math.log(a) + u - a * a
    glogp = (dD / D + 1.0) * du
    glogp[0] += 2.0 / a - 2.0 * a
    glogp[1:] += 2.0 / r

    g = T * N / D
    gg = dT * N / D + T * (dN * D - N * dD) / (D * D) * du
    return logp, glogp, g, gg


def _constraints(z: np.ndarray, g: float, gg: np.ndarray, prob: OptimizationProblem):
    """Constraint values c_j > 0 and their gradients (rows)."""
    c = [g - prob.g_min, z[0], prob.alpha_max - z[0]]
    grads = [gg, np.eye(4)[0], -np.eye(4)[0]]
    for i in range(1, 4):
        c += [z[i], 1.0 - z[i]]
        grads += [np.eye(4)[i], -np.eye(4)[i]]
    return np.array(c), np.array(grads)


def _feasible(z: np.ndarray, prob: OptimizationProblem) -> bool:
    if not (0 < z[0] < prob.alpha_max and np.all((z[1:] > 0) & (z[1:] < 1))):
        return False
    return g_eff_at(z) > prob.g_min


def g_eff_at(z: np.ndarray) -> float:
    return g_eff_closed_form(AmplifierConfig.from_reflectivities(z[0], *z[1:]))


class _Barrier:
    def __init__(self, prob: OptimizationProblem, mu: float):
        self.prob = prob
        self.mu = mu

    def value(self, z: np.ndarray) -> float:
        if not _feasible(z, self.prob):
            return math.inf
        logp, _, g, gg = log_p_and_gain(z)
        c, _ = _constraints(z, g, gg, self.prob)
        return -logp - self.mu * float(np.sum(np.log(c)))

    def smooth_grads(self, z: np.ndarray):
        logp, glogp, g, gg = log_p_and_gain(z)
        return glogp, gg, g

    def grad_hess(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        glogp, gg, g = self.smooth_grads(z)
        c, J = _constraints(z, g, gg, self.prob)
        grad = -glogp - self.mu * (J.T @ (1.0 / c))

        # Hessians of the smooth parts by central differences of their
        # analytic gradients; the barrier's dominant 1/c^2 part is exact.
        H_obj = np.zeros((4, 4))
        H_g = np.zeros((4, 4))
        for i in range(4):
            h = 1e-6 * max(abs(z[i]), 1e-3)
            h = min(h, 0.5 * min(z[i], 1.0 - z[i]) if i else 0.5 * z[i])
            zp, zm = z.copy(), z.copy()
            zp[i] += h
            zm[i] -= h
            gp_obj, gp_g, _ = self.smooth_grads(zp)
            gm_obj, gm_g, _ = self.smooth_grads(zm)
            H_obj[:, i] = -(gp_obj - gm_obj) / (2 * h)
            H_g[:, i] = (gp_g - gm_g) / (2 * h)
        H_obj = 0.5 * (H_obj + H_obj.T)
        H_g = 0.5 * (H_g + H_g.T)
        H = H_obj + self.mu * (J.T * (1.0 / c**2)) @ J - self.mu / c[0] * H_g
        return grad, H


def _newton(barrier: _Barrier, z: np.ndarray, sched: BarrierSchedule) -> tuple[np.ndarray, float, int]:
    """Damped Newton with backtracking that stays strictly feasible."""
    f = barrier.value(z)
    gnorm = math.inf
    for it in range(1, sched.max_inner + 1):
        grad, H = barrier.grad_hess(z)
        gnorm = float(np.linalg.norm(grad))
        if gnorm < sched.grad_tol:
            return z, gnorm, it
        # fall back toward steepest descent when H is not positive definite
        lam = 0.0
        while True:
            try:
                L = np.linalg.cholesky(H + lam * np.eye(4))
                break
            except np.linalg.LinAlgError:
                lam = max(2 * lam, 1e-8 * (1 + np.abs(H).max()))
        step = -np.linalg.solve(L.T, np.linalg.solve(L, grad))
        slope = float(grad @ step)
        s = 1.0
        while s > 1e-16:
            cand = z + s * step
            fc = barrier.value(cand)
            if fc <= f + 1e-4 * s * slope:
                break
            s *= 0.5
        else:
            return z, gnorm, it
        if abs(f - fc) <= 1e-15 * max(1.0, abs(f)) and s * np.linalg.norm(step) < 1e-15:
            z, f = cand, fc
            grad, _ = barrier.grad_hess(z)
            return z, float(np.linalg.norm(grad)), it
        z, f = cand, fc
    return z, gnorm, sched.max_inner


def _make_feasible(z: np.ndarray, prob: OptimizationProblem) -> np.ndarray:
    # g_eff -> 2 as both the amplitude and the reflectivities shrink
    z = z.copy()
    for _ in range(200):
        if _feasible(z, prob):
            return z
        z[0] *= 0.8
        z[1:] *= 0.8
    raise InfeasibleProblem(f"no strictly feasible start found for g_min={prob.g_min}")


def _solve_from(z0: np.ndarray, prob: OptimizationProblem) -> tuple[np.ndarray, bool, int]:
    sched = prob.schedule
    z = _make_feasible(z0, prob)
    mu = sched.mu0
    iterations = 0
    converged = False
    for _ in range(sched.max_outer):
        z, gnorm, its = _newton(_Barrier(prob, mu), z, sched)
        iterations += its
        if mu < sched.mu_min:
            converged = gnorm < sched.grad_tol or its < sched.max_inner
            break
        mu *= sched.shrink
    return z, converged, iterations


def _result(z: np.ndarray, prob: OptimizationProblem, converged: bool, iterations: int) -> OptimizationResult:
    cfg = AmplifierConfig.from_reflectivities(z[0], *z[1:])
    return OptimizationResult(
        g_min=prob.g_min,
        p_opt=p_succ_closed_form(cfg),
        alpha_opt=float(z[0]),
        r_opt=tuple(float(x) for x in z[1:]),
        f_opt=f_eff_closed_form(cfg),
        g_at_opt=g_eff_closed_form(cfg),
        converged=converged,
        iterations=iterations,
    )


def _starts(prob: OptimizationProblem) -> np.ndarray:
    rng = np.random.default_rng(prob.seed)
    alphas = min(prob.alpha_max, 1.5) * rng.uniform(0.03, 1.0, prob.multistart_count)
    rs = rng.uniform(0.02, 0.7, (prob.multistart_count, 3))
    return np.column_stack([alphas, rs])


def maximize_success(prob: OptimizationProblem, extra_starts: list[np.ndarray] | None = None) -> OptimizationResult:
    """Best barrier solution over deterministic multistarts."""
    starts = list(extra_starts or []) + list(_starts(prob))
    best: tuple[float, np.ndarray, bool, int] | None = None
    total_its = 0
    for z0 in starts:
        try:
            z, ok, its = _solve_from(np.asarray(z0, dtype=float), prob)
        except InfeasibleProblem:
            continue
        total_its += its
        logp = log_p_and_gain(z)[0]
        if best is None or logp > best[0] + 1e-12 or (ok and not best[2] and logp > best[0] - 1e-12):
            best = (logp, z, ok, its)
    if best is None:
        raise InfeasibleProblem(f"no feasible start for g_min={prob.g_min}")
    _, z, ok, _ = best
    if not ok:
        log.warning("barrier solve for g_min=%g did not meet the convergence test", prob.g_min)
    return _result(z, prob, ok, total_its)


def sweep(
    g_values, alpha_max: float = 3.0, multistart_count: int = 16, seed: int = 0
) -> list[OptimizationResult | None]:
    """Solve at each threshold, warm-starting from the previous optimum.

    A point that fails is logged and reported as ``None``.
    """
    g_values = list(g_values)
    if any(b <= a for a, b in zip(g_values, g_values[1:])):
        raise ValueError("g_values must be strictly increasing")
    results: list[OptimizationResult | None] = []
    warm: list[np.ndarray] = []
    for g in g_values:
        prob = OptimizationProblem(g, alpha_max, multistart_count, seed)
        try:
            res = maximize_success(prob, warm)
        except InfeasibleProblem as exc:
            log.error("%s", exc)
            results.append(None)
            continue
        results.append(res)
        warm = [np.array([res.alpha_opt, *res.r_opt])]
    return results
