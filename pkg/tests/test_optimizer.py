import numpy as np
import pytest

from stochamp.optimizer import (
    InfeasibleProblem,
    OptimizationProblem,
    log_p_and_gain,
    maximize_success,
    sweep,
)


def brute_force_symmetric(g_min, step=1e-3, alpha_max=3.0):
    """Grid search over (|alpha|, r) with r1 = r2 = r3; closed forms only."""
    a = np.arange(step, alpha_max + step / 2, step)[:, None]
    r = np.arange(step, 1.0, step)[None, :]
    T = (1 - r * r) ** 1.5
    u = T * T * a * a
    D = 1 + 3 * u + u * u
    g = T * (2 + 4 * u + u * u) / D
    P = D * r**6 * a * a * np.exp(u - a * a)
    P = np.where(g >= g_min, P, -np.inf)
    i, j = np.unravel_index(np.argmax(P), P.shape)
    return P[i, j], a[i, 0], r[0, j]


def test_gradients_against_finite_differences():
    z = np.array([0.7, 0.25, 0.45, 0.1])
    _, glogp, _, gg = log_p_and_gain(z)
    for i in range(4):
        h = 1e-6
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        fp, fm = log_p_and_gain(zp), log_p_and_gain(zm)
        assert (fp[0] - fm[0]) / (2 * h) == pytest.approx(glogp[i], abs=1e-7)
        assert (fp[2] - fm[2]) / (2 * h) == pytest.approx(gg[i], abs=1e-7)


def test_problem_validation():
    for g in (1.0, 2.0, 0.5):
        with pytest.raises(ValueError):
            OptimizationProblem(g)


@pytest.fixture(scope="module")
def at_1_4():
    return maximize_success(OptimizationProblem(1.4))


def test_reported_optimum(at_1_4):
    res = at_1_4
    assert res.p_opt == pytest.approx(1.0e-3, rel=0.1)
    assert res.alpha_opt == pytest.approx(0.51, abs=0.02)
    assert res.r_mean == pytest.approx(0.38, abs=0.02)
    assert res.r_spread <= 1e-4
    assert res.converged


def test_constraint_active_and_feasible(at_1_4):
    assert at_1_4.g_at_opt >= 1.4 - 1e-8
    assert at_1_4.g_at_opt - 1.4 <= 1e-4


def test_peak_reflectivity_region():
    res = maximize_success(OptimizationProblem(1.18, multistart_count=4))
    assert res.r_mean == pytest.approx(0.42, abs=0.01)


def test_near_nominal_gain():
    res = maximize_success(OptimizationProblem(1.99, multistart_count=4))
    assert res.r_mean < 0.05
    assert res.p_opt < 1e-6


@pytest.mark.parametrize("g_min", [1.2, 1.4, 1.6])
def test_against_brute_force(g_min):
    p_grid, _, _ = brute_force_symmetric(g_min)
    res = maximize_success(OptimizationProblem(g_min, multistart_count=6))
    assert res.p_opt == pytest.approx(p_grid, rel=0.01)
    assert res.p_opt >= p_grid * (1 - 1e-6)


def test_deterministic():
    a = maximize_success(OptimizationProblem(1.5, multistart_count=3, seed=7))
    b = maximize_success(OptimizationProblem(1.5, multistart_count=3, seed=7))
    assert a == b


def test_infeasible_start_is_reported(monkeypatch):
    from stochamp import optimizer

    def never(z, prob):
        raise InfeasibleProblem("no start")

    monkeypatch.setattr(optimizer, "_make_feasible", never)
    with pytest.raises(InfeasibleProblem):
        maximize_success(OptimizationProblem(1.5, multistart_count=2))
    assert sweep([1.3, 1.5], multistart_count=1) == [None, None]


def test_feasible_start_close_to_nominal_gain():
    res = maximize_success(OptimizationProblem(1.999, multistart_count=1))
    assert res.g_at_opt >= 1.999 - 1e-8


def test_small_alpha_box():
    res = maximize_success(OptimizationProblem(1.4, alpha_max=0.3, multistart_count=3))
    assert res.alpha_opt <= 0.3
    assert res.g_at_opt >= 1.4 - 1e-8


def test_sweep_trends():
    gs = [1.1, 1.3, 1.5, 1.7, 1.9]
    results = sweep(gs, multistart_count=3)
    p = [r.p_opt for r in results]
    assert all(b < a for a, b in zip(p, p[1:]))
    assert all(r.r_spread <= 1e-4 for r in results)
    assert results[-1].f_opt > results[0].f_opt
    with pytest.raises(ValueError):
        sweep([1.5, 1.4])
