"""Wigner-function primitives: states, beam splitters, photon detection, metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gausspoly import (
    GaussPolyError,
    GaussPolyState,
    Poly,
    integrate_all,
    integrate_modes,
    integrate_product,
    moment,
    multiply,
    substitute_linear,
    tensor,
)

# largest Fock order handed out by fock_state; detection may go higher
FOCK_CAP = 4
# detection projectors are available up to this order (completeness checks)
DETECTION_CAP = 24
MIN_BRANCH_PROBABILITY = 1e-30
NORM_TOL = 1e-8


class BranchImpossible(ValueError):
    """A heralded outcome has (numerically) zero probability."""


@dataclass(frozen=True)
class BeamSplitter:
    r: float
    t: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.r < 1.0) or self.t <= 0.0:
            raise ValueError(f"need 0 <= r < 1 and t > 0, got r={self.r}, t={self.t}")
        if abs(self.r**2 + self.t**2 - 1.0) > 1e-12:
            raise ValueError("r^2 + t^2 must equal 1")

    @classmethod
    def from_r(cls, r: float) -> "BeamSplitter":
        return cls(float(r), math.sqrt(1.0 - float(r) ** 2))

    def matrix(self) -> np.ndarray:
        """Substitution (x1, p1, x2, p2) -> arguments of (W_field1, W_field2)."""
        r, t = self.r, self.t
        return np.array(
            [
                [t, 0.0, r, 0.0],
                [0.0, t, 0.0, r],
                [-r, 0.0, t, 0.0],
                [0.0, -r, 0.0, t],
            ]
        )


def coherent_state(alpha: complex) -> GaussPolyState:
    alpha = complex(alpha)
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
        raise ValueError("alpha must be finite")
    mean = np.array([math.sqrt(2.0) * alpha.real, math.sqrt(2.0) * alpha.imag])
    return GaussPolyState(1, {(0, 0): 1.0 / math.pi}, mean, np.eye(2))


@lru_cache(maxsize=None)
def _laguerre_coeffs(n: int) -> tuple[float, ...]:
    # (k+1) L_{k+1}(y) = (2k+1-y) L_k(y) - k L_{k-1}(y)
    prev = np.array([1.0])
    if n == 0:
        return tuple(prev)
    cur = np.array([1.0, -1.0])
    for k in range(1, n):
        nxt = np.zeros(k + 2)
        nxt[: k + 1] += (2 * k + 1) * cur
        nxt[1:] -= cur
        nxt[: k] -= k * prev
        prev, cur = cur, nxt / (k + 1)
    return tuple(cur)


def _fock_poly(n: int) -> Poly:
    # (-1)^n/pi * L_n(2x^2 + 2p^2) expanded in x, p
    poly: Poly = {}
    sign = (-1) ** n / math.pi
    for k, ck in enumerate(_laguerre_coeffs(n)):
        if ck == 0.0:
            continue
        base = sign * ck * 2.0**k
        for j in range(k + 1):
            e = (2 * j, 2 * (k - j))
            poly[e] = poly.get(e, 0.0) + base * math.comb(k, j)
    return poly


def _fock(n: int) -> GaussPolyState:
    return GaussPolyState(1, _fock_poly(n), np.zeros(2), np.eye(2))


def laguerre(n: int, y: np.ndarray) -> np.ndarray:
    """L_n(y) by the three-term recurrence (stable for pointwise evaluation)."""
    y = np.asarray(y, dtype=float)
    prev, cur = np.ones_like(y), 1.0 - y
    if n == 0:
        return prev
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - y) * cur - k * prev) / (k + 1)
    return cur


def fock_state(n: int, cap: int = FOCK_CAP) -> GaussPolyState:
    """Wigner function of the number state |n>."""
    if n < 0 or n > cap:
        raise ValueError(f"Fock order {n} outside 0..{cap}")
    return _fock(n)


def beam_split(field1: GaussPolyState, field2: GaussPolyState, bs: BeamSplitter) -> GaussPolyState:
    """Two-mode output: mode 1 transmitted, mode 2 reflected (toward the detector).

    For coherent inputs alpha (port 1) and beta (port 2) the output amplitudes
    are t*alpha - r*beta and r*alpha + t*beta.
    """
    if field1.modes != 1 or field2.modes != 1:
        raise GaussPolyError("beam_split takes two single-mode states")
    return substitute_linear(tensor(field1, field2), bs.matrix())


def _check_normalized(s: GaussPolyState) -> None:
    norm = integrate_all(s)
    if abs(norm - 1.0) > NORM_TOL:
        raise GaussPolyError(f"state is not normalized (integral {norm:.12g})")


def _project_quadrature(s: GaussPolyState, n: int) -> GaussPolyState:
    # Requires a block-diagonal precision.  The mode-2 integral of each
    # monomial against W_n is done by tensor Gauss-Hermite quadrature, which
    # is exact for the polynomial degrees involved and never expands L_n.
    Akk, Add = s.precision[:2, :2], s.precision[2:, 2:]
    mu_k, mu_d = s.mean[:2], s.mean[2:]
    C = Add + np.eye(2)
    centre = np.linalg.solve(C, Add @ mu_d)
    log_const = float(centre @ C @ centre - mu_d @ Add @ mu_d)
    U = np.linalg.cholesky(C).T  # C = U^T U
    maxdeg = max(e[2] + e[3] for e in s.poly) + 2 * n
    nodes, weights = np.polynomial.hermite.hermgauss(maxdeg // 2 + 2)
    Y = np.array(np.meshgrid(nodes, nodes, indexing="ij")).reshape(2, -1)
    W = np.outer(weights, weights).reshape(-1)
    V = centre[:, None] + np.linalg.solve(U, Y)
    base = W * laguerre(n, 2.0 * (V[0] ** 2 + V[1] ** 2))
    scale = 2.0 * (-1) ** n * math.exp(log_const) / np.linalg.det(U)
    cache: dict[tuple[int, int], float] = {}
    reduced: Poly = {}
    for e, c in s.poly.items():
        key = e[2:]
        if key not in cache:
            cache[key] = scale * float(np.sum(base * V[0] ** key[0] * V[1] ** key[1]))
        reduced[e[:2]] = reduced.get(e[:2], 0.0) + c * cache[key]
    return GaussPolyState(1, reduced, mu_k, Akk)


def _project(s: GaussPolyState, n: int) -> GaussPolyState:
    """Unnormalized 2*pi * int s(v1, v2) W_n(v2) dv2 as a mode-1 state."""
    if not np.any(s.precision[:2, 2:]):
        return _project_quadrature(s, n)
    projector = tensor(_unit_mode(), _fock(n))
    return integrate_modes(multiply(s, projector), keep=[1]).scaled(2.0 * math.pi)


def _check_detection(s: GaussPolyState, n: int) -> None:
    if s.modes != 2:
        raise GaussPolyError("detection acts on a two-mode state")
    if n < 0 or n > DETECTION_CAP:
        raise ValueError(f"photon count {n} outside 0..{DETECTION_CAP}")
    _check_normalized(s)


def detection_probability(s: GaussPolyState, n: int) -> float:
    """Probability of counting ``n`` photons in mode 2 of a two-mode state."""
    _check_detection(s, n)
    return integrate_all(_project(s, n))


def collapse_on_detection(s: GaussPolyState, n: int) -> tuple[float, GaussPolyState]:
    """Herald ``n`` photons in mode 2; return (probability, transmitted state)."""
    _check_detection(s, n)
    unnormalized = _project(s, n)
    prob = integrate_all(unnormalized)
    if prob <= MIN_BRANCH_PROBABILITY:
        raise BranchImpossible(f"detecting {n} photons has probability {prob:.3g}")
    return prob, unnormalized.scaled(1.0 / prob)


def _unit_mode() -> GaussPolyState:
    return GaussPolyState(1, {(0, 0): 1.0}, np.zeros(2), np.zeros((2, 2)))


def _single_mode(s: GaussPolyState, what: str) -> None:
    if s.modes != 1:
        raise GaussPolyError(f"{what} needs a single-mode state")


def amplitude_expectation(s: GaussPolyState) -> complex:
    """<a> = (<x> + i<p>) / sqrt(2)."""
    _single_mode(s, "amplitude_expectation")
    return complex(moment(s, (1, 0)), moment(s, (0, 1))) / math.sqrt(2.0)


def mean_photon_number(s: GaussPolyState) -> float:
    """<a^dag a> from the symmetrically ordered second moments."""
    if s.modes == 1:
        return 0.5 * (moment(s, (2, 0)) + moment(s, (0, 2))) - 0.5
    total = 0.0
    for m in range(1, s.modes + 1):
        total += mean_photon_number(integrate_modes(s, keep=[m]))
    return total


def fidelity(w1: GaussPolyState, w2: GaussPolyState) -> float:
    """Wigner overlap 2*pi*int w1 w2."""
    if w1.modes != w2.modes:
        raise GaussPolyError("fidelity needs states with equal mode counts")
    return (2.0 * math.pi) ** w1.modes * integrate_product(w1, w2)


def purity(s: GaussPolyState) -> float:
    return fidelity(s, s)
