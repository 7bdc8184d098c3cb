"""Truncated number-basis simulator of the same circuit.

It shares nothing with the Wigner engine except the beam-splitter amplitude
convention (out1 = t*in1 - r*in2, out2 = r*in1 + t*in2), which makes it an
independent check on probabilities, amplitudes and fidelities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .optics import BeamSplitter

DEFAULT_CUTOFF = 20
BOUNDARY_TOL = 1e-10


class TruncationError(ValueError):
    """The state has non-negligible weight at the cutoff."""


@dataclass(frozen=True, eq=False)
class FockVector:
    amps: np.ndarray

    @property
    def cutoff(self) -> int:
        return len(self.amps) - 1

    @property
    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def annihilation_expectation(self) -> complex:
        c = self.amps
        n = np.arange(1, len(c))
        return complex(np.sum(np.sqrt(n) * np.conj(c[:-1]) * c[1:]))

    def mean_photon_number(self) -> float:
        return float(np.sum(np.arange(len(self.amps)) * np.abs(self.amps) ** 2))

    def overlap(self, other: "FockVector") -> complex:
        return complex(np.vdot(self.amps, other.amps))


@dataclass(frozen=True, eq=False)
class TwoModeFockVector:
    amps: np.ndarray  # amps[n1, n2]

    @property
    def cutoff(self) -> int:
        return self.amps.shape[0] - 1

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    @classmethod
    def product(cls, a: FockVector, b: FockVector) -> "TwoModeFockVector":
        return cls(np.outer(a.amps, b.amps))


def coherent_truncation_bound(alpha: complex, cutoff: int) -> float:
    """Leading term of the Poisson mass lost above ``cutoff``."""
    a2 = abs(alpha) ** 2
    k = cutoff + 1
    return math.exp(-a2 + k * math.log(a2) - math.lgamma(k + 1)) if a2 > 0 else 0.0


def coherent_fock(alpha: complex, cutoff: int = DEFAULT_CUTOFF) -> FockVector:
    alpha = complex(alpha)
    n = np.arange(cutoff + 1)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    mag = np.exp(-abs(alpha) ** 2 / 2 + n * math.log(abs(alpha)) - 0.5 * log_fact) if alpha else (n == 0) * 1.0
    amps = mag * np.exp(1j * n * np.angle(alpha))
    vec = FockVector(amps.astype(complex))
    if 1.0 - vec.norm > 1e-8:
        raise TruncationError(f"cutoff {cutoff} too small for |alpha| = {abs(alpha):.3g}")
    return vec


def number_state(n: int, cutoff: int = DEFAULT_CUTOFF) -> FockVector:
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[n] = 1.0
    return FockVector(amps)


@lru_cache(maxsize=64)
def _bs_unitary(r: float, cutoff: int) -> np.ndarray:
    # exp(theta (a1 a2^dag - a1^dag a2)) with sin(theta) = r maps coherent
    # |alpha, beta> to |t alpha - r beta, r alpha + t beta>.  The generator
    # conserves n1 + n2, so blocks with n1 + n2 <= cutoff are exact.
    dim = cutoff + 1
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    eye = np.eye(dim)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    gen = a1 @ a2.T - a1.T @ a2
    return expm(math.asin(r) * gen)


def apply_beam_splitter(s: TwoModeFockVector, bs: BeamSplitter, inverse: bool = False) -> TwoModeFockVector:
    dim = s.cutoff + 1
    boundary = np.sum(np.abs(s.amps[np.add.outer(np.arange(dim), np.arange(dim)) > s.cutoff]) ** 2)
    if boundary > BOUNDARY_TOL:
        raise TruncationError(f"{boundary:.3g} of the norm sits beyond the cutoff")
    U = _bs_unitary(bs.r, s.cutoff)
    if inverse:
        U = U.T
    return TwoModeFockVector((U @ s.amps.reshape(-1)).reshape(dim, dim))


def project_photon_count(s: TwoModeFockVector, mode: int, n: int) -> tuple[float, FockVector]:
    """Projective number measurement on ``mode`` (1 or 2); returns the other mode."""
    if not 0 <= n <= s.cutoff:
        raise ValueError(f"photon count {n} beyond cutoff {s.cutoff}")
    rest = s.amps[:, n] if mode == 2 else s.amps[n, :]
    prob = float(np.sum(np.abs(rest) ** 2))
    if prob == 0.0:
        raise ValueError(f"outcome n={n} on mode {mode} has zero probability")
    return prob, FockVector(rest / math.sqrt(prob))


def run_branch_fock(
    alpha: complex, splitters, outcome: tuple[int, int, int], cutoff: int = DEFAULT_CUTOFF
) -> tuple[float, FockVector]:
    """Number-basis counterpart of the amplifier's heralded branch."""
    qnd, pd1, pd2 = outcome
    vac = number_state(0, cutoff)
    bs1, bs2, bs3 = splitters
    state = TwoModeFockVector.product(coherent_fock(alpha, cutoff), vac)
    p1, out = project_photon_count(apply_beam_splitter(state, bs1), 2, qnd)
    state = TwoModeFockVector.product(out, number_state(qnd, cutoff))
    p2, out = project_photon_count(apply_beam_splitter(state, bs2), 2, pd1)
    state = TwoModeFockVector.product(out, vac)
    p3, out = project_photon_count(apply_beam_splitter(state, bs3), 2, pd2)
    return p1 * p2 * p3, out


def coherent_fidelity(vec: FockVector, beta: complex) -> float:
    """|<beta|psi>|^2 (vec is renormalized first)."""
    ref = coherent_fock(beta, vec.cutoff)
    return abs(ref.overlap(vec)) ** 2 / vec.norm
