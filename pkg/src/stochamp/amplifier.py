"""Three-beam-splitter amplifier: subtract, QND-verified add-back, subtract.

Stage 1 mixes the input with vacuum and the QND detector counts photons on
the reflected arm; the counted Fock state is fed back into port 2 of the
second beam splitter.  PD1 watches the second splitter's reflected arm and
PD2 the third.  The heralded success pattern is (QND, PD1, PD2) = (1, 0, 1).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .gausspoly import GaussPolyState
from .optics import (
    BeamSplitter,
    amplitude_expectation,
    beam_split,
    coherent_state,
    collapse_on_detection,
    fidelity,
    fock_state,
    mean_photon_number,
)

NOMINAL_GAIN = 2.0
MAX_ALPHA = 3.0
SUCCESS = (1, 0, 1)
# row order of the published branch table
BRANCH_ORDER = ((1, 0, 1), (1, 0, 0), (1, 1, 1), (1, 1, 0), (0, 1, 1), (0, 1, 0), (0, 0, 1), (0, 0, 0))


@dataclass(frozen=True)
class AmplifierConfig:
    alpha: complex
    bs1: BeamSplitter
    bs2: BeamSplitter
    bs3: BeamSplitter

    def __post_init__(self) -> None:
        if not abs(self.alpha) < MAX_ALPHA:
            raise ValueError(f"|alpha| must be below {MAX_ALPHA}")

    @classmethod
    def symmetric(cls, alpha: complex, r: float) -> "AmplifierConfig":
        bs = BeamSplitter.from_r(r)
        return cls(complex(alpha), bs, bs, bs)

    @classmethod
    def from_reflectivities(cls, alpha: complex, r1: float, r2: float, r3: float) -> "AmplifierConfig":
        return cls(complex(alpha), *(BeamSplitter.from_r(r) for r in (r1, r2, r3)))

    @property
    def splitters(self) -> tuple[BeamSplitter, BeamSplitter, BeamSplitter]:
        return (self.bs1, self.bs2, self.bs3)

    @property
    def total_transmission(self) -> float:
        return self.bs1.t * self.bs2.t * self.bs3.t

    @property
    def total_reflection(self) -> float:
        return self.bs1.r * self.bs2.r * self.bs3.r


@dataclass(frozen=True)
class AmplifierReport:
    p_succ: float
    g_eff: float
    f_eff: float
    f_ideal: float
    output: GaussPolyState


@dataclass(frozen=True)
class BranchOutcome:
    qnd: int
    pd1: int
    pd2: int
    probability: float
    output: GaussPolyState
    amplitude: float
    fidelity_deficit: float
    amplitude_deficit: float

    @property
    def outcome(self) -> tuple[int, int, int]:
        return (self.qnd, self.pd1, self.pd2)


def run_branch(cfg: AmplifierConfig, outcome: tuple[int, int, int]) -> tuple[float, GaussPolyState]:
    """Chain the three heralded detections; returns (probability, output)."""
    qnd, pd1, pd2 = outcome
    vacuum = coherent_state(0.0)
    p1, s = collapse_on_detection(beam_split(coherent_state(cfg.alpha), vacuum, cfg.bs1), qnd)
    p2, s = collapse_on_detection(beam_split(s, fock_state(qnd), cfg.bs2), pd1)
    p3, s = collapse_on_detection(beam_split(s, vacuum, cfg.bs3), pd2)
    return p1 * p2 * p3, s


def _phase(alpha: complex) -> complex:
    return cmath.exp(1j * cmath.phase(alpha)) if alpha != 0 else 1.0


def run_success_branch(cfg: AmplifierConfig) -> AmplifierReport:
    prob, out = run_branch(cfg, SUCCESS)
    a_out = amplitude_expectation(out)
    g_eff = abs(a_out) / abs(cfg.alpha)
    f_eff = fidelity(out, coherent_state(g_eff * cfg.alpha))
    f_ideal = fidelity(out, coherent_state(NOMINAL_GAIN * cfg.alpha))
    return AmplifierReport(prob, g_eff, f_eff, f_ideal, out)


def matched_coherent_amplitude(out: GaussPolyState) -> complex:
    """Coherent amplitude with the output's photon number and the phase of <a>."""
    a_out = amplitude_expectation(out)
    n = max(mean_photon_number(out), 0.0)
    return math.sqrt(n) * _phase(a_out)


def enumerate_single_photon_branches(cfg: AmplifierConfig) -> tuple[list[BranchOutcome], float]:
    """All eight (QND, PD1, PD2) in {0,1}^3 outcomes plus the leftover probability.

    ``fidelity_deficit`` is measured against the coherent state carrying the
    same mean photon number (and the phase of <a>); ``amplitude_deficit``
    against the coherent state |<a>>.  Both vanish for coherent outputs.
    """
    branches = []
    for outcome in BRANCH_ORDER:
        prob, out = run_branch(cfg, outcome)
        a_out = amplitude_expectation(out)
        deficit = 1.0 - fidelity(out, coherent_state(matched_coherent_amplitude(out)))
        amp_deficit = 1.0 - fidelity(out, coherent_state(a_out))
        branches.append(BranchOutcome(*outcome, prob, out, abs(a_out), deficit, amp_deficit))
    other = 1.0 - sum(b.probability for b in branches)
    return branches, other


# closed forms ---------------------------------------------------------------


def p_succ_closed_form(cfg: AmplifierConfig) -> float:
    a2 = abs(cfg.alpha) ** 2
    u = cfg.total_transmission**2 * a2
    return (1.0 + u * (3.0 + u)) * cfg.total_reflection**2 * a2 * math.exp(u - a2)


def g_eff_closed_form(cfg: AmplifierConfig) -> float:
    T = cfg.total_transmission
    u = T**2 * abs(cfg.alpha) ** 2
    return T * (2.0 + 4.0 * u + u * u) / (1.0 + 3.0 * u + u * u)


def g_limit_low_reflectivity(alpha: complex) -> float:
    u = abs(alpha) ** 2
    return (2.0 + 4.0 * u + u * u) / (1.0 + 3.0 * u + u * u)


def _f_eff(cfg: AmplifierConfig, printed: bool) -> float:
    T = cfg.total_transmission
    a2 = abs(cfg.alpha) ** 2
    u = T**2 * a2
    g = g_eff_closed_form(cfg)
    shift = (g * g - T) if printed else (g - T)
    num = (1.0 + 2.0 * g * T * a2 + g * g * T * T * a2 * a2) * math.exp(-shift**2 * a2)
    return num / (1.0 + 3.0 * u + u * u)


def f_eff_closed_form(cfg: AmplifierConfig) -> float:
    """Fidelity of the success output to |g_eff alpha>, exponent (g_eff - T)^2 |alpha|^2."""
    return _f_eff(cfg, printed=False)


def f_eff_closed_form_as_printed(cfg: AmplifierConfig) -> float:
    """Variant with exponent (g_eff^2 - T)^2 |alpha|^2; kept to show that it disagrees."""
    return _f_eff(cfg, printed=True)
