"""Linear-optics comparison device: probe photon, balanced splitter, two counters.

The device interferes the arm mode to be measured with a one-photon-or-less
probe mode on a balanced splitter and counts photons at both outputs.  A
lone click at the probe-side counter is the ``Plus`` outcome, a lone click
at the arm-side counter is ``Minus``, and every other count pattern
(vacuum, double clicks, coincidences) is ``Inconclusive``.

As a measurement on the arm qubit span {|0>, |1>}, the three outcomes form
the POVM

    E_plus  = 1/2 |pi+><pi+|   with  pi+ = conj(g1)|0> + conj(g0)|1>
    E_minus = 1/2 |pi-><pi-|   with  pi- = -conj(g1)|0> + conj(g0)|1>
    E_inc   = diag(|g0|^2, |g1|^2)

for a probe g0|0> + g1|1>.  Note the swap: the conclusive directions are
the probe coefficients reversed, which is why :func:`probe_for_direction`
hands back the swapped pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .fock import (
    Occupation,
    StateVector,
    drop_modes,
    project_mode_number,
    tensor,
    _check_mode,
)
from .optics import BeamSplitter, apply_beam_splitter

NORM_TOL = 1e-12
STATE_NORM_TOL = 1e-9


def _check_pair_normalized(c0: complex, c1: complex, what: str) -> Tuple[complex, complex]:
    c0, c1 = complex(c0), complex(c1)
    for z in (c0, c1):
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValueError(f"{what} has a non-finite entry")
    if abs(abs(c0) ** 2 + abs(c1) ** 2 - 1.0) > NORM_TOL:
        raise ValueError(f"{what} is not normalized")
    return c0, c1


@dataclass(frozen=True)
class SuperpositionCoeffs:
    """Normalized qubit direction c0|0> + c1|1>."""

    c0: complex
    c1: complex

    def __post_init__(self):
        c0, c1 = _check_pair_normalized(self.c0, self.c1, "direction")
        object.__setattr__(self, "c0", c0)
        object.__setattr__(self, "c1", c1)


@dataclass(frozen=True)
class ProbeState:
    """Normalized probe g0|0> + g1|1> injected into the splitter's flip port."""

    g0: complex
    g1: complex

    def __post_init__(self):
        g0, g1 = _check_pair_normalized(self.g0, self.g1, "probe")
        object.__setattr__(self, "g0", g0)
        object.__setattr__(self, "g1", g1)


class OutcomeTag(Enum):
    PLUS = "plus"
    MINUS = "minus"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class DeviceOutcome:
    tag: OutcomeTag
    detector_counts: Tuple[int, int]


@dataclass(frozen=True)
class DevicePOVM:
    """2x2 effect matrices on the arm qubit span, ordered (|0>, |1>)."""

    e_plus: np.ndarray
    e_minus: np.ndarray
    e_inconclusive: np.ndarray

    def completeness_deviation(self) -> float:
        total = self.e_plus + self.e_minus + self.e_inconclusive
        return float(np.max(np.abs(total - np.eye(2))))


@dataclass(frozen=True)
class DeviceBranch:
    """One count pattern with its probability and the collapsed remainder."""

    counts: Tuple[int, int]
    probability: float
    remainder: StateVector


def probe_for_direction(direction: SuperpositionCoeffs) -> ProbeState:
    """Probe whose Plus outcome projects exactly onto the given direction.

    The conclusive effect lands on the swapped-and-conjugated probe pair, so
    the probe for direction (c0, c1) is (conj(c1), conj(c0)); the global
    phase is fixed to make g0 real and non-negative (g1 when g0 vanishes).
    """
    g0 = direction.c1.conjugate()
    g1 = direction.c0.conjugate()
    anchor = g0 if abs(g0) > NORM_TOL else g1
    phase = anchor.conjugate() / abs(anchor)
    return ProbeState(g0 * phase, g1 * phase)


def device_povm(probe: ProbeState) -> DevicePOVM:
    """Closed-form three-outcome POVM for a fixed probe."""
    pi_plus = np.array([probe.g1.conjugate(), probe.g0.conjugate()])
    pi_minus = np.array([-probe.g1.conjugate(), probe.g0.conjugate()])
    e_plus = 0.5 * np.outer(pi_plus, pi_plus.conjugate())
    e_minus = 0.5 * np.outer(pi_minus, pi_minus.conjugate())
    e_inc = np.diag([abs(probe.g0) ** 2, abs(probe.g1) ** 2]).astype(complex)
    return DevicePOVM(e_plus, e_minus, e_inc)


def classify_counts(counts: Tuple[int, int]) -> OutcomeTag:
    if counts == (1, 0):
        return OutcomeTag.PLUS
    if counts == (0, 1):
        return OutcomeTag.MINUS
    return OutcomeTag.INCONCLUSIVE


def analyze_device(state: StateVector, arm: int, probe: ProbeState) -> List[DeviceBranch]:
    """Every count pattern the device can produce, with exact probabilities.

    The probe mode is appended, the balanced splitter is applied with the
    probe on the flip port, and the joint photon-number statistics of the
    two output counters are read off.  Each branch carries the renormalized
    state of the untouched modes (the arm and probe modes are consumed).
    Branches are ordered by count pattern so sampling is reproducible.
    """
    _check_mode(state, arm)
    if abs(state.norm_sq() - 1.0) > STATE_NORM_TOL:
        raise ValueError("input state must be normalized")
    for occ in state.amplitudes:
        if occ[arm] > 1:
            raise ValueError("arm mode must have at most one photon")

    probe_sv = StateVector(1, state.n_max, {(0,): probe.g0, (1,): probe.g1})
    work = tensor(state, probe_sv)
    probe_mode = state.mode_count
    mixed = apply_beam_splitter(work, BeamSplitter(0.5, port_a=probe_mode, port_b=arm))

    by_pattern: Dict[Tuple[int, int], Dict[Occupation, complex]] = {}
    for occ, amp in mixed.items():
        pattern = (occ[probe_mode], occ[arm])
        by_pattern.setdefault(pattern, {})[occ] = amp

    branches = []
    for pattern in sorted(by_pattern):
        amps = by_pattern[pattern]
        sub = StateVector._raw(mixed.mode_count, mixed.n_max, dict(amps))
        prob = sub.norm_sq()
        if prob <= 1e-14:
            continue
        remainder = drop_modes(sub, (arm, probe_mode)).normalized()
        branches.append(DeviceBranch(pattern, prob, remainder))
    return branches


def measure_device(
    state: StateVector, arm: int, probe: ProbeState, rng: np.random.Generator
) -> Tuple[DeviceOutcome, StateVector]:
    """Sample one run of the device; returns the outcome and the remainder.

    The remainder is the collapsed, renormalized state of the modes the
    device did not consume (original order with the arm mode removed).
    """
    branches = analyze_device(state, arm, probe)
    u = float(rng.random())
    acc = 0.0
    chosen = branches[-1]
    for branch in branches:
        acc += branch.probability
        if u < acc:
            chosen = branch
            break
    return DeviceOutcome(classify_counts(chosen.counts), chosen.counts), chosen.remainder


def sample_number_measurement(
    state: StateVector, modes: Sequence[int], rng: np.random.Generator
) -> Tuple[Tuple[int, ...], StateVector]:
    """Born-rule photon counting on the given modes.

    Returns the observed counts (ordered like ``modes``) and the collapsed,
    renormalized state of the remaining modes; the counted modes are
    consumed.  Patterns are visited in sorted order for reproducibility.
    """
    modes = tuple(modes)
    for m in modes:
        _check_mode(state, m)
    if len(set(modes)) != len(modes):
        raise ValueError("duplicate mode in measurement")
    if abs(state.norm_sq() - 1.0) > STATE_NORM_TOL:
        raise ValueError("input state must be normalized")
    if not modes:
        return (), state

    by_pattern: Dict[Tuple[int, ...], Dict[Occupation, complex]] = {}
    for occ, amp in state.items():
        pattern = tuple(occ[m] for m in modes)
        by_pattern.setdefault(pattern, {})[occ] = amp

    patterns = sorted(by_pattern)
    probs = [
        sum(abs(a) ** 2 for a in by_pattern[p].values()) for p in patterns
    ]
    u = float(rng.random())
    acc = 0.0
    chosen = patterns[-1]
    for pattern, prob in zip(patterns, probs):
        acc += prob
        if u < acc:
            chosen = pattern
            break
    sub = StateVector._raw(state.mode_count, state.n_max, dict(by_pattern[chosen]))
    collapsed = drop_modes(sub, modes)
    if collapsed.mode_count == 0:
        return chosen, StateVector._raw(0, state.n_max, {(): 1.0})
    return chosen, collapsed.normalized()
