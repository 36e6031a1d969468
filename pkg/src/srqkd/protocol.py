"""Round-by-round key distribution over the shared one-photon state.

Each round a fresh copy of the shared state (optionally routed through an
interceptor channel) is measured independently by both parties, each
choosing uniformly between the photon-number setting and its superposition
setting.  Rounds where both chose Number carry the anti-correlated raw key
(the receiving party inverts its record); every other round, plus a
configurable sacrificed fraction of the Number/Number rounds, feeds the
six-term separability estimator, whose deviation from the analytic value
drives the verdict.

Three measurement backends share the loop:

* ``IDEAL``    - exact two-outcome projective measurements,
* ``DEVICE``   - the linear-optics comparison device (three outcomes; the
  conclusive ones carry POVM weight 1/2, so the estimator rescales by 2
  for marginal and mixed terms and by 4 for the joint superposition term),
* ``CAVITY``   - photon-to-atom transfer followed by deterministic Ramsey
  readout (two outcomes, like IDEAL).

The loop never simulates optics per round: the exact outcome distribution
for each (channel member, setting pair) is precomputed once with the Fock
machinery, and rounds are drawn from those tables using the counter-based
streams documented in :mod:`srqkd.rng`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bell import (
    Convention,
    EveStrategy,
    IDENTITY_STRATEGY,
    Party,
    SettingTag,
    assemble_s,
    bell_terms,
    eve_channel,
    orthogonal_direction,
    superposition_direction,
    _check_direction_pair,
)
from .cavity import ATOM_MODE, transfer_shared_state, _measurement_image
from .device import (
    DeviceOutcome,
    OutcomeTag,
    SuperpositionCoeffs,
    analyze_device,
    classify_counts,
    probe_for_direction,
)
from .fock import StateVector, drop_modes, overlap_mode_qubit, project_mode_number
from .optics import make_source_state
from .rng import PARTY_ALICE, PARTY_BOB, PARTY_SHARED, round_uniforms

_BRANCH_EPS = 1e-14


class Backend(Enum):
    IDEAL = "ideal"
    DEVICE = "device"
    CAVITY = "cavity"


class RoundOutcome(Enum):
    CLICK = "click"
    NO_CLICK = "no_click"
    PLUS = "plus"
    MINUS = "minus"
    INCONCLUSIVE = "inconclusive"


class Verdict(Enum):
    SECURE = "Secure"
    EVE_DETECTED = "EveDetected"
    INSUFFICIENT_DATA = "InsufficientData"


@dataclass(frozen=True)
class ProtocolConfig:
    rounds: int
    seed: int
    alpha: float = 0.5
    beta: float = math.sqrt(3.0) / 2.0
    eta: float = 1.0
    backend: Backend = Backend.IDEAL
    eve: EveStrategy = IDENTITY_STRATEGY
    bell_sample_fraction: float = 0.5
    convention: Convention = Convention.OPERATIONAL
    detection_sigma: float = 4.0
    min_cell_samples: int = 10
    run_index: int = 0

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit word")
        _check_direction_pair(self.alpha, self.beta)
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")
        if not 0.0 < self.bell_sample_fraction <= 1.0:
            raise ValueError("bell_sample_fraction must lie in (0, 1]")
        if not (math.isfinite(self.detection_sigma) and self.detection_sigma > 0):
            raise ValueError("detection_sigma must be positive")
        if self.min_cell_samples < 1:
            raise ValueError("min_cell_samples must be at least 1")
        if self.run_index < 0:
            raise ValueError("run_index must be non-negative")


@dataclass(frozen=True, slots=True)
class RoundRecord:
    round_id: int
    alice_setting: SettingTag
    bob_setting: SettingTag
    alice_outcome: RoundOutcome
    bob_outcome: RoundOutcome
    alice_lost: bool
    bob_lost: bool


@dataclass(frozen=True)
class ProtocolResult:
    sifted_key_alice: str
    sifted_key_bob: str
    sift_fraction: float
    s_estimate: float
    s_stderr: float
    verdict: Verdict
    s_reference: float
    key_disagreement_rate: Optional[float]
    rounds: int
    key_length: int
    cell_counts: Dict[str, int]


# ---------------------------------------------------------------------------
# Detector loss


def _thin_count(n: int, eta: float, uniforms: Sequence[float]) -> int:
    """Keep each of up to two photons independently with probability eta."""
    if eta >= 1.0 or n == 0:
        return n
    if n > len(uniforms):
        raise ValueError("not enough loss draws for the photon count")
    return sum(1 for i in range(n) if uniforms[i] < eta)


def apply_loss(outcome, eta: float, rng: np.random.Generator):
    """Detector inefficiency applied to one observed outcome.

    Each real photon is missed independently with probability 1 - eta:
    Click outcomes may demote to NoClick, and device detector counts are
    thinned before reclassification.  Plus/Minus outcomes of projective
    readouts carry no photon-counting record and pass through unchanged.
    eta = 1 is the identity.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    if isinstance(outcome, DeviceOutcome):
        ca, cb = outcome.detector_counts
        draws = [float(rng.random()) for _ in range(ca + cb)]
        ka = _thin_count(ca, eta, draws[:ca])
        kb = _thin_count(cb, eta, draws[ca:])
        return DeviceOutcome(classify_counts((ka, kb)), (ka, kb))
    if outcome is RoundOutcome.CLICK:
        if eta < 1.0 and float(rng.random()) >= eta:
            return RoundOutcome.NO_CLICK
        return RoundOutcome.CLICK
    if isinstance(outcome, RoundOutcome):
        return outcome
    raise TypeError(f"unsupported outcome {outcome!r}")


# ---------------------------------------------------------------------------
# Per-(member, setting) outcome tables

# Branch kinds decide how eta and the record outcome apply to a label:
#   "number"     label = true photon (or atom-click) count, loss thins it
#   "device"     label = true detector count pair, loss thins both
#   "projective" label = OutcomeTag.PLUS/MINUS, loss does not apply
_KIND_NUMBER = "number"
_KIND_DEVICE = "device"
_KIND_PROJECTIVE = "projective"


def _number_branches(state: StateVector, mode: int) -> List[Tuple[object, str, float, StateVector]]:
    out = []
    for n in range(state.n_max + 1):
        sub = project_mode_number(state, mode, n)
        p = sub.norm_sq()
        if p > _BRANCH_EPS:
            out.append((n, _KIND_NUMBER, p, drop_modes(sub, (mode,)).normalized()))
    return out


def _projective_branches(
    state: StateVector, mode: int, direction: SuperpositionCoeffs
) -> List[Tuple[object, str, float, StateVector]]:
    for occ in state.amplitudes:
        if occ[mode] > 1:
            raise ValueError("projective setting requires at most one photon in the arm")
    orth = orthogonal_direction(direction)
    out = []
    for tag, d in ((OutcomeTag.PLUS, direction), (OutcomeTag.MINUS, orth)):
        rest = overlap_mode_qubit(state, mode, d.c0, d.c1)
        p = rest.norm_sq()
        if p > _BRANCH_EPS:
            out.append((tag, _KIND_PROJECTIVE, p, rest.normalized()))
    return out


def _device_branches(
    state: StateVector, mode: int, direction: SuperpositionCoeffs
) -> List[Tuple[object, str, float, StateVector]]:
    probe = probe_for_direction(direction)
    return [
        (b.counts, _KIND_DEVICE, b.probability, b.remainder)
        for b in analyze_device(state, mode, probe)
    ]


def _cavity_branches(
    joint: StateVector, party: Party, tag: SettingTag, direction: SuperpositionCoeffs
) -> List[Tuple[object, str, float, StateVector]]:
    mode = ATOM_MODE[party]
    if tag is SettingTag.NUMBER:
        out = []
        for n in (0, 1):
            sub = project_mode_number(joint, mode, n)
            p = sub.norm_sq()
            if p > _BRANCH_EPS:
                out.append((n, _KIND_NUMBER, p, sub.normalized()))
        return out
    from .fock import add, project_mode_qubit, scale

    c0, c1 = _measurement_image(direction)
    plus = project_mode_qubit(joint, mode, c0, c1)
    minus = add(joint, scale(plus, -1.0))
    out = []
    for label, branch in ((OutcomeTag.PLUS, plus), (OutcomeTag.MINUS, minus)):
        p = branch.norm_sq()
        if p > _BRANCH_EPS:
            out.append((label, _KIND_PROJECTIVE, p, branch.normalized()))
    return out


def _party_branches(
    state: StateVector,
    backend: Backend,
    party: Party,
    tag: SettingTag,
    direction: SuperpositionCoeffs,
    mode: int,
) -> List[Tuple[object, str, float, StateVector]]:
    if backend is Backend.CAVITY:
        return _cavity_branches(state, party, tag, direction)
    if tag is SettingTag.NUMBER:
        return _number_branches(state, mode)
    if backend is Backend.DEVICE:
        return _device_branches(state, mode, direction)
    return _projective_branches(state, mode, direction)


def _cumulative(branches):
    acc = 0.0
    out = []
    for label, kind, p, child in branches:
        acc += p
        out.append((acc, label, kind, child))
    if abs(acc - 1.0) > 1e-9:
        raise ArithmeticError(f"branch probabilities sum to {acc}")
    return out


def _pick(cum_branches, u: float):
    for entry in cum_branches:
        if u < entry[0]:
            return entry
    return cum_branches[-1]


def _build_tables(config: ProtocolConfig):
    """Exact joint outcome tables per channel member and setting pair."""
    source = make_source_state()
    ensemble = eve_channel(config.eve, source)
    dir_a = superposition_direction(Party.A, config.alpha, config.beta, config.convention)
    dir_b = superposition_direction(Party.B, config.alpha, config.beta, config.convention)

    member_probs = [p for p, _ in ensemble.members]
    tables = []
    for _, member in ensemble.members:
        root = transfer_shared_state(member) if config.backend is Backend.CAVITY else member
        alice_mode = ATOM_MODE[Party.A] if config.backend is Backend.CAVITY else 0
        per_pair = {}
        for sa in (SettingTag.NUMBER, SettingTag.SUPERPOSITION):
            a_branches = _party_branches(root, config.backend, Party.A, sa, dir_a, alice_mode)
            for sb in (SettingTag.NUMBER, SettingTag.SUPERPOSITION):
                entries = []
                for a_label, a_kind, p_a, collapsed in a_branches:
                    if config.backend is Backend.CAVITY:
                        bob_mode = ATOM_MODE[Party.B]
                    else:
                        bob_mode = 0  # Alice's arm was consumed, Bob's is what remains
                    b_branches = _party_branches(
                        collapsed, config.backend, Party.B, sb, dir_b, bob_mode
                    )
                    bob_cum = tuple(
                        (cum, label, kind) for cum, label, kind, _ in _cumulative(b_branches)
                    )
                    entries.append((p_a, a_label, a_kind, bob_cum))
                acc = 0.0
                cum_entries = []
                for p_a, a_label, a_kind, bob_cum in entries:
                    acc += p_a
                    cum_entries.append((acc, a_label, a_kind, bob_cum))
                if abs(acc - 1.0) > 1e-9:
                    raise ArithmeticError(f"alice branch probabilities sum to {acc}")
                per_pair[(sa, sb)] = tuple(cum_entries)
        tables.append(per_pair)
    return member_probs, tables


def _observe(label, kind, eta: float, u2: float, u3: float) -> Tuple[RoundOutcome, bool]:
    """True branch label -> recorded outcome after detector loss."""
    if kind == _KIND_PROJECTIVE:
        return (RoundOutcome.PLUS if label is OutcomeTag.PLUS else RoundOutcome.MINUS), False
    if kind == _KIND_NUMBER:
        kept = _thin_count(label, eta, (u2, u3))
        return (RoundOutcome.CLICK if kept >= 1 else RoundOutcome.NO_CLICK), kept < label
    ca, cb = label
    draws = (u2, u3)
    ka = _thin_count(ca, eta, draws[:ca])
    kb = _thin_count(cb, eta, draws[ca : ca + cb])
    tag = classify_counts((ka, kb))
    return RoundOutcome(tag.value), (ka + kb) < (ca + cb)


# ---------------------------------------------------------------------------
# Estimator

_CELL_NAMES = ("sup_a", "sup_b", "sup_sup", "sup_num", "num_sup", "num_num")

_SCALES = {
    Backend.IDEAL: (1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
    Backend.CAVITY: (1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
    # Conclusive device outcomes carry POVM weight 1/2 per superposition
    # measurement, so frequencies under-count by 2 per superposition party.
    Backend.DEVICE: (2.0, 2.0, 4.0, 2.0, 2.0, 1.0),
}


def _estimate_cells(records: Sequence[RoundRecord], backend: Backend):
    hits = [0, 0, 0, 0, 0, 0]
    counts = [0, 0, 0, 0, 0, 0]
    for rec in records:
        a_sup = rec.alice_setting is SettingTag.SUPERPOSITION
        b_sup = rec.bob_setting is SettingTag.SUPERPOSITION
        a_hit = rec.alice_outcome is (RoundOutcome.PLUS if a_sup else RoundOutcome.CLICK)
        b_hit = rec.bob_outcome is (RoundOutcome.PLUS if b_sup else RoundOutcome.CLICK)
        if a_sup:
            counts[0] += 1
            hits[0] += a_hit
        if b_sup:
            counts[1] += 1
            hits[1] += b_hit
        idx = 2 if (a_sup and b_sup) else 3 if a_sup else 4 if b_sup else 5
        counts[idx] += 1
        hits[idx] += a_hit and b_hit
    scales = _SCALES[backend]
    terms = []
    variance = 0.0
    for i in range(6):
        if counts[i] == 0:
            terms.append(0.0)
            continue
        p = hits[i] / counts[i]
        terms.append(scales[i] * p)
        variance += scales[i] ** 2 * p * (1.0 - p) / counts[i]
    s = terms[0] + terms[1] - terms[2] - terms[3] - terms[4] + terms[5]
    cells = dict(zip(_CELL_NAMES, counts))
    return s, math.sqrt(variance), cells


def estimate_s(
    records: Sequence[RoundRecord],
    alpha: float,
    beta: float,
    backend: Backend = Backend.IDEAL,
) -> Tuple[float, float]:
    """Six-term S estimate and its binomial standard error.

    Marginal superposition terms use every round where that party chose the
    superposition setting; joint terms use the matching setting-pair cells.
    Inconclusive device outcomes stay in the denominators (they are simply
    not hits), which together with the x2/x4 device scalings keeps the
    estimator unbiased.  alpha/beta are validated for interface symmetry
    with the analytic routines; the estimate itself is setting-free.
    """
    _check_direction_pair(alpha, beta)
    if not records:
        raise ValueError("no records to estimate from")
    s, stderr, cells = _estimate_cells(records, backend)
    empty = [name for name, n in cells.items() if n == 0]
    if empty:
        raise ValueError(f"empty estimator cells: {', '.join(empty)}")
    return s, stderr


# ---------------------------------------------------------------------------
# Protocol loop


def run_protocol(config: ProtocolConfig) -> Tuple[ProtocolResult, List[RoundRecord]]:
    """Execute the full protocol; returns the summary and the transcript.

    Deterministic: the transcript is a pure function of the config (seed
    and run_index included).  See :mod:`srqkd.rng` for the stream layout.
    """
    member_probs, tables = _build_tables(config)
    member_cum = np.cumsum(member_probs)

    ua = round_uniforms(config.seed, config.run_index, PARTY_ALICE, config.rounds)
    ub = round_uniforms(config.seed, config.run_index, PARTY_BOB, config.rounds)
    us = round_uniforms(config.seed, config.run_index, PARTY_SHARED, config.rounds)

    members = np.minimum(
        np.searchsorted(member_cum, us[:, 0], side="right"), len(member_probs) - 1
    ).tolist()
    a_sup = (ua[:, 0] >= 0.5).tolist()
    b_sup = (ub[:, 0] >= 0.5).tolist()
    a_draw = ua[:, 1].tolist()
    b_draw = ub[:, 1].tolist()
    sacrifice = (us[:, 1] < config.bell_sample_fraction).tolist()
    lossy = config.eta < 1.0
    if lossy:
        a_loss = ua[:, 2:4].tolist()
        b_loss = ub[:, 2:4].tolist()

    records: List[RoundRecord] = []
    bell_records: List[RoundRecord] = []
    key_a: List[str] = []
    key_b: List[str] = []
    disagreements = 0
    sift_count = 0
    eta = config.eta

    for r in range(config.rounds):
        sa = SettingTag.SUPERPOSITION if a_sup[r] else SettingTag.NUMBER
        sb = SettingTag.SUPERPOSITION if b_sup[r] else SettingTag.NUMBER
        entries = tables[members[r]][(sa, sb)]
        _, a_label, a_kind, bob_cum = _pick(entries, a_draw[r])
        _, b_label, b_kind = _pick(bob_cum, b_draw[r])
        if lossy:
            la, lb = a_loss[r], b_loss[r]
            a_out, a_lost = _observe(a_label, a_kind, eta, la[0], la[1])
            b_out, b_lost = _observe(b_label, b_kind, eta, lb[0], lb[1])
        else:
            a_out, a_lost = _observe(a_label, a_kind, 1.0, 0.0, 0.0)
            b_out, b_lost = _observe(b_label, b_kind, 1.0, 0.0, 0.0)
        rec = RoundRecord(r, sa, sb, a_out, b_out, a_lost, b_lost)
        records.append(rec)
        if sa is SettingTag.NUMBER and sb is SettingTag.NUMBER:
            sift_count += 1
            if sacrifice[r]:
                bell_records.append(rec)
            else:
                bit_a = "1" if a_out is RoundOutcome.CLICK else "0"
                # Anti-correlated arms: the receiver inverts its record.
                bit_b = "0" if b_out is RoundOutcome.CLICK else "1"
                key_a.append(bit_a)
                key_b.append(bit_b)
                disagreements += bit_a != bit_b
        else:
            bell_records.append(rec)

    s_estimate, s_stderr, cells = (
        _estimate_cells(bell_records, config.backend) if bell_records else (0.0, 0.0, dict.fromkeys(_CELL_NAMES, 0))
    )
    s_reference = assemble_s(
        bell_terms(config.alpha, config.beta, convention=config.convention)
    )

    if min(cells.values()) < config.min_cell_samples:
        verdict = Verdict.INSUFFICIENT_DATA
    elif abs(s_estimate - s_reference) > config.detection_sigma * s_stderr:
        verdict = Verdict.EVE_DETECTED
    else:
        verdict = Verdict.SECURE

    key_length = len(key_a)
    result = ProtocolResult(
        sifted_key_alice="".join(key_a),
        sifted_key_bob="".join(key_b),
        sift_fraction=sift_count / config.rounds,
        s_estimate=s_estimate,
        s_stderr=s_stderr,
        verdict=verdict,
        s_reference=s_reference,
        key_disagreement_rate=(disagreements / key_length) if key_length else None,
        rounds=config.rounds,
        key_length=key_length,
        cell_counts=cells,
    )
    return result, records
