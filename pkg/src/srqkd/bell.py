"""Projector algebra for the Peres-style separability test.

Works on the shared two-mode state (|1,0> - |0,1|)/sqrt(2).  Each party
measures either the one-photon number projector or a rank-1 projector onto
a superposition direction in its arm's {|0>, |1>} span.  The signed
six-term combination

    S = <QA'> + <QB'> - <QA' QB'> - <QA' QB> - <QA QB'> + <QA QB>

is non-negative for every mixture of product states, while the shared
state drives it to alpha^2 (1 - 2 beta^2), which is negative whenever
beta^2 > 1/2 (and alpha != 0).

Direction conventions
---------------------
The *operational* convention is the default everywhere: for parameters
(alpha, beta), party A projects onto (beta, alpha) and party B onto
(beta, -alpha).  These are the directions the comparison device actually
selects when its probe is loaded with (alpha, beta) resp. (alpha, -beta),
and the only reading under which the closed form above is reproduced.
The *literal* convention keeps the unswapped pairs and is available for
side-by-side reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from .device import NORM_TOL, SuperpositionCoeffs
from .fock import (
    StateVector,
    add,
    inner_product,
    project_mode_number,
    project_mode_qubit,
    scale,
)
from .optics import make_source_state

S_AGREEMENT_TOL = 1e-12
BOUNDARY_TOL = 1e-12
ENSEMBLE_PROB_EPS = 1e-14


class Party(Enum):
    A = "A"
    B = "B"


class SettingTag(Enum):
    NUMBER = "number"
    SUPERPOSITION = "superposition"


class Convention(Enum):
    OPERATIONAL = "operational"
    LITERAL = "literal"


class InequalityVerdict(Enum):
    SATISFIED = "Satisfied"
    VIOLATED_BELOW = "ViolatedBelow"
    VIOLATED_ABOVE = "ViolatedAbove"


@dataclass(frozen=True)
class ProjectorSetting:
    tag: SettingTag
    party: Party
    direction: Optional[SuperpositionCoeffs] = None

    def __post_init__(self):
        if self.tag is SettingTag.SUPERPOSITION and self.direction is None:
            raise ValueError("superposition setting needs a direction")
        if self.tag is SettingTag.NUMBER and self.direction is not None:
            raise ValueError("number setting takes no direction")


@dataclass(frozen=True)
class BellTerms:
    """The six expectation values entering S, in assembly order."""

    sup_a: float
    sup_b: float
    sup_sup: float
    sup_num: float
    num_sup: float
    num_num: float

    def as_tuple(self) -> Tuple[float, float, float, float, float, float]:
        return (self.sup_a, self.sup_b, self.sup_sup, self.sup_num, self.num_sup, self.num_num)


@dataclass(frozen=True)
class SValue:
    """Closed-form S together with the projector-oracle assembly of it."""

    s: float
    oracle: float


def _fix_phase(c0: complex, c1: complex) -> Tuple[complex, complex]:
    anchor = c0 if abs(c0) > NORM_TOL else c1
    phase = anchor.conjugate() / abs(anchor)
    return c0 * phase, c1 * phase


def _check_direction_pair(alpha: float, beta: float) -> None:
    if abs(alpha * alpha + beta * beta - 1.0) > 1e-9:
        raise ValueError("alpha^2 + beta^2 must equal 1")


def superposition_direction(
    party: Party, alpha: float, beta: float, convention: Convention = Convention.OPERATIONAL
) -> SuperpositionCoeffs:
    """Measurement direction for the given party and convention.

    Party B carries the sign flip of the shared-state test settings: its
    direction is the partner of alpha|0> - beta|1>.
    """
    _check_direction_pair(alpha, beta)
    if convention is Convention.OPERATIONAL:
        pair = (beta, alpha) if party is Party.A else (beta, -alpha)
    else:
        pair = (alpha, beta) if party is Party.A else (alpha, -beta)
    return SuperpositionCoeffs(*_fix_phase(*pair))


def number_setting(party: Party) -> ProjectorSetting:
    return ProjectorSetting(SettingTag.NUMBER, party)


def superposition_setting(
    party: Party, alpha: float, beta: float, convention: Convention = Convention.OPERATIONAL
) -> ProjectorSetting:
    return ProjectorSetting(
        SettingTag.SUPERPOSITION, party, superposition_direction(party, alpha, beta, convention)
    )


def _party_mode(party: Party) -> int:
    return 0 if party is Party.A else 1


def apply_setting(state: StateVector, setting: ProjectorSetting) -> StateVector:
    """Unnormalized projection of the two-arm state by one setting."""
    mode = _party_mode(setting.party)
    if setting.tag is SettingTag.NUMBER:
        return project_mode_number(state, mode, 1)
    d = setting.direction
    return project_mode_qubit(state, mode, d.c0, d.c1)


def expectation_value(
    state: StateVector,
    setting_a: Optional[ProjectorSetting],
    setting_b: Optional[ProjectorSetting],
) -> float:
    """<state| PI_A PI_B |state> with identity for a missing setting."""
    if setting_a is not None and setting_a.party is not Party.A:
        raise ValueError("first setting must belong to party A")
    if setting_b is not None and setting_b.party is not Party.B:
        raise ValueError("second setting must belong to party B")
    projected = state
    if setting_b is not None:
        projected = apply_setting(projected, setting_b)
    if setting_a is not None:
        projected = apply_setting(projected, setting_a)
    val = inner_product(state, projected)
    if abs(val.imag) > 1e-12:
        raise ArithmeticError(f"projector expectation has imaginary part {val.imag}")
    return val.real


def expectation_oracle(
    settings: Tuple[Optional[ProjectorSetting], Optional[ProjectorSetting]],
) -> float:
    """Exact expectation on the shared source state."""
    setting_a, setting_b = settings
    return expectation_value(make_source_state(), setting_a, setting_b)


def bell_terms(
    alpha: float,
    beta: float,
    state: Optional[StateVector] = None,
    convention: Convention = Convention.OPERATIONAL,
) -> BellTerms:
    """All six test-term expectations at the given settings."""
    if state is None:
        state = make_source_state()
    num_a = number_setting(Party.A)
    num_b = number_setting(Party.B)
    sup_a = superposition_setting(Party.A, alpha, beta, convention)
    sup_b = superposition_setting(Party.B, alpha, beta, convention)
    return BellTerms(
        sup_a=expectation_value(state, sup_a, None),
        sup_b=expectation_value(state, None, sup_b),
        sup_sup=expectation_value(state, sup_a, sup_b),
        sup_num=expectation_value(state, sup_a, num_b),
        num_sup=expectation_value(state, num_a, sup_b),
        num_num=expectation_value(state, num_a, num_b),
    )


def assemble_s(terms: BellTerms) -> float:
    return (
        terms.sup_a
        + terms.sup_b
        - terms.sup_sup
        - terms.sup_num
        - terms.num_sup
        + terms.num_num
    )


def s_closed_form(
    alpha: float, beta: float, convention: Convention = Convention.OPERATIONAL
) -> float:
    if convention is Convention.OPERATIONAL:
        return abs(alpha) ** 2 * (1.0 - 2.0 * abs(beta) ** 2)
    return abs(beta) ** 2 * (1.0 - 2.0 * abs(alpha) ** 2)


def s_value(
    alpha: float, beta: float, convention: Convention = Convention.OPERATIONAL
) -> SValue:
    """Closed-form S cross-checked against the projector oracle."""
    _check_direction_pair(alpha, beta)
    closed = s_closed_form(alpha, beta, convention)
    oracle = assemble_s(bell_terms(alpha, beta, convention=convention))
    if abs(closed - oracle) > S_AGREEMENT_TOL:
        raise ArithmeticError(
            f"closed form {closed} and oracle {oracle} disagree beyond {S_AGREEMENT_TOL}"
        )
    return SValue(s=closed, oracle=oracle)


def check_inequality(s: float) -> InequalityVerdict:
    """Classify S against the [0, 1] product-state band (1e-12 boundary slack)."""
    if s < -BOUNDARY_TOL:
        return InequalityVerdict.VIOLATED_BELOW
    if s > 1.0 + BOUNDARY_TOL:
        return InequalityVerdict.VIOLATED_ABOVE
    return InequalityVerdict.SATISFIED


class EveTargets(Enum):
    NONE = "none"
    ARM_A = "arm_A"
    ARM_B = "arm_B"
    BOTH = "both"


@dataclass(frozen=True)
class EveAtom:
    """One weighted intercept choice: a direction per targeted arm."""

    weight: float
    e_a: SuperpositionCoeffs
    e_b: SuperpositionCoeffs

    def __post_init__(self):
        if not (math.isfinite(self.weight) and self.weight >= 0.0):
            raise ValueError("atom weight must be a finite non-negative real")


@dataclass(frozen=True)
class EveStrategy:
    targets: EveTargets
    atoms: Tuple[EveAtom, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if self.targets is not EveTargets.NONE:
            if not self.atoms:
                raise ValueError("targeted strategy needs at least one atom")
            total = sum(a.weight for a in self.atoms)
            if abs(total - 1.0) > NORM_TOL:
                raise ValueError(f"atom weights sum to {total}, expected 1")


IDENTITY_STRATEGY = EveStrategy(EveTargets.NONE)


@dataclass(frozen=True)
class Ensemble:
    """Probability-weighted list of normalized post-channel states."""

    members: Tuple[Tuple[float, StateVector], ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        total = sum(p for p, _ in self.members)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"ensemble probabilities sum to {total}")


def orthogonal_direction(u: SuperpositionCoeffs) -> SuperpositionCoeffs:
    return SuperpositionCoeffs(u.c1.conjugate(), -u.c0.conjugate())


def _intercept_mode(
    branches: List[Tuple[float, StateVector]], mode: int, e: SuperpositionCoeffs
) -> List[Tuple[float, StateVector]]:
    out: List[Tuple[float, StateVector]] = []
    for prob, state in branches:
        kept = project_mode_qubit(state, mode, e.c0, e.c1)
        complement = add(state, scale(kept, -1.0))
        for branch in (kept, complement):
            p = branch.norm_sq()
            if p > ENSEMBLE_PROB_EPS:
                out.append((prob * p, branch.normalized()))
    return out


def eve_channel(strategy: EveStrategy, state: StateVector) -> Ensemble:
    """Intercept-resend channel: project-and-forward on each targeted arm.

    Each atom measures {|e><e|, 1 - |e><e|} on the arm's {|0>, |1>} span
    (amplitudes outside that span land in the complement outcome) and
    resends the collapse.  Members with vanishing probability are dropped.
    """
    if strategy.targets is EveTargets.NONE:
        return Ensemble(((1.0, state),))
    members: List[Tuple[float, StateVector]] = []
    for atom in strategy.atoms:
        if atom.weight <= ENSEMBLE_PROB_EPS:
            continue
        branches = [(1.0, state)]
        if strategy.targets in (EveTargets.ARM_A, EveTargets.BOTH):
            branches = _intercept_mode(branches, 0, atom.e_a)
        if strategy.targets in (EveTargets.ARM_B, EveTargets.BOTH):
            branches = _intercept_mode(branches, 1, atom.e_b)
        members.extend((atom.weight * p, s) for p, s in branches)
    return Ensemble(tuple(members))


def s_with_eve(
    strategy: EveStrategy,
    alpha: float,
    beta: float,
    convention: Convention = Convention.OPERATIONAL,
) -> float:
    """Exact S seen by the testing parties after the intercept channel."""
    ensemble = eve_channel(strategy, make_source_state())
    total = 0.0
    for prob, member in ensemble.members:
        total += prob * assemble_s(bell_terms(alpha, beta, state=member, convention=convention))
    return total


def eve_pa_literal(e_a: SuperpositionCoeffs, setting: ProjectorSetting) -> complex:
    """Literal operator product <phi| QA' P_e |phi> on arm A.

    This is the (generally complex, non-physical) diagnostic obtained by
    multiplying the party-A test projector with the interceptor's
    projector instead of composing the measurements; reported as data, not
    used by the detector.
    """
    if setting.party is not Party.A or setting.tag is not SettingTag.SUPERPOSITION:
        raise ValueError("expected a party-A superposition setting")
    state = make_source_state()
    step = project_mode_qubit(state, 0, e_a.c0, e_a.c1)
    step = apply_setting(step, setting)
    return inner_product(state, step)
