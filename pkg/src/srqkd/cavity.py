"""Deterministic cavity-QED variant: photon-to-atom transfer plus Ramsey readout.

Each arm's photon mode feeds a cavity holding one two-level atom on
resonance.  The interaction swaps excitation between photon and atom; at
interaction angle lambda*t = pi/2 a one-photon arm state transfers
completely onto the atom (|g,1> -> -i |e,0>), so the shared two-arm state
becomes atom-atom entanglement and the subsequent atom detection is
deterministic - there is no inconclusive outcome.

Mode layout of the joint state: (photon A, photon B, atom A, atom B),
with atom occupation 0 = ground, 1 = excited.

Phase convention: the transfer tags each excitation with -i.  The Ramsey
pulse in :func:`deterministic_measure` is phased to absorb that factor,
i.e. "measure direction (c0, c1)" projects the atom onto c0|g> - i c1|e>,
the transfer image of the photonic direction.  Every expectation on the
transferred shared state is insensitive to this choice (the -i is global
there); for product inputs it keeps the atom statistics exactly equal to
the photonic ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .bell import BellTerms, Convention, Party, superposition_direction
from .device import NORM_TOL, OutcomeTag, SuperpositionCoeffs, _check_pair_normalized
from .fock import (
    Occupation,
    PRUNE_EPS,
    StateVector,
    TruncationOverflow,
    add,
    project_mode_number,
    project_mode_qubit,
    scale,
    tensor,
)
from .optics import make_source_state

PHOTON_MODE = {Party.A: 0, Party.B: 1}
ATOM_MODE = {Party.A: 2, Party.B: 3}

FULL_TRANSFER_ANGLE = math.pi / 2


@dataclass(frozen=True)
class AtomState:
    """Normalized two-level atom amplitude pair (ground, excited)."""

    cg: complex
    ce: complex

    def __post_init__(self):
        cg, ce = _check_pair_normalized(self.cg, self.ce, "atom state")
        object.__setattr__(self, "cg", cg)
        object.__setattr__(self, "ce", ce)


@dataclass(frozen=True)
class JCParams:
    """Dimensionless interaction angle lambda * t of the resonant coupling."""

    lambda_t: float

    def __post_init__(self):
        if not (math.isfinite(self.lambda_t) and self.lambda_t >= 0.0):
            raise ValueError("lambda_t must be a finite non-negative real")


def make_joint_state(photon_pair: StateVector) -> StateVector:
    """Append both atoms in the ground state to a two-mode photon state."""
    if photon_pair.mode_count != 2:
        raise ValueError("expected a two-mode photon state")
    atoms = StateVector(2, photon_pair.n_max, {(0, 0): 1.0})
    return tensor(photon_pair, atoms)


def jc_evolve(joint: StateVector, cavity: Party, params: JCParams) -> StateVector:
    """Exact resonant evolution of one cavity for an angle lambda*t.

    Each excitation-conserving pair {|g, n+1>, |e, n>} rotates by
    sqrt(n+1) * lambda_t:

        |g, n+1> -> cos(theta)|g, n+1> - i sin(theta)|e, n>
        |e, n>   -> cos(theta)|e, n>   - i sin(theta)|g, n+1>

    and |g, 0> is stationary.
    """
    if joint.mode_count != 4:
        raise ValueError("expected the four-mode joint layout")
    pm, am = PHOTON_MODE[cavity], ATOM_MODE[cavity]
    lt = params.lambda_t
    out: Dict[Occupation, complex] = {}

    def accumulate(occ: Occupation, value: complex) -> None:
        out[occ] = out.get(occ, 0j) + value

    for occ, amp in joint.items():
        n_ph, n_at = occ[pm], occ[am]
        if n_at > 1:
            raise ValueError("atom mode occupation above 1")
        if n_at == 0:
            if n_ph == 0:
                accumulate(occ, amp)
                continue
            theta = math.sqrt(n_ph) * lt
            accumulate(occ, amp * math.cos(theta))
            partner = list(occ)
            partner[pm] = n_ph - 1
            partner[am] = 1
            accumulate(tuple(partner), -1j * math.sin(theta) * amp)
        else:
            theta = math.sqrt(n_ph + 1) * lt
            sin_part = -1j * math.sin(theta) * amp
            if n_ph + 1 > joint.n_max and abs(sin_part) > PRUNE_EPS:
                raise TruncationOverflow(
                    f"cavity swap would populate photon level {n_ph + 1} > n_max={joint.n_max}"
                )
            accumulate(occ, amp * math.cos(theta))
            partner = list(occ)
            partner[pm] = n_ph + 1
            partner[am] = 0
            accumulate(tuple(partner), sin_part)
    return StateVector._raw(joint.mode_count, joint.n_max, out)


def transfer_shared_state(photon_pair: StateVector) -> StateVector:
    """Run both cavities at the full-transfer angle pi/2."""
    joint = make_joint_state(photon_pair)
    half = JCParams(FULL_TRANSFER_ANGLE)
    return jc_evolve(jc_evolve(joint, Party.A, half), Party.B, half)


def ramsey_rotation(atom: AtomState, direction: SuperpositionCoeffs) -> AtomState:
    """Unitary pulse mapping the direction to |e> and its partner to |g>."""
    d0, d1 = direction.c0, direction.c1
    # Orthogonal partner (conj(c1), -conj(c0)); this choice makes the pulse
    # for direction (0, 1) the exact identity.
    out_e = d0.conjugate() * atom.cg + d1.conjugate() * atom.ce
    out_g = d1 * atom.cg - d0 * atom.ce
    return AtomState(out_g, out_e)


def _measurement_image(direction: SuperpositionCoeffs) -> Tuple[complex, complex]:
    return direction.c0, -1j * direction.c1


def _project_atom_setting(
    joint: StateVector, party: Party, direction: Optional[SuperpositionCoeffs] = None
) -> StateVector:
    am = ATOM_MODE[party]
    if direction is None:
        return project_mode_number(joint, am, 1)
    return project_mode_qubit(joint, am, *_measurement_image(direction))


def cavity_bell_terms(
    alpha: float, beta: float, convention: Convention = Convention.OPERATIONAL
) -> BellTerms:
    """Six test-term expectations read off the transferred atom pair.

    Exact atom-side counterpart of the photonic oracle: each term is the
    squared norm of the corresponding projector chain (atom excitation for
    the number settings, the transfer image of the party's direction for
    the superposition settings) acting on the pi/2 transferred shared
    state.
    """
    joint = transfer_shared_state(make_source_state())
    dir_a = superposition_direction(Party.A, alpha, beta, convention)
    dir_b = superposition_direction(Party.B, alpha, beta, convention)

    def term(dir_or_none_a, dir_or_none_b) -> float:
        step = _project_atom_setting(joint, Party.A, dir_or_none_a)
        step = _project_atom_setting(step, Party.B, dir_or_none_b)
        return step.norm_sq()

    return BellTerms(
        sup_a=_project_atom_setting(joint, Party.A, dir_a).norm_sq(),
        sup_b=_project_atom_setting(joint, Party.B, dir_b).norm_sq(),
        sup_sup=term(dir_a, dir_b),
        sup_num=term(dir_a, None),
        num_sup=term(None, dir_b),
        num_num=term(None, None),
    )


def deterministic_measure(
    joint: StateVector,
    party: Party,
    direction: SuperpositionCoeffs,
    rng: np.random.Generator,
) -> Tuple[OutcomeTag, StateVector]:
    """Two-outcome Ramsey-plus-ionization readout of one party's atom.

    Projects the atom onto the transfer image of the requested photonic
    direction (Plus) or its complement (Minus); never inconclusive.  The
    returned joint state keeps all four modes, with the atom collapsed.
    """
    if abs(joint.norm_sq() - 1.0) > 1e-9:
        raise ValueError("joint state must be normalized")
    am = ATOM_MODE[party]
    c0, c1 = _measurement_image(direction)
    plus = project_mode_qubit(joint, am, c0, c1)
    minus = add(joint, scale(plus, -1.0))
    p_plus = plus.norm_sq()
    u = float(rng.random())
    if u < p_plus:
        return OutcomeTag.PLUS, plus.normalized()
    return OutcomeTag.MINUS, minus.normalized()
