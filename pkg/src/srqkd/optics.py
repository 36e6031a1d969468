"""Lossless beam splitters acting on truncated Fock states.

A splitter with reflectivity R substitutes the input creation operators

    a_dag -> sqrt(R) a'_dag - sqrt(1-R) b'_dag
    b_dag -> sqrt(1-R) a'_dag + sqrt(R) b'_dag

where ``port_a`` is the input on the coated ("black") side, whose
transmitted beam picks up the sign flip.  The substitution is expanded
exactly with binomial coefficients, so multi-photon inputs interfere
correctly and total photon number is preserved by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict

from .fock import (
    DEFAULT_N_MAX,
    PRUNE_EPS,
    Occupation,
    StateVector,
    TruncationOverflow,
    apply_creation,
    make_vacuum,
    _check_mode,
)


@dataclass(frozen=True)
class BeamSplitter:
    """Reflectivity plus the two coupled mode indices."""

    reflectivity: float
    port_a: int
    port_b: int

    def __post_init__(self):
        if not 0.0 <= self.reflectivity <= 1.0:
            raise ValueError(f"reflectivity {self.reflectivity} outside [0, 1]")
        if self.port_a < 0 or self.port_b < 0:
            raise ValueError("port indices must be non-negative")
        if self.port_a == self.port_b:
            raise ValueError("ports must be distinct")

    def inverse(self) -> "BeamSplitter":
        """Same element traversed backwards: ports swapped, same reflectivity."""
        return BeamSplitter(self.reflectivity, self.port_b, self.port_a)


def apply_beam_splitter(state: StateVector, splitter: BeamSplitter) -> StateVector:
    """Exact unitary action of the splitter on the two coupled modes."""
    pa, pb = splitter.port_a, splitter.port_b
    _check_mode(state, pa)
    _check_mode(state, pb)
    r = splitter.reflectivity
    taa = math.sqrt(r)
    tab = -math.sqrt(1.0 - r)
    tba = math.sqrt(1.0 - r)
    tbb = math.sqrt(r)

    out: Dict[Occupation, complex] = {}
    for occ, amp in state.items():
        na, nb = occ[pa], occ[pb]
        if na == 0 and nb == 0:
            out[occ] = out.get(occ, 0j) + amp
            continue
        total = na + nb
        base = math.sqrt(math.factorial(na) * math.factorial(nb))
        for p in range(total + 1):
            q = total - p
            coeff = 0.0
            for j in range(max(0, p - nb), min(na, p) + 1):
                k = p - j
                coeff += (
                    math.comb(na, j)
                    * math.comb(nb, k)
                    * taa**j
                    * tab ** (na - j)
                    * tba**k
                    * tbb ** (nb - k)
                )
            if coeff == 0.0:
                continue
            weight = amp * coeff * math.sqrt(math.factorial(p) * math.factorial(q)) / base
            if abs(weight) <= PRUNE_EPS:
                continue
            if p > state.n_max or q > state.n_max:
                raise TruncationOverflow(
                    f"splitter output |{p},{q}> exceeds n_max={state.n_max}"
                )
            new = list(occ)
            new[pa] = p
            new[pb] = q
            key = tuple(new)
            out[key] = out.get(key, 0j) + weight
    return StateVector._raw(state.mode_count, state.n_max, out)


def make_source_state(n_max: int = DEFAULT_N_MAX) -> StateVector:
    """Shared two-mode state: one photon split on a balanced coupler.

    The photon enters the sign-flip port, so the output is
    (|1,0> - |0,1>) / sqrt(2) over (arm A, arm B).
    """
    photon = apply_creation(make_vacuum(2, n_max), 0)
    return apply_beam_splitter(photon, BeamSplitter(0.5, port_a=0, port_b=1))
