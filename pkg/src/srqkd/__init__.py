"""Simulator for single-photon entanglement key distribution.

Exact truncated-Fock machinery for the shared one-photon two-arm state,
a linear-optics comparison device with its three-outcome POVM, the
six-term separability test with closed-form oracles, intercept-resend
interceptor channels, the full key distribution protocol over three
measurement backends, and a cavity-based deterministic readout variant.
"""

from .bell import (
    BellTerms,
    Convention,
    Ensemble,
    EveAtom,
    EveStrategy,
    EveTargets,
    IDENTITY_STRATEGY,
    InequalityVerdict,
    Party,
    ProjectorSetting,
    SValue,
    SettingTag,
    assemble_s,
    bell_terms,
    check_inequality,
    eve_channel,
    eve_pa_literal,
    expectation_value,
    number_setting,
    orthogonal_direction,
    s_closed_form,
    s_value,
    s_with_eve,
    superposition_direction,
    superposition_setting,
)
from .cavity import (
    AtomState,
    JCParams,
    FULL_TRANSFER_ANGLE,
    cavity_bell_terms,
    deterministic_measure,
    jc_evolve,
    make_joint_state,
    ramsey_rotation,
    transfer_shared_state,
)
from .device import (
    DeviceBranch,
    DeviceOutcome,
    DevicePOVM,
    OutcomeTag,
    ProbeState,
    SuperpositionCoeffs,
    analyze_device,
    classify_counts,
    device_povm,
    measure_device,
    probe_for_direction,
    sample_number_measurement,
)
from .fock import (
    DEFAULT_N_MAX,
    StateVector,
    TruncationOverflow,
    apply_annihilation,
    apply_creation,
    basis_state,
    fidelity,
    inner_product,
    make_vacuum,
    normalize,
    project_mode_number,
    project_mode_qubit,
    tensor,
)
from .optics import BeamSplitter, apply_beam_splitter, make_source_state
from .protocol import (
    Backend,
    ProtocolConfig,
    ProtocolResult,
    RoundOutcome,
    RoundRecord,
    Verdict,
    apply_loss,
    estimate_s,
    run_protocol,
)
from .rng import make_generator, round_uniforms

__version__ = "0.1.0"

__all__ = [
    "BellTerms",
    "Convention",
    "Ensemble",
    "EveAtom",
    "EveStrategy",
    "EveTargets",
    "IDENTITY_STRATEGY",
    "InequalityVerdict",
    "Party",
    "ProjectorSetting",
    "SValue",
    "SettingTag",
    "assemble_s",
    "bell_terms",
    "check_inequality",
    "eve_channel",
    "eve_pa_literal",
    "expectation_value",
    "number_setting",
    "orthogonal_direction",
    "s_closed_form",
    "s_value",
    "s_with_eve",
    "superposition_direction",
    "superposition_setting",
    "AtomState",
    "JCParams",
    "FULL_TRANSFER_ANGLE",
    "cavity_bell_terms",
    "deterministic_measure",
    "jc_evolve",
    "make_joint_state",
    "ramsey_rotation",
    "transfer_shared_state",
    "DeviceBranch",
    "DeviceOutcome",
    "DevicePOVM",
    "OutcomeTag",
    "ProbeState",
    "SuperpositionCoeffs",
    "analyze_device",
    "classify_counts",
    "device_povm",
    "measure_device",
    "probe_for_direction",
    "sample_number_measurement",
    "DEFAULT_N_MAX",
    "StateVector",
    "TruncationOverflow",
    "apply_annihilation",
    "apply_creation",
    "basis_state",
    "fidelity",
    "inner_product",
    "make_vacuum",
    "normalize",
    "project_mode_number",
    "project_mode_qubit",
    "tensor",
    "BeamSplitter",
    "apply_beam_splitter",
    "make_source_state",
    "Backend",
    "ProtocolConfig",
    "ProtocolResult",
    "RoundOutcome",
    "RoundRecord",
    "Verdict",
    "apply_loss",
    "estimate_s",
    "run_protocol",
    "make_generator",
    "round_uniforms",
    "__version__",
]
