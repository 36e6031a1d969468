"""Comparison-device tests: POVM algebra, sampling, and collapse."""

import math

import numpy as np
import pytest

from srqkd.device import (
    DeviceOutcome,
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
from srqkd.fock import StateVector, fidelity
from srqkd.optics import make_source_state
from srqkd.rng import make_generator

SQRT3_2 = math.sqrt(3.0) / 2.0


def random_direction(rng):
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    z = z / np.linalg.norm(z)
    return SuperpositionCoeffs(complex(z[0]), complex(z[1]))


def arm_state(c0, c1):
    return StateVector(1, 2, {(0,): c0, (1,): c1})


def povm_vector(probe):
    plus = np.array([np.conj(probe.g1), np.conj(probe.g0)])
    minus = np.array([-np.conj(probe.g1), np.conj(probe.g0)])
    return plus, minus


def test_direction_and_probe_validation():
    with pytest.raises(ValueError):
        SuperpositionCoeffs(1.0, 1.0)
    with pytest.raises(ValueError):
        ProbeState(0.5, 0.5)
    with pytest.raises(ValueError):
        ProbeState(float("inf"), 0.0)


def test_probe_for_direction_worked_cases():
    p = probe_for_direction(SuperpositionCoeffs(1.0, 0.0))
    assert (p.g0, p.g1) == (0j, 1 + 0j)
    p = probe_for_direction(SuperpositionCoeffs(0.0, 1.0))
    assert (p.g0, p.g1) == (1 + 0j, 0j)
    p = probe_for_direction(SuperpositionCoeffs(0.5, SQRT3_2))
    assert p.g0 == pytest.approx(SQRT3_2)
    assert p.g1 == pytest.approx(0.5)
    # the phase fix keeps the leading component real and non-negative
    p = probe_for_direction(SuperpositionCoeffs(0.0, 1j))
    assert p.g0 == pytest.approx(1.0)
    assert p.g1 == pytest.approx(0.0)


def test_povm_frozen_matrices():
    povm = device_povm(ProbeState(0.0, 1.0))
    assert np.allclose(povm.e_plus, 0.5 * np.diag([1.0, 0.0]), atol=1e-15)
    assert np.allclose(povm.e_minus, 0.5 * np.diag([1.0, 0.0]), atol=1e-15)
    assert np.allclose(povm.e_inconclusive, np.diag([0.0, 1.0]), atol=1e-15)

    povm = device_povm(ProbeState(1.0, 0.0))
    assert np.allclose(povm.e_plus, 0.5 * np.diag([0.0, 1.0]), atol=1e-15)
    assert np.allclose(povm.e_inconclusive, np.diag([1.0, 0.0]), atol=1e-15)


def test_povm_completeness_and_weight():
    rng = np.random.default_rng(31)
    for _ in range(50):
        d = random_direction(rng)
        povm = device_povm(ProbeState(d.c0, d.c1))
        assert povm.completeness_deviation() < 1e-12
        assert np.trace(povm.e_plus).real == pytest.approx(0.5, abs=1e-12)
        assert np.trace(povm.e_minus).real == pytest.approx(0.5, abs=1e-12)
        # every effect is positive semidefinite
        for effect in (povm.e_plus, povm.e_minus, povm.e_inconclusive):
            eigs = np.linalg.eigvalsh(effect)
            assert eigs.min() > -1e-12


def test_branch_probabilities_match_povm():
    """The splitter simulation and the closed-form POVM must agree exactly."""
    rng = np.random.default_rng(37)
    for _ in range(40):
        direction = random_direction(rng)
        probe_dir = random_direction(rng)
        probe = ProbeState(probe_dir.c0, probe_dir.c1)
        state = arm_state(direction.c0, direction.c1)
        branches = {b.counts: b.probability for b in analyze_device(state, 0, probe)}
        povm = device_povm(probe)
        v = np.array([direction.c0, direction.c1])
        p_plus = float(np.real(v.conj() @ povm.e_plus @ v))
        p_minus = float(np.real(v.conj() @ povm.e_minus @ v))
        assert branches.get((1, 0), 0.0) == pytest.approx(p_plus, abs=1e-12)
        assert branches.get((0, 1), 0.0) == pytest.approx(p_minus, abs=1e-12)
        assert sum(branches.values()) == pytest.approx(1.0, abs=1e-12)
        # conclusive outcomes never exceed the post-selection weight
        assert p_plus <= 0.5 + 1e-12
        assert p_minus <= 0.5 + 1e-12


def test_matched_probe_projects_onto_direction():
    rng = np.random.default_rng(41)
    for _ in range(25):
        direction = random_direction(rng)
        probe = probe_for_direction(direction)
        hit = arm_state(direction.c0, direction.c1)
        branches = {b.counts: b.probability for b in analyze_device(hit, 0, probe)}
        assert branches[(1, 0)] == pytest.approx(0.5, abs=1e-12)
        miss = arm_state(-np.conj(direction.c1), np.conj(direction.c0))
        branches = {b.counts: b.probability for b in analyze_device(miss, 0, probe)}
        assert branches.get((1, 0), 0.0) == pytest.approx(0.0, abs=1e-12)


def test_equal_coefficient_probe_success_rate():
    # probe equal to the input coefficients: success probability 2|ab|^2,
    # which peaks at 1/2 for the balanced pair
    rng = np.random.default_rng(43)
    for _ in range(25):
        a = math.sin(rng.uniform(0.0, math.pi / 2.0))
        b = math.sqrt(1.0 - a * a)
        branches = {
            br.counts: br.probability
            for br in analyze_device(arm_state(a, b), 0, ProbeState(a, b))
        }
        assert branches.get((1, 0), 0.0) == pytest.approx(2.0 * (a * b) ** 2, abs=1e-12)
    inv = 1.0 / math.sqrt(2.0)
    branches = {
        br.counts: br.probability
        for br in analyze_device(arm_state(inv, inv), 0, ProbeState(inv, inv))
    }
    assert branches[(1, 0)] == pytest.approx(0.5, abs=1e-12)


def test_entangled_collapse_worked_case():
    """Plus on one arm of the shared state steers the other arm."""
    probe = ProbeState(0.5, SQRT3_2)
    branches = {b.counts: b for b in analyze_device(make_source_state(), 0, probe)}
    plus = branches[(1, 0)]
    assert plus.probability == pytest.approx(0.25, abs=1e-12)
    steered = StateVector(1, 2, {(0,): 0.5, (1,): -SQRT3_2})
    assert fidelity(plus.remainder, steered) > 1.0 - 1e-12
    minus = branches[(0, 1)]
    assert minus.probability == pytest.approx(0.25, abs=1e-12)


def test_collapse_matches_independent_projection():
    """Conclusive remainders equal the bra-contraction computed by hand."""
    rng = np.random.default_rng(47)
    for _ in range(30):
        psi = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        psi = psi / np.linalg.norm(psi)
        state = StateVector(
            2, 2, {(i, j): complex(psi[i, j]) for i in range(2) for j in range(2)}
        )
        probe_dir = random_direction(rng)
        probe = ProbeState(probe_dir.c0, probe_dir.c1)
        pi_plus, pi_minus = povm_vector(probe)
        by_counts = {b.counts: b for b in analyze_device(state, 0, probe)}
        for counts, pi in (((1, 0), pi_plus), ((0, 1), pi_minus)):
            expect = pi.conj() @ psi
            weight = float(np.linalg.norm(expect))
            if weight < 1e-7:
                continue
            oracle = StateVector(1, 2, {(0,): complex(expect[0]), (1,): complex(expect[1])})
            assert fidelity(by_counts[counts].remainder, oracle) > 1.0 - 1e-10


def test_measure_device_sampling_statistics():
    probe = ProbeState(0.5, SQRT3_2)
    rng = make_generator(123, 1)
    tallies = {OutcomeTag.PLUS: 0, OutcomeTag.MINUS: 0, OutcomeTag.INCONCLUSIVE: 0}
    draws = 4000
    for _ in range(draws):
        outcome, _ = measure_device(make_source_state(), 0, probe, rng)
        tallies[outcome.tag] += 1
    # Plus and Minus branches both sit at 1/4
    sigma = math.sqrt(0.25 * 0.75 / draws)
    assert abs(tallies[OutcomeTag.PLUS] / draws - 0.25) < 5 * sigma
    assert abs(tallies[OutcomeTag.MINUS] / draws - 0.25) < 5 * sigma


def test_measure_device_is_deterministic_per_stream():
    probe = ProbeState(0.5, SQRT3_2)
    a = [measure_device(make_source_state(), 0, probe, make_generator(9, i))[0] for i in range(20)]
    b = [measure_device(make_source_state(), 0, probe, make_generator(9, i))[0] for i in range(20)]
    assert a == b


def test_device_input_validation():
    probe = ProbeState(1.0, 0.0)
    with pytest.raises(ValueError):
        analyze_device(StateVector(1, 2, {(2,): 1.0}), 0, probe)
    with pytest.raises(ValueError):
        analyze_device(StateVector(1, 2, {(0,): 0.5}), 0, probe)
    with pytest.raises(ValueError):
        analyze_device(make_source_state(), 5, probe)


def test_classify_counts_table():
    assert classify_counts((1, 0)) is OutcomeTag.PLUS
    assert classify_counts((0, 1)) is OutcomeTag.MINUS
    for pattern in ((0, 0), (1, 1), (2, 0), (0, 2)):
        assert classify_counts(pattern) is OutcomeTag.INCONCLUSIVE


def test_outcome_carries_true_counts():
    probe = ProbeState(0.5, SQRT3_2)
    outcome, _ = measure_device(make_source_state(), 0, probe, make_generator(2, 0))
    assert isinstance(outcome, DeviceOutcome)
    assert classify_counts(outcome.detector_counts) is outcome.tag


def test_number_sampling_statistics_and_collapse():
    rng = make_generator(77, 0)
    counts = {}
    draws = 4000
    for _ in range(draws):
        pattern, collapsed = sample_number_measurement(make_source_state(), (0,), rng)
        counts[pattern] = counts.get(pattern, 0) + 1
        if pattern == (1,):
            # Alice holds the photon: Bob's arm collapses to vacuum
            assert abs(collapsed.amplitude((0,))) == pytest.approx(1.0, abs=1e-12)
        else:
            assert abs(collapsed.amplitude((1,))) == pytest.approx(1.0, abs=1e-12)
    sigma = math.sqrt(0.25 / draws)
    assert abs(counts[(1,)] / draws - 0.5) < 5 * sigma


def test_number_sampling_consumes_all_modes():
    pattern, rest = sample_number_measurement(make_source_state(), (0, 1), make_generator(3, 1))
    assert sorted(pattern) == [0, 1]
    assert rest.mode_count == 0
    with pytest.raises(ValueError):
        sample_number_measurement(make_source_state(), (0, 0), make_generator(3, 2))
