"""Tests for Bell basis construction, decomposition and projective measurement."""

import numpy as np
import pytest

from helpers import random_beam, random_ket
from spinport.bellkit import (
    BELL_ORDER,
    BellLabel,
    ZeroProbabilityError,
    bell_states,
    decompose_12,
    outcome_probability,
    project_bell,
    singlet_projector,
)
from spinport.spinalg import (
    DensityMatrix,
    DimensionError,
    Ket,
    NormalizationError,
    density_from,
    normalize,
    partial_trace,
    tensor,
)

SQRT_HALF = 1.0 / np.sqrt(2.0)

# independent constructions of the four states, used as oracles below
BELL_ARRAYS = {
    BellLabel.PSI_PLUS: np.array([0, SQRT_HALF, SQRT_HALF, 0], dtype=complex),
    BellLabel.PSI_MINUS: np.array([0, SQRT_HALF, -SQRT_HALF, 0], dtype=complex),
    BellLabel.PHI_PLUS: np.array([SQRT_HALF, 0, 0, SQRT_HALF], dtype=complex),
    BellLabel.PHI_MINUS: np.array([SQRT_HALF, 0, 0, -SQRT_HALF], dtype=complex),
}

# particle-3 conditional of each branch for input amplitudes (a, b)
CONDITIONAL_FORMS = {
    BellLabel.PSI_PLUS: lambda a, b: np.array([a, b]),
    BellLabel.PSI_MINUS: lambda a, b: np.array([a, -b]),
    BellLabel.PHI_PLUS: lambda a, b: np.array([b, a]),
    BellLabel.PHI_MINUS: lambda a, b: np.array([-b, a]),
}


def protocol_input(a: complex, b: complex) -> Ket:
    """Beam (a, b) on particle 1 times the psi+ pair on particles (2, 3)."""
    amps = np.zeros(8, dtype=complex)
    beam = np.array([a, b], dtype=complex)
    pair = BELL_ARRAYS[BellLabel.PSI_PLUS]
    for s1 in range(2):
        for s2 in range(2):
            for s3 in range(2):
                amps[s1 * 4 + s2 * 2 + s3] = beam[s1] * pair[s2 * 2 + s3]
    return Ket(amps)


def projection_oracle(psi: Ket, label: BellLabel) -> np.ndarray:
    """(<B|_12 x I_3) psi by explicit summation."""
    out = np.zeros(2, dtype=complex)
    bell = BELL_ARRAYS[label]
    for s1 in range(2):
        for s2 in range(2):
            for s3 in range(2):
                out[s3] += np.conj(bell[s1 * 2 + s2]) * psi.amplitudes[s1 * 4 + s2 * 2 + s3]
    return out


def assert_same_up_to_phase(actual: np.ndarray, expected: np.ndarray, atol: float = 1e-12) -> None:
    overlap = np.vdot(expected, actual)
    assert abs(overlap) > 1e-6, "states are orthogonal, not equal"
    aligned = actual * np.conj(overlap) / abs(overlap)
    assert np.allclose(aligned, expected, atol=atol)


class TestBellStates:
    def test_orthonormal_basis(self):
        states = bell_states()
        gram = np.array(
            [[np.vdot(states[r].amplitudes, states[c].amplitudes) for c in BELL_ORDER] for r in BELL_ORDER]
        )
        assert np.allclose(gram, np.eye(4), atol=1e-12)

    def test_singlet_norm(self):
        s = bell_states()[BellLabel.PSI_MINUS]
        assert np.vdot(s.amplitudes, s.amplitudes) == pytest.approx(1.0, abs=1e-15)

    def test_parity_sectors_are_orthogonal(self):
        states = bell_states()
        overlap = np.vdot(states[BellLabel.PHI_PLUS].amplitudes, states[BellLabel.PSI_PLUS].amplitudes)
        assert overlap == pytest.approx(0.0, abs=1e-15)

    def test_psi_plus_amplitudes(self):
        assert np.allclose(bell_states()[BellLabel.PSI_PLUS].amplitudes, [0, SQRT_HALF, SQRT_HALF, 0])


class TestDecompose:
    def test_equal_quarter_weights(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            beam = random_beam(rng)
            decomposition = decompose_12(protocol_input(beam.a, beam.b))
            for label in BELL_ORDER:
                assert decomposition.probability(label) == pytest.approx(0.25, abs=1e-12)

    def test_singlet_branch_conditional(self):
        a, b = 0.6, 0.8j
        decomposition = decompose_12(protocol_input(a, b))
        expected = CONDITIONAL_FORMS[BellLabel.PSI_MINUS](a, b)
        assert_same_up_to_phase(decomposition.conditional(BellLabel.PSI_MINUS).amplitudes, expected)

    def test_swapped_branch_conditional(self):
        a, b = 0.6, 0.8j
        decomposition = decompose_12(protocol_input(a, b))
        expected = CONDITIONAL_FORMS[BellLabel.PHI_PLUS](a, b)
        assert_same_up_to_phase(decomposition.conditional(BellLabel.PHI_PLUS).amplitudes, expected)

    def test_matches_projection_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            psi = random_ket(rng, 8)
            decomposition = decompose_12(psi)
            for label in BELL_ORDER:
                branch = decomposition.branches[label]
                oracle = projection_oracle(psi, label)
                product = branch.coefficient * branch.conditional.amplitudes
                assert np.allclose(product, oracle, atol=1e-12)

    def test_all_branches_match_their_closed_forms(self):
        rng = np.random.default_rng(29)
        for _ in range(200):
            beam = random_beam(rng)
            decomposition = decompose_12(protocol_input(beam.a, beam.b))
            for label in BELL_ORDER:
                assert decomposition.probability(label) == pytest.approx(0.25, abs=1e-12)
                expected = CONDITIONAL_FORMS[label](beam.a, beam.b)
                assert_same_up_to_phase(decomposition.conditional(label).amplitudes, expected)

    def test_reconstruction_property(self):
        rng = np.random.default_rng(123)
        for _ in range(1000):
            psi = random_ket(rng, 8)
            decomposition = decompose_12(psi)
            assert np.allclose(decomposition.reconstruct().amplitudes, psi.amplitudes, atol=1e-12)
            total = sum(decomposition.probability(label) for label in BELL_ORDER)
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_conditional_phase_convention(self):
        rng = np.random.default_rng(55)
        for _ in range(20):
            decomposition = decompose_12(random_ket(rng, 8))
            for branch in decomposition.branches.values():
                amps = branch.conditional.amplitudes
                lead = amps[np.abs(amps) > 1e-9][0]
                assert lead.real > 0
                assert abs(lead.imag) < 1e-12 * abs(lead)

    def test_vanishing_branches_are_flagged(self):
        psi = tensor(Ket(BELL_ARRAYS[BellLabel.PSI_PLUS]), Ket([1, 0]))
        decomposition = decompose_12(psi)
        assert decomposition.branches[BellLabel.PHI_PLUS].defined is False
        assert decomposition.branches[BellLabel.PHI_PLUS].coefficient == 0
        assert decomposition.branches[BellLabel.PSI_PLUS].defined is True

    def test_input_validation(self):
        with pytest.raises(DimensionError):
            decompose_12(Ket([1, 0]))
        with pytest.raises(NormalizationError):
            decompose_12(Ket([1, 0, 0, 0, 0, 0, 0, 1]))


class TestOutcomeProbability:
    def test_singlet_quarter_for_any_beam(self):
        assert outcome_probability(protocol_input(1, 0), BellLabel.PSI_MINUS) == pytest.approx(0.25, abs=1e-12)
        assert outcome_probability(protocol_input(SQRT_HALF, SQRT_HALF * 1j), BellLabel.PSI_MINUS) == pytest.approx(
            0.25, abs=1e-12
        )

    def test_bell_product_inputs(self):
        psi = tensor(Ket(BELL_ARRAYS[BellLabel.PSI_PLUS]), Ket([1, 0]))
        assert outcome_probability(psi, BellLabel.PSI_PLUS) == pytest.approx(1.0, abs=1e-12)
        assert outcome_probability(psi, BellLabel.PHI_MINUS) == pytest.approx(0.0, abs=1e-12)


class TestProjectBell:
    def test_up_beam(self):
        probability, conditional = project_bell(protocol_input(1, 0), BellLabel.PSI_MINUS)
        assert probability == pytest.approx(0.25, abs=1e-12)
        assert_same_up_to_phase(conditional.amplitudes, np.array([1, 0]))

    def test_plus_x_beam_lands_on_minus_x(self):
        probability, conditional = project_bell(protocol_input(SQRT_HALF, SQRT_HALF), BellLabel.PSI_MINUS)
        assert probability == pytest.approx(0.25, abs=1e-12)
        assert_same_up_to_phase(conditional.amplitudes, np.array([SQRT_HALF, -SQRT_HALF]))

    def test_zero_probability_outcome(self):
        psi = tensor(Ket(BELL_ARRAYS[BellLabel.PSI_PLUS]), Ket([1, 0]))
        with pytest.raises(ZeroProbabilityError):
            project_bell(psi, BellLabel.PHI_MINUS)

    def test_agrees_with_projector_route(self):
        # oracle: apply the singlet projector, renormalize, trace out the pair
        rng = np.random.default_rng(31)
        projector = singlet_projector().entries
        for _ in range(100):
            psi = random_ket(rng, 8)
            probability, conditional = project_bell(psi, BellLabel.PSI_MINUS)
            projected = projector @ psi.amplitudes
            assert probability == pytest.approx(float(np.vdot(projected, projected).real), abs=1e-12)
            reduced = partial_trace(density_from(normalize(Ket(projected))), keep=[3])
            assert np.allclose(reduced.entries, density_from(conditional).entries, atol=1e-10)


class TestSingletProjector:
    def test_idempotent_and_hermitian(self):
        p = singlet_projector().entries
        assert np.allclose(p @ p, p, atol=1e-12)
        assert np.allclose(p, p.conj().T, atol=1e-12)

    def test_rank_counts_the_spectator(self):
        assert np.trace(singlet_projector().entries).real == pytest.approx(2.0, abs=1e-12)

    def test_expectation_matches_outcome_probability(self):
        psi = protocol_input(0.6, 0.8j)
        expectation = float(np.vdot(psi.amplitudes, singlet_projector().entries @ psi.amplitudes).real)
        assert expectation == pytest.approx(0.25, abs=1e-12)
