"""Bell basis, Bell decomposition, and projective Bell measurement on particles 1 and 2.

The four maximally entangled two-particle states are

    psi+- = (|01> +- |10>) / sqrt(2)
    phi+- = (|00> +- |11>) / sqrt(2)

A three-particle state decomposes as

    |Psi> = sum_B c_B |B>_{12} |chi_B>_3

with normalized conditionals |chi_B> for particle 3. The coefficient c_B
absorbs magnitude and phase: each conditional is reported with its first
nonzero amplitude real and positive, so only the products c_B |chi_B> are
convention-free.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .spinalg import (
    ATOL_ALGEBRA,
    ZERO_NORM,
    DimensionError,
    Ket,
    NormalizationError,
    Operator,
    SpinAlgebraError,
)

_SQRT_HALF = 1.0 / np.sqrt(2.0)


class ZeroProbabilityError(SpinAlgebraError):
    """Projection onto a Bell outcome whose Born probability vanishes."""


class BellLabel(enum.Enum):
    PSI_PLUS = "psi_plus"
    PSI_MINUS = "psi_minus"
    PHI_PLUS = "phi_plus"
    PHI_MINUS = "phi_minus"


#: Canonical outcome order used everywhere a draw inverts the cumulative
#: distribution; fixing it is part of the reproducibility contract.
BELL_ORDER: tuple[BellLabel, ...] = tuple(BellLabel)

_BELL_AMPLITUDES = {
    BellLabel.PSI_PLUS: np.array([0, _SQRT_HALF, _SQRT_HALF, 0], dtype=complex),
    BellLabel.PSI_MINUS: np.array([0, _SQRT_HALF, -_SQRT_HALF, 0], dtype=complex),
    BellLabel.PHI_PLUS: np.array([_SQRT_HALF, 0, 0, _SQRT_HALF], dtype=complex),
    BellLabel.PHI_MINUS: np.array([_SQRT_HALF, 0, 0, -_SQRT_HALF], dtype=complex),
}


def bell_states() -> dict[BellLabel, Ket]:
    """The four Bell states as dim-4 kets, pairwise orthonormal."""
    return {label: Ket(amps) for label, amps in _BELL_AMPLITUDES.items()}


@dataclass(frozen=True)
class BellBranch:
    """One branch of a Bell decomposition.

    ``defined`` is False when the branch amplitude vanishes; the conditional
    is then an arbitrary placeholder and must not be used.
    """

    coefficient: complex
    conditional: Ket
    defined: bool = True

    @property
    def probability(self) -> float:
        return abs(self.coefficient) ** 2


@dataclass(frozen=True)
class BellDecomposition:
    """Coefficients and particle-3 conditionals of a three-particle state."""

    branches: Mapping[BellLabel, BellBranch]

    def __post_init__(self) -> None:
        if set(self.branches) != set(BellLabel):
            raise SpinAlgebraError("decomposition must carry exactly one branch per Bell label")
        total = sum(branch.probability for branch in self.branches.values())
        if abs(total - 1.0) > ATOL_ALGEBRA:
            raise NormalizationError(f"Bell branch probabilities sum to {total}, not 1 within 1e-12")

    def coefficient(self, label: BellLabel) -> complex:
        return self.branches[label].coefficient

    def conditional(self, label: BellLabel) -> Ket:
        return self.branches[label].conditional

    def probability(self, label: BellLabel) -> float:
        return self.branches[label].probability

    def probabilities(self) -> dict[BellLabel, float]:
        return {label: self.branches[label].probability for label in BELL_ORDER}

    def reconstruct(self) -> Ket:
        """Reassemble sum_B c_B |B>|chi_B> as a dim-8 ket."""
        amps = np.zeros(8, dtype=complex)
        for label, branch in self.branches.items():
            if not branch.defined:
                continue
            amps += branch.coefficient * np.kron(_BELL_AMPLITUDES[label], branch.conditional.amplitudes)
        return Ket(amps)


def _split_branch(projected: np.ndarray) -> BellBranch:
    nrm = float(np.linalg.norm(projected))
    if nrm <= ZERO_NORM:
        return BellBranch(coefficient=0j, conditional=Ket([1, 0]), defined=False)
    # first amplitude that is not numerical dust fixes the phase convention
    lead = projected[np.abs(projected) > 1e-12 * nrm][0]
    coefficient = complex(lead / abs(lead) * nrm)
    return BellBranch(coefficient=coefficient, conditional=Ket(projected / coefficient))


def decompose_12(psi: Ket) -> BellDecomposition:
    """Bell decomposition of a normalized three-particle ket over particles (1, 2)."""
    if psi.dim != 8:
        raise DimensionError(f"decompose_12 needs a three-particle ket (dim 8), got dim {psi.dim}")
    if not psi.is_normalized:
        raise NormalizationError("decompose_12 requires a normalized input")
    # rows: joint (particle 1, particle 2) index, columns: particle 3
    pair_by_third = psi.amplitudes.reshape(4, 2)
    branches = {
        label: _split_branch(_BELL_AMPLITUDES[label].conj() @ pair_by_third)
        for label in BELL_ORDER
    }
    return BellDecomposition(branches)


def outcome_probability(psi: Ket, b: BellLabel) -> float:
    """Born probability of finding particles (1, 2) in Bell state ``b``."""
    return decompose_12(psi).probability(b)


def project_bell(psi: Ket, b: BellLabel) -> tuple[float, Ket]:
    """Probability of outcome ``b`` and the normalized post-measurement particle-3 state."""
    branch = decompose_12(psi).branches[b]
    if branch.probability < 1e-14:
        raise ZeroProbabilityError(f"outcome {b.value} has zero probability; conditional undefined")
    return branch.probability, branch.conditional


def singlet_projector() -> Operator:
    """Projector |psi-><psi-| on particles (1, 2), tensored with identity on particle 3."""
    singlet = _BELL_AMPLITUDES[BellLabel.PSI_MINUS]
    return Operator(np.kron(np.outer(singlet, singlet.conj()), np.eye(2)))
