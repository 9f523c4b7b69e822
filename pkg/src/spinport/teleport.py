"""Teleportation protocol: preparation, singlet post-selection, correction, fidelity.

The channel pair (particles 2, 3) starts in psi+ and the incoming particle 1
carries amplitudes (a, b). Discriminating the psi- outcome on particles
(1, 2) leaves particle 3 in a|0> - b|1>, a sign-flipped image of the input.
Applying sigma_z makes that branch exact for every input; a 180-degree
rotation about y is kept as an alternative policy because it is the
correction quoted for this scheme, and the fidelity scan quantifies where
it actually works (x-axis inputs only).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bellkit, spinalg
from .bellkit import BELL_ORDER, BellLabel
from .spinalg import (
    ATOL_ALGEBRA,
    DimensionError,
    Ket,
    NormalizationError,
    Operator,
    SpinAlgebraError,
)

_POLICY_NAMES = ("none", "sigma_z", "ry_pi", "custom")


@dataclass(frozen=True)
class BeamState:
    """Incoming spin-1/2 amplitudes (a, b) with |a|^2 + |b|^2 = 1."""

    a: complex
    b: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        total = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(total - 1.0) > ATOL_ALGEBRA:
            raise NormalizationError(f"|a|^2 + |b|^2 = {total}, not 1 within 1e-12")

    @classmethod
    def from_direction(cls, n) -> "BeamState":
        k = spinalg.ket_from_direction(n)
        return cls(k.amplitudes[0], k.amplitudes[1])

    def bloch(self) -> spinalg.BlochVector:
        return spinalg.bloch_from(spinalg.density_from(prepare_beam(self)))


@dataclass(frozen=True)
class CorrectionPolicy:
    """Unitary applied to the post-selected neutron state.

    Named policies: "none", "sigma_z", "ry_pi". A "custom" policy carries
    its own single-particle unitary.
    """

    name: str
    operator: Operator | None = None

    def __post_init__(self) -> None:
        if self.name not in _POLICY_NAMES:
            raise SpinAlgebraError(f"unknown correction policy {self.name!r}; expected one of {_POLICY_NAMES}")
        if self.name == "custom":
            if self.operator is None or self.operator.dim != 2:
                raise SpinAlgebraError("custom correction needs a single-particle operator")
            if not self.operator.is_unitary:
                raise SpinAlgebraError("custom correction operator must be unitary within 1e-12")
        elif self.operator is not None:
            raise SpinAlgebraError(f"policy {self.name!r} does not take an operator")

    @classmethod
    def custom(cls, operator: Operator) -> "CorrectionPolicy":
        return cls("custom", operator)

    @classmethod
    def parse(cls, text: str) -> "CorrectionPolicy":
        if text not in ("none", "sigma_z", "ry_pi"):
            raise SpinAlgebraError(f"unknown correction policy {text!r}; expected none, sigma_z or ry_pi")
        return cls(text)


NO_CORRECTION = CorrectionPolicy("none")
SIGMA_Z = CorrectionPolicy("sigma_z")
RY_PI = CorrectionPolicy("ry_pi")


@dataclass(frozen=True)
class TeleportResult:
    """Outcome of one protocol run.

    For outcomes other than psi- the experiment discards the event, so no
    correction is applied: ``neutron_post`` and ``fidelity_post`` are None.
    """

    outcome: BellLabel
    probability: float
    neutron_pre: Ket
    neutron_post: Ket | None
    fidelity_pre: float
    fidelity_post: float | None

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise SpinAlgebraError(f"outcome probability {self.probability} outside [0, 1]")
        for value in (self.fidelity_pre, self.fidelity_post):
            if value is not None and not 0.0 <= value <= 1.0:
                raise SpinAlgebraError(f"fidelity {value} outside [0, 1]")


def prepare_deuteron() -> Ket:
    """Channel pair state psi+ = (|01> + |10>)/sqrt(2) on particles (2, 3)."""
    return bellkit.bell_states()[BellLabel.PSI_PLUS]


def prepare_beam(s: BeamState) -> Ket:
    """Particle-1 ket with amplitudes (a, b)."""
    return Ket([s.a, s.b])


def compose(beam: Ket, deuteron: Ket) -> Ket:
    """Full three-particle product state, beam as particle 1."""
    if beam.dim != 2 or deuteron.dim != 4:
        raise DimensionError(f"compose expects dims (2, 4), got ({beam.dim}, {deuteron.dim})")
    if not (beam.is_normalized and deuteron.is_normalized):
        raise NormalizationError("compose requires normalized inputs")
    return spinalg.tensor(beam, deuteron)


def fidelity(x: Ket, y: Ket) -> float:
    """Phase-insensitive overlap |<x|y>|^2 of two normalized single-particle kets."""
    if x.dim != 2 or y.dim != 2:
        raise DimensionError(f"fidelity expects single-particle kets, got dims ({x.dim}, {y.dim})")
    if not (x.is_normalized and y.is_normalized):
        raise NormalizationError("fidelity requires normalized inputs")
    return min(1.0, abs(spinalg.inner(x, y)) ** 2)


def correction(policy: CorrectionPolicy) -> Operator:
    """The unitary a policy stands for."""
    if policy.name == "none":
        return spinalg.pauli("identity")
    if policy.name == "sigma_z":
        return spinalg.pauli("z")
    if policy.name == "ry_pi":
        return spinalg.rotation((0.0, 1.0, 0.0), np.pi)
    assert policy.operator is not None
    return policy.operator


def index_from_uniform(u, probabilities) -> np.ndarray | int:
    """Map uniform variates in [0, 1) to outcome indices by inverting the CDF.

    ``probabilities`` are taken in the given order; each variate selects the
    first index whose cumulative probability exceeds it. Works on scalars
    and arrays alike and consumes exactly one variate per draw.
    """
    cum = np.cumsum(np.asarray(probabilities, dtype=float))
    idx = np.searchsorted(cum, u, side="right")
    return np.minimum(idx, len(cum) - 1)


def run_postselected(s: BeamState, policy: CorrectionPolicy = SIGMA_Z) -> TeleportResult:
    """Run the protocol keeping only the discriminated psi- outcome."""
    beam = prepare_beam(s)
    psi = compose(beam, prepare_deuteron())
    probability, neutron_pre = bellkit.project_bell(psi, BellLabel.PSI_MINUS)
    neutron_post = spinalg.apply(correction(policy), neutron_pre)
    return TeleportResult(
        outcome=BellLabel.PSI_MINUS,
        probability=probability,
        neutron_pre=neutron_pre,
        neutron_post=neutron_post,
        fidelity_pre=fidelity(beam, neutron_pre),
        fidelity_post=fidelity(beam, neutron_post),
    )


def run_sampled(s: BeamState, policy: CorrectionPolicy, seed: int) -> TeleportResult:
    """Draw one Bell outcome with its Born probability and report that branch.

    Uses a counter-based generator keyed by ``seed``; the draw consumes
    exactly one uniform variate, with outcomes ordered as ``BELL_ORDER``.
    Only a psi- outcome is corrected; the others are reported uncorrected
    because the experiment discards them.
    """
    beam = prepare_beam(s)
    decomposition = bellkit.decompose_12(compose(beam, prepare_deuteron()))
    probs = [decomposition.probability(label) for label in BELL_ORDER]
    rng = np.random.Generator(np.random.Philox(key=seed))
    outcome = BELL_ORDER[int(index_from_uniform(rng.random(), probs))]
    branch = decomposition.branches[outcome]
    neutron_pre = branch.conditional
    if outcome is BellLabel.PSI_MINUS:
        neutron_post = spinalg.apply(correction(policy), neutron_pre)
        fidelity_post = fidelity(beam, neutron_post)
    else:
        neutron_post = None
        fidelity_post = None
    return TeleportResult(
        outcome=outcome,
        probability=branch.probability,
        neutron_pre=neutron_pre,
        neutron_post=neutron_post,
        fidelity_pre=fidelity(beam, neutron_pre),
        fidelity_post=fidelity_post,
    )
