"""Dense complex linear algebra for systems of up to three spin-1/2 particles.

Conventions used throughout the package:

* ``|0>`` is the +1/2 spin projection along the z quantization axis,
  ``|1>`` the -1/2 projection.
* Particle 1 is the most significant tensor factor, so the basis index of
  ``|s1 s2 s3>`` is ``s1*4 + s2*2 + s3``.
* Pauli matrices take their standard form in this basis.
* Global phases are never normalized away silently; phase-insensitive
  comparisons belong to the caller (e.g. ``teleport.fidelity``).

Tolerances: ``ATOL_ALGEBRA`` for plain algebraic identities and
``ATOL_COMPOSED`` for multi-step checks. Maximum dimension is 8, so dense
storage and near-machine precision are both comfortable.

Every value is immutable after construction and every operation is a pure
function; everything here can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

ATOL_ALGEBRA = 1e-12
ATOL_COMPOSED = 1e-10

#: Norms at or below this are treated as numerically zero vectors.
ZERO_NORM = 1e-14

_VALID_DIMS = (2, 4, 8)


class SpinAlgebraError(ValueError):
    """Base class for contract violations raised by this package."""


class DimensionError(SpinAlgebraError):
    """Dimension mismatch, or a Hilbert space larger than three particles."""


class ZeroStateError(SpinAlgebraError):
    """A numerically zero vector was asked to act as a state."""


class NormalizationError(SpinAlgebraError):
    """An input that must be normalized is not."""


class InvariantError(SpinAlgebraError):
    """A computed quantity broke a numerical invariant (e.g. Bloch norm > 1)."""


def _check_dim(dim: int, context: str) -> None:
    if dim not in _VALID_DIMS:
        raise DimensionError(f"{context}: dimension must be one of {_VALID_DIMS}, got {dim}")


@dataclass(frozen=True, eq=False)
class Ket:
    """State vector of one to three spin-1/2 particles."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1:
            raise DimensionError(f"Ket amplitudes must be a 1-d vector, got shape {amps.shape}")
        _check_dim(amps.size, "Ket")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def n_particles(self) -> int:
        return self.dim.bit_length() - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def is_normalized(self) -> bool:
        return abs(float(np.sum(np.abs(self.amplitudes) ** 2)) - 1.0) <= ATOL_ALGEBRA

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Ket({np.array2string(self.amplitudes, precision=6, suppress_small=True)})"


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix acting on one to three spin-1/2 particles."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.entries, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"Operator entries must be square, got shape {mat.shape}")
        _check_dim(mat.shape[0], "Operator")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def is_unitary(self) -> bool:
        eye = np.eye(self.dim)
        return bool(np.allclose(self.entries.conj().T @ self.entries, eye, atol=ATOL_ALGEBRA, rtol=0.0))

    @property
    def is_hermitian(self) -> bool:
        return bool(np.allclose(self.entries, self.entries.conj().T, atol=ATOL_ALGEBRA, rtol=0.0))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite spin density matrix.

    Validated on construction: Hermitian and unit trace within 1e-12,
    eigenvalues above -1e-10.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.entries, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"DensityMatrix entries must be square, got shape {mat.shape}")
        _check_dim(mat.shape[0], "DensityMatrix")
        if not np.allclose(mat, mat.conj().T, atol=ATOL_ALGEBRA, rtol=0.0):
            raise InvariantError("density matrix is not Hermitian within 1e-12")
        if abs(np.trace(mat).real - 1.0) > ATOL_ALGEBRA or abs(np.trace(mat).imag) > ATOL_ALGEBRA:
            raise InvariantError(f"density matrix trace {np.trace(mat)} is not 1 within 1e-12")
        if float(np.linalg.eigvalsh(mat).min()) < -1e-10:
            raise InvariantError("density matrix has an eigenvalue below -1e-10")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n_particles(self) -> int:
        return self.dim.bit_length() - 1


@dataclass(frozen=True)
class BlochVector:
    """Polarization vector (<sigma_x>, <sigma_y>, <sigma_z>) of one spin-1/2."""

    px: float
    py: float
    pz: float

    def __post_init__(self) -> None:
        for name in ("px", "py", "pz"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.px**2 + self.py**2 + self.pz**2 > 1.0 + 1e-10:
            raise InvariantError(f"Bloch vector ({self.px}, {self.py}, {self.pz}) has norm > 1")

    def norm(self) -> float:
        return float(np.sqrt(self.px**2 + self.py**2 + self.pz**2))

    def as_array(self) -> np.ndarray:
        return np.array([self.px, self.py, self.pz])


_PAULI = {
    "identity": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(axis: str) -> Operator:
    """Return the 2x2 Pauli matrix for ``axis`` in {"x", "y", "z", "identity"}."""
    try:
        return Operator(_PAULI[axis])
    except KeyError:
        raise SpinAlgebraError(f"unknown Pauli axis {axis!r}; expected x, y, z or identity") from None


def tensor(a: Ket, b: Ket) -> Ket:
    """Tensor product with ``a`` as the more significant factor."""
    if a.dim * b.dim > 8:
        raise DimensionError(f"tensor product dimension {a.dim * b.dim} exceeds 8 (three particles)")
    return Ket(np.kron(a.amplitudes, b.amplitudes))


def inner(a: Ket, b: Ket) -> complex:
    """Inner product <a|b> = sum_i conj(a_i) b_i."""
    if a.dim != b.dim:
        raise DimensionError(f"inner product needs equal dimensions, got {a.dim} and {b.dim}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def apply(u: Operator, k: Ket) -> Ket:
    """Matrix-vector product ``u @ k``."""
    if u.dim != k.dim:
        raise DimensionError(f"operator dim {u.dim} does not match state dim {k.dim}")
    return Ket(u.entries @ k.amplitudes)


def normalize(k: Ket) -> Ket:
    """Rescale ``k`` to unit norm, preserving its direction and phase."""
    n = k.norm()
    if n <= ZERO_NORM:
        raise ZeroStateError("cannot normalize a numerically zero state (orthogonal projection outcome)")
    return Ket(k.amplitudes / n)


def density_from(k: Ket) -> DensityMatrix:
    """Rank-1 density matrix ``|k><k|`` of a normalized ket."""
    if not k.is_normalized:
        raise NormalizationError(f"density_from requires a normalized ket, squared norm is {k.norm()**2}")
    return DensityMatrix(np.outer(k.amplitudes, k.amplitudes.conj()))


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on the particles in ``keep``.

    Particles are labelled 1..n with particle 1 the most significant tensor
    factor; ``keep`` must be a nonempty proper subset of those labels. The
    kept particles retain their relative order.
    """
    n = rho.n_particles
    kept = sorted({int(i) for i in keep})
    if not kept or len(kept) >= n or any(i < 1 or i > n for i in kept):
        raise DimensionError(
            f"keep={sorted(set(keep))!r} must be a nonempty proper subset of particle labels 1..{n}"
        )
    tensor_form = rho.entries.reshape([2] * (2 * n))
    row = "abc"[:n]
    col = "def"[:n]
    kept_axes = [i - 1 for i in kept]
    in_col = "".join(col[i] if i in kept_axes else row[i] for i in range(n))
    out = "".join(row[i] for i in kept_axes) + "".join(col[i] for i in kept_axes)
    reduced = np.einsum(f"{row}{in_col}->{out}", tensor_form)
    d = 2 ** len(kept)
    return DensityMatrix(reduced.reshape(d, d))


def rotation(axis: Iterable[float], angle: float) -> Operator:
    """Spin rotation exp(-i*angle*(axis.sigma)/2) about a unit 3-vector axis."""
    n = np.asarray(tuple(axis), dtype=float)
    if n.shape != (3,):
        raise DimensionError(f"rotation axis must be a 3-vector, got shape {n.shape}")
    if abs(float(np.linalg.norm(n)) - 1.0) > 1e-10:
        raise SpinAlgebraError(f"rotation axis must be unit length, |axis| = {np.linalg.norm(n)}")
    n_sigma = n[0] * _PAULI["x"] + n[1] * _PAULI["y"] + n[2] * _PAULI["z"]
    half = 0.5 * float(angle)
    return Operator(np.cos(half) * np.eye(2) - 1j * np.sin(half) * n_sigma)


def bloch_from(rho: DensityMatrix) -> BlochVector:
    """Bloch vector (tr(rho sigma_x), tr(rho sigma_y), tr(rho sigma_z)) of one particle."""
    if rho.dim != 2:
        raise DimensionError(f"bloch_from needs a single-particle density matrix, got dim {rho.dim}")
    components = []
    for axis in ("x", "y", "z"):
        value = complex(np.trace(rho.entries @ _PAULI[axis]))
        if abs(value.imag) >= ATOL_ALGEBRA:
            raise InvariantError(f"polarization component along {axis} has imaginary part {value.imag}")
        components.append(value.real)
    return BlochVector(*components)


def ket_from_direction(n: Iterable[float]) -> Ket:
    """Spin-1/2 ket whose Bloch vector is the unit direction ``n``.

    Amplitudes are (cos(theta/2), e^{i phi} sin(theta/2)) with (theta, phi)
    the spherical angles of ``n``.
    """
    v = np.asarray(tuple(n), dtype=float)
    if v.shape != (3,):
        raise DimensionError(f"direction must be a 3-vector, got shape {v.shape}")
    if abs(float(np.linalg.norm(v)) - 1.0) > 1e-10:
        raise SpinAlgebraError(f"direction must be unit length, |n| = {np.linalg.norm(v)}")
    theta = float(np.arccos(np.clip(v[2], -1.0, 1.0)))
    phi = float(np.arctan2(v[1], v[0]))
    return Ket([np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)])
