"""State-vector simulation of n qubits measured with local dichotomic observables.

Index convention: party 1 owns the most significant bit, both for the
computational-basis index of a state and for the setting index
``x = (x_1, ..., x_n)`` of a correlation tensor.  Outcome distributions use
the same ordering with bit 0 meaning ``a_i = +1`` and bit 1 meaning
``a_i = -1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CapacityError, DimensionError

MAX_PARTIES = 12

# Largest intermediate array (complex entries) built by the contraction engine
# before it splits work over one party's operator stack.
_CHUNK_LIMIT = 1 << 22

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])
IDENTITY = np.eye(2, dtype=complex)


def _check_n(n, cap=MAX_PARTIES):
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise TypeError(f"party count must be an integer, got {n!r}")
    if n < 1 or n > cap:
        raise CapacityError(f"party count n={n} outside supported range 1..{cap}")


def _frozen(arr):
    arr = np.array(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PureState:
    """Normalized n-qubit state vector with ``2**n`` complex amplitudes."""

    n: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_n(self.n)
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (2**self.n,):
            raise DimensionError(
                f"expected {2**self.n} amplitudes for n={self.n}, got {amps.size}"
            )
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def from_unnormalized(cls, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.size)))
        if 2**n != amps.size:
            raise DimensionError(f"amplitude count {amps.size} is not a power of two")
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("zero vector cannot be normalized")
        return cls(n, amps / norm)


@dataclass(frozen=True)
class BlochObservable:
    """Traceless single-qubit observable ``v . sigma`` with spectrum {-1, +1}."""

    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float).reshape(-1)
        if v.shape != (3,):
            raise ValueError(f"Bloch vector must have 3 components, got {v.shape}")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError(f"Bloch vector must be unit length, got norm {np.linalg.norm(v)!r}")
        object.__setattr__(self, "vector", _frozen(v))

    @classmethod
    def equatorial(cls, phi):
        """Observable ``cos(phi) X + sin(phi) Y``."""
        return cls(np.array([np.cos(phi), np.sin(phi), 0.0]))

    @classmethod
    def from_direction(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(v / np.linalg.norm(v))

    @property
    def matrix(self):
        return np.tensordot(self.vector, PAULIS, axes=1)


@dataclass(frozen=True)
class MeasurementSettings:
    """Two observables ``(O_0, O_1)`` for each of the n parties."""

    pairs: tuple

    def __post_init__(self):
        pairs = tuple(tuple(p) for p in self.pairs)
        if not pairs:
            raise ValueError("settings need at least one party")
        for i, p in enumerate(pairs):
            if len(p) != 2:
                raise ValueError(f"party {i + 1} has {len(p)} observables, expected 2")
            if not all(isinstance(o, BlochObservable) for o in p):
                raise TypeError(f"party {i + 1} observables must be BlochObservable")
        object.__setattr__(self, "pairs", pairs)

    @property
    def n(self):
        return len(self.pairs)

    @classmethod
    def from_angles(cls, angles):
        """Equatorial observables from an ``(n, 2)`` array of angles."""
        angles = np.asarray(angles, dtype=float)
        if angles.ndim != 2 or angles.shape[1] != 2:
            raise ValueError(f"angles must have shape (n, 2), got {angles.shape}")
        return cls(tuple(
            (BlochObservable.equatorial(a0), BlochObservable.equatorial(a1))
            for a0, a1 in angles
        ))

    @classmethod
    def from_vectors(cls, vectors):
        """Settings from an ``(n, 2, 3)`` array of Bloch vectors (normalized here)."""
        vectors = np.asarray(vectors, dtype=float)
        if vectors.ndim != 3 or vectors.shape[1:] != (2, 3):
            raise ValueError(f"vectors must have shape (n, 2, 3), got {vectors.shape}")
        return cls(tuple(
            (BlochObservable.from_direction(v0), BlochObservable.from_direction(v1))
            for v0, v1 in vectors
        ))

    def vectors(self):
        return np.array([[o.vector for o in p] for p in self.pairs])

    def matrices(self):
        return np.array([[o.matrix for o in p] for p in self.pairs])


@dataclass(frozen=True)
class CorrelationTensor:
    """Correlation values ``E(x)`` for all ``2**n`` setting indices."""

    n: int
    values: np.ndarray = field(repr=False)
    visibility: float = 1.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if vals.shape != (2**self.n,):
            raise DimensionError(f"expected {2**self.n} correlation values, got {vals.size}")
        if np.any(np.abs(vals) > 1 + 1e-12):
            raise ValueError("correlation values must lie in [-1, 1]")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility {self.visibility} outside [0, 1]")
        object.__setattr__(self, "values", _frozen(vals))

    def __getitem__(self, x):
        return self.values[setting_index(x, self.n)]


@dataclass(frozen=True)
class OutcomeDistribution:
    """Joint distribution of ``a = (a_1..a_n)`` for one setting index ``x``."""

    n: int
    x: int
    probabilities: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float).reshape(-1)
        if p.shape != (2**self.n,):
            raise DimensionError(f"expected {2**self.n} probabilities, got {p.size}")
        if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "probabilities", _frozen(np.clip(p, 0.0, None)))

    def correlation(self):
        """Moment ``sum_a (prod_i a_i) P(a)``."""
        return float(self.probabilities @ parity_signs(self.n))


def setting_index(x, n):
    """Flat index of a setting tuple (party 1 most significant), or pass an int through."""
    if isinstance(x, (int, np.integer)):
        if not 0 <= x < 2**n:
            raise IndexError(f"setting index {x} out of range for n={n}")
        return int(x)
    bits = tuple(int(b) for b in x)
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise DimensionError(f"setting tuple {x!r} does not match n={n}")
    idx = 0
    for b in bits:
        idx = (idx << 1) | b
    return idx


def setting_bits(index, n):
    """Inverse of :func:`setting_index`."""
    return tuple((index >> (n - 1 - i)) & 1 for i in range(n))


def all_setting_bits(n):
    """``(2**n, n)`` integer array of setting bits in index order."""
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64).reshape(2**n, n)


def parity_signs(n):
    """``prod_i a_i`` for every outcome index (bit 1 encodes ``a_i = -1``)."""
    weights = all_setting_bits(n).sum(axis=1)
    return np.where(weights % 2 == 0, 1.0, -1.0)


def outcome_vector(index, n):
    """Outcome index to a vector in {-1, +1}^n."""
    return np.array([1 - 2 * b for b in setting_bits(index, n)], dtype=np.int64)


def ghz(n):
    """GHZ state (|0...0> + |1...1>)/sqrt(2)."""
    _check_n(n)
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return PureState(n, amps)


def basis_state(n, index=0):
    _check_n(n)
    amps = np.zeros(2**n, dtype=complex)
    amps[index] = 1.0
    return PureState(n, amps)


def random_state(n, rng):
    """Haar-random pure state from normalized complex Gaussian amplitudes."""
    _check_n(n)
    amps = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return PureState(n, amps / np.linalg.norm(amps))


def random_settings(n, rng):
    """Settings with independent uniformly random Bloch vectors."""
    return MeasurementSettings.from_vectors(rng.standard_normal((n, 2, 3)))


def _check_match(state, n):
    if state.n != n:
        raise DimensionError(f"state has n={state.n} parties but settings have n={n}")


def _apply_local(op, psi, party, n):
    # psi has shape (2,)*n
    out = np.tensordot(op, psi, axes=([1], [party]))
    return np.moveaxis(out, 0, party)


def correlation(state, settings, x):
    """Expectation of ``O^1_{x_1} (x) ... (x) O^n_{x_n}`` in ``state``."""
    _check_match(state, settings.n)
    bits = setting_bits(setting_index(x, state.n), state.n)
    psi = state.amplitudes.reshape((2,) * state.n)
    phi = psi
    for i, b in enumerate(bits):
        phi = _apply_local(settings.pairs[i][b].matrix, phi, i, state.n)
    return float(np.clip(np.vdot(psi, phi).real, -1.0, 1.0))


def local_expectations(state, stacks):
    """Expectations of every tensor product drawn from per-party operator stacks.

    Args:
        state: the n-qubit state.
        stacks: sequence of n arrays, entry i of shape ``(K_i, 2, 2)``.

    Returns:
        Real array of shape ``(K_1, ..., K_n)`` whose entry ``k`` is
        ``Re <psi| A^1_{k_1} (x) ... (x) A^n_{k_n} |psi>``.
    """
    n = state.n
    stacks = [np.asarray(s, dtype=complex) for s in stacks]
    if len(stacks) != n:
        raise DimensionError(f"got {len(stacks)} operator stacks for n={n}")
    sizes = [s.shape[0] for s in stacks]
    total = int(np.prod(sizes)) * 2**n
    if total > _CHUNK_LIMIT:
        split = next((i for i, k in enumerate(sizes) if k > 1), None)
        if split is not None:
            parts = []
            for k in range(sizes[split]):
                sub = list(stacks)
                sub[split] = stacks[split][k:k + 1]
                parts.append(local_expectations(state, sub))
            return np.concatenate(parts, axis=split)
    psi = state.amplitudes
    phi = psi.reshape(1, 2**n)
    for i, stack in enumerate(stacks):
        batch = phi.shape[0]
        phi = phi.reshape(batch, 2**i, 2, 2 ** (n - i - 1))
        # (x, l, b, r) . (k, a, b) -> (x, l, r, k, a) -> (x, k, l, a, r)
        phi = np.tensordot(phi, stack, axes=([2], [2])).transpose(0, 3, 1, 4, 2)
        phi = phi.reshape(batch * stack.shape[0], 2**n)
    vals = (phi @ psi.conj()).real
    return vals.reshape(sizes)


def correlation_tensor(state, settings, visibility=1.0):
    """All ``2**n`` correlations, scaled by the white-noise visibility.

    Mixing in ``(1 - V)`` of the maximally mixed state multiplies every full
    correlation of traceless observables by ``V``.
    """
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility {visibility} outside [0, 1]")
    _check_match(state, settings.n)
    raw = local_expectations(state, settings.matrices()).reshape(-1)
    return CorrelationTensor(state.n, visibility * np.clip(raw, -1.0, 1.0), float(visibility))


def outcome_distribution(state, settings, x):
    """``P(a|x) = <psi| (x)_i (I + a_i O^i_{x_i})/2 |psi>`` for all outcomes a."""
    _check_match(state, settings.n)
    idx = setting_index(x, state.n)
    bits = setting_bits(idx, state.n)
    stacks = []
    for i, b in enumerate(bits):
        o = settings.pairs[i][b].matrix
        stacks.append(np.stack([(IDENTITY + o) / 2, (IDENTITY - o) / 2]))
    probs = local_expectations(state, stacks).reshape(-1)
    probs = np.clip(probs, 0.0, None)
    return OutcomeDistribution(state.n, idx, probs / probs.sum())


def sample_outcomes(dist, rng):
    """Draw one outcome vector in {-1, +1}^n from ``dist`` by inverse CDF."""
    cdf = np.cumsum(dist.probabilities)
    k = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    k = min(k, cdf.size - 1)
    return outcome_vector(k, dist.n)


def pauli_tensor(state, axes: Sequence[int] = (0, 1, 2)):
    """Full-correlation tensor ``T[j_1..j_n] = <sigma_{j_1} (x) ... (x) sigma_{j_n}>``.

    ``axes`` selects which Pauli operators (0=X, 1=Y, 2=Z) are kept per party.
    """
    stack = PAULIS[list(axes)]
    return local_expectations(state, [stack] * state.n)


def equatorial_settings(angles0, angles1):
    """Settings with party i measuring at angles ``angles0[i]`` / ``angles1[i]`` in the x-y plane."""
    return MeasurementSettings.from_angles(np.column_stack([angles0, angles1]))


def mermin_settings(n):
    """X for setting 0 and Y for setting 1 at every party."""
    return equatorial_settings(np.zeros(n), np.full(n, np.pi / 2))


def ardehali_settings(n):
    """Equatorial angles pi/(4n) and pi/(4n) + pi/2; GHZ then gives E(x) = cos(pi/2 |x| + pi/4)."""
    base = np.full(n, np.pi / (4 * n))
    return equatorial_settings(base, base + np.pi / 2)
