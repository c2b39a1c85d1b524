"""Bosonic Fock bases, normalized state vectors, and dual-rail qubit encoding.

A basis for ``n`` photons in ``m`` modes enumerates every occupation vector
(non-negative integers summing to ``n``) in descending lexicographic order,
so state indices are reproducible across runs and serialized artifacts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

NORM_TOL = 1e-9


class FockBasis:
    """Occupation-number basis for ``n`` photons in ``m`` modes.

    Attributes:
        n: photon count.
        m: mode count.
        states: ``(size, m)`` int array of occupation vectors, descending
            lexicographic order.
        index_of: dict mapping an occupation tuple to its row in ``states``.
    """

    def __init__(self, n: int, m: int):
        if n < 0:
            raise ValueError(f"photon count must be non-negative, got {n}")
        if m < 1:
            raise ValueError(f"mode count must be positive, got {m}")
        self.n = int(n)
        self.m = int(m)
        states = np.array(list(_occupations(self.n, self.m)), dtype=np.int64)
        states = states.reshape(-1, self.m)
        states.flags.writeable = False
        self.states = states
        self.index_of = {tuple(int(x) for x in s): i for i, s in enumerate(states)}

    @property
    def size(self) -> int:
        return self.states.shape[0]

    def index(self, occupation) -> int:
        key = tuple(int(x) for x in occupation)
        if key not in self.index_of:
            raise KeyError(f"occupation {key} not in ({self.n}, {self.m}) basis")
        return self.index_of[key]

    def __len__(self) -> int:
        return self.size

    def __eq__(self, other) -> bool:
        return isinstance(other, FockBasis) and (self.n, self.m) == (other.n, other.m)

    def __hash__(self) -> int:
        return hash((self.n, self.m))

    def __repr__(self) -> str:
        return f"FockBasis(n={self.n}, m={self.m}, size={self.size})"


def _occupations(n, m):
    if m == 1:
        yield (n,)
        return
    for k in range(n, -1, -1):
        for rest in _occupations(n - k, m - 1):
            yield (k,) + rest


@lru_cache(maxsize=None)
def enumerate_basis(n: int, m: int) -> FockBasis:
    """Return the (cached, shared) basis of ``n`` photons in ``m`` modes."""
    return FockBasis(n, m)


def basis_size(n: int, m: int) -> int:
    """Stars-and-bars count C(n+m-1, n) without enumerating states."""
    return math.comb(n + m - 1, n)


@dataclass(frozen=True)
class QuantumState:
    """Unit-norm complex amplitude vector over a Fock basis."""

    basis: FockBasis
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.basis.size,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, "
                f"basis needs ({self.basis.size},)"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} is not 1 within {NORM_TOL}")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_occupation(cls, basis: FockBasis, occupation) -> "QuantumState":
        amps = np.zeros(basis.size, dtype=np.complex128)
        amps[basis.index(occupation)] = 1.0
        return cls(basis, amps)

    @classmethod
    def normalized(cls, basis: FockBasis, amplitudes) -> "QuantumState":
        amps = np.asarray(amplitudes, dtype=np.complex128)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(basis, amps / norm)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_dict(self) -> dict:
        return {
            "n": self.basis.n,
            "m": self.basis.m,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuantumState":
        basis = enumerate_basis(int(data["n"]), int(data["m"]))
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
        return cls(basis, amps)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "QuantumState":
        return cls.from_dict(json.loads(text))


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """Squared overlap |<a|b>|^2 of two states on the same basis."""
    if a.basis != b.basis:
        raise ValueError(f"basis mismatch: {a.basis} vs {b.basis}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


@lru_cache(maxsize=None)
def dual_rail_indices(qubits: int) -> np.ndarray:
    """Fock indices of the 2^q dual-rail computational states, qubit 0 = MSB.

    Logical 0 of qubit k puts the photon in mode 2k (top), logical 1 in
    mode 2k+1 (bottom).
    """
    if qubits < 1:
        raise ValueError(f"qubit count must be positive, got {qubits}")
    basis = enumerate_basis(qubits, 2 * qubits)
    indices = np.empty(2**qubits, dtype=np.int64)
    for logical in range(2**qubits):
        occ = [0] * (2 * qubits)
        for k in range(qubits):
            bit = (logical >> (qubits - 1 - k)) & 1
            occ[2 * k + bit] = 1
        indices[logical] = basis.index(occ)
    indices.flags.writeable = False
    return indices


@dataclass(frozen=True)
class DualRailRegister:
    """q logical qubits carried by q photons across 2q modes, one per pair."""

    qubits: int

    def __post_init__(self):
        if self.qubits < 1:
            raise ValueError(f"qubit count must be positive, got {self.qubits}")

    @property
    def n(self) -> int:
        return self.qubits

    @property
    def m(self) -> int:
        return 2 * self.qubits

    @property
    def basis(self) -> FockBasis:
        return enumerate_basis(self.n, self.m)

    @property
    def indices(self) -> np.ndarray:
        return dual_rail_indices(self.qubits)

    def encode(self, logical_amplitudes) -> QuantumState:
        amps = np.asarray(logical_amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.qubits,):
            raise ValueError(
                f"expected {2**self.qubits} logical amplitudes, got {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"logical input norm {norm!r} is not 1 within {NORM_TOL}")
        fock = np.zeros(self.basis.size, dtype=np.complex128)
        fock[self.indices] = amps
        return QuantumState(self.basis, fock)

    def decode(self, state: QuantumState) -> tuple[np.ndarray, float]:
        if state.basis != self.basis:
            raise ValueError(
                f"state lives on {state.basis}, register needs {self.basis}"
            )
        logical = state.amplitudes[self.indices].copy()
        leakage = 1.0 - float(np.sum(np.abs(logical) ** 2))
        return logical, min(max(leakage, 0.0), 1.0)


def encode_dual_rail(qubit_amplitudes) -> QuantumState:
    """Map a unit vector over the 2^q computational basis to its dual-rail
    Fock state on (q, 2q)."""
    amps = np.asarray(qubit_amplitudes, dtype=np.complex128)
    q = int(round(math.log2(amps.size)))
    if 2**q != amps.size or q < 1:
        raise ValueError(f"logical vector length {amps.size} is not 2^q with q >= 1")
    return DualRailRegister(q).encode(amps)


def decode_dual_rail(state: QuantumState, qubits: int) -> tuple[np.ndarray, float]:
    """Inverse of :func:`encode_dual_rail`.

    Returns the (unnormalized) amplitudes on the dual-rail-supported
    components and the leakage: the population outside that subspace.
    """
    return DualRailRegister(qubits).decode(state)
