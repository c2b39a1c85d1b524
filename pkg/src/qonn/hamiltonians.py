"""Exact spin-chain and lattice-boson Hamiltonians, matrix-exponential
evolution, and training-pair generation for black-box dynamics learning.

Qubit ordering: qubit 0 is the most significant bit of the computational
index, so for two qubits the basis order is |00>, |01>, |10>, |11>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import FockBasis, QuantumState, encode_dual_rail, enumerate_basis
from .model import TrainingSet

HERMITIAN_TOL = 1e-10

_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)


@dataclass(frozen=True)
class IsingSpec:
    """Transverse-field spin model: B sum_i X_i + J sum_<ij> Z_i Z_j."""

    n_spins: int
    b_field: float = 1.0
    coupling: float = 1.0
    pairs: tuple = ()
    time: float = 1.0

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValueError(f"need at least one spin, got {self.n_spins}")
        pairs = tuple((int(i), int(j)) for i, j in self.pairs)
        for i, j in pairs:
            if not (0 <= i < self.n_spins and 0 <= j < self.n_spins) or i == j:
                raise ValueError(f"coupling ({i},{j}) invalid for {self.n_spins} spins")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def chain(cls, n_spins: int, b_field: float = 1.0, coupling: float = 1.0,
              time: float = 1.0) -> "IsingSpec":
        pairs = tuple((i, i + 1) for i in range(n_spins - 1))
        return cls(n_spins, b_field, coupling, pairs, time)

    def to_dict(self) -> dict:
        return {
            "n_spins": self.n_spins,
            "b_field": self.b_field,
            "coupling": self.coupling,
            "pairs": [list(p) for p in self.pairs],
            "time": self.time,
        }


@dataclass(frozen=True)
class BoseHubbardSpec:
    """Lattice bosons: omega sum n_i - t_hop sum_<ij> b+_i b_j + U/2 sum n_i(n_i-1)."""

    n_photons: int
    m_sites: int
    omega: float = 0.0
    t_hop: float = 1.0
    interaction: float = 0.0
    edges: tuple = ()
    time: float = 1.0

    def __post_init__(self):
        if self.n_photons < 0 or self.m_sites < 1:
            raise ValueError("need n_photons >= 0 and m_sites >= 1")
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        for i, j in edges:
            if not (0 <= i < self.m_sites and 0 <= j < self.m_sites) or i == j:
                raise ValueError(f"edge ({i},{j}) invalid for {self.m_sites} sites")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def plaquette(cls, n_photons: int = 2, **kwargs) -> "BoseHubbardSpec":
        """2x2 square lattice on 4 sites (modes 0,1 top row; 2,3 bottom)."""
        edges = ((0, 1), (1, 3), (3, 2), (2, 0))
        return cls(n_photons, 4, edges=edges, **kwargs)

    def to_dict(self) -> dict:
        return {
            "n_photons": self.n_photons,
            "m_sites": self.m_sites,
            "omega": self.omega,
            "t_hop": self.t_hop,
            "interaction": self.interaction,
            "edges": [list(e) for e in self.edges],
            "time": self.time,
        }


def _embed(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    out = np.eye(1, dtype=np.complex128)
    for k in range(n_sites):
        out = np.kron(out, op if k == site else np.eye(2, dtype=np.complex128))
    return out


def ising_matrix(spec: IsingSpec) -> np.ndarray:
    """Dense 2^n x 2^n Hermitian matrix of the spin Hamiltonian."""
    dim = 2**spec.n_spins
    h = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(spec.n_spins):
        h += spec.b_field * _embed(_PAULI_X, i, spec.n_spins)
    for i, j in spec.pairs:
        h += spec.coupling * (
            _embed(_PAULI_Z, i, spec.n_spins) @ _embed(_PAULI_Z, j, spec.n_spins)
        )
    return h


def bose_hubbard_matrix(spec: BoseHubbardSpec, basis: FockBasis) -> np.ndarray:
    """Dense Hermitian matrix on the (n_photons, m_sites) occupation basis.

    Hopping inserts both (i, j) and (j, i) directions with matrix element
    -t_hop * sqrt((n_i + 1) n_j) so the result is Hermitian.
    """
    if (basis.n, basis.m) != (spec.n_photons, spec.m_sites):
        raise ValueError(
            f"basis {basis} does not match ({spec.n_photons}, {spec.m_sites})"
        )
    occ = basis.states
    h = np.zeros((basis.size, basis.size), dtype=np.complex128)
    diag = spec.omega * occ.sum(axis=1) + 0.5 * spec.interaction * (
        occ * (occ - 1)
    ).sum(axis=1)
    np.fill_diagonal(h, diag)
    for src_idx, state in enumerate(occ):
        for i, j in spec.edges:
            for a, b in ((i, j), (j, i)):
                if state[b] == 0:
                    continue
                hopped = list(state)
                hopped[b] -= 1
                hopped[a] += 1
                dst_idx = basis.index(hopped)
                h[dst_idx, src_idx] += -spec.t_hop * math.sqrt(
                    (state[a] + 1) * state[b]
                )
    return h


def evolve_exact(hamiltonian, time: float, psi) -> np.ndarray:
    """exp(-i H t) psi via eigendecomposition; exactly norm-preserving."""
    h = np.asarray(hamiltonian, dtype=np.complex128)
    defect = np.abs(h - h.conj().T).max()
    if defect > HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
    vals, vecs = np.linalg.eigh(h)
    phases = np.exp(-1j * vals * time)
    return vecs @ (phases * (vecs.conj().T @ np.asarray(psi, dtype=np.complex128)))


def haar_random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Unit vector with i.i.d. complex-normal entries (Haar on the sphere)."""
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)


def make_ising_training_data(
    spec: IsingSpec, k_train: int, k_test: int, rng
) -> tuple[TrainingSet, TrainingSet]:
    """Haar-random spin states evolved under the exact propagator, both ends
    dual-rail encoded onto the (n, 2n) photonic basis."""
    gen = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    h = ising_matrix(spec)
    header = {"hamiltonian": "ising", "parameters": spec.to_dict()}

    def make_pairs(count):
        pairs = []
        for _ in range(count):
            psi_in = haar_random_state(2**spec.n_spins, gen)
            psi_out = evolve_exact(h, spec.time, psi_in)
            pairs.append((encode_dual_rail(psi_in), encode_dual_rail(psi_out)))
        return pairs

    train = TrainingSet(tuple(make_pairs(k_train)), dict(header, role="train"))
    test = TrainingSet(tuple(make_pairs(k_test)), dict(header, role="test"))
    return train, test


def make_bh_training_data(
    spec: BoseHubbardSpec, k_train: int, k_test: int, rng
) -> tuple[TrainingSet, TrainingSet]:
    """Haar-random states on the full (n, m) occupation basis evolved under
    the exact lattice propagator; no encoding step needed."""
    gen = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    basis = enumerate_basis(spec.n_photons, spec.m_sites)
    h = bose_hubbard_matrix(spec, basis)
    header = {"hamiltonian": "bose_hubbard", "parameters": spec.to_dict()}

    def make_pairs(count):
        pairs = []
        for _ in range(count):
            vec_in = haar_random_state(basis.size, gen)
            vec_out = evolve_exact(h, spec.time, vec_in)
            pairs.append((QuantumState(basis, vec_in), QuantumState(basis, vec_out)))
        return pairs

    train = TrainingSet(tuple(make_pairs(k_train)), dict(header, role="train"))
    test = TrainingSet(tuple(make_pairs(k_test)), dict(header, role="test"))
    return train, test
