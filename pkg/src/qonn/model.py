"""The layered photonic network: linear meshes alternating with single-site
Kerr nonlinearities, forward evaluation, and the training cost.

One layer applies its lifted mesh unitary and then the Kerr phase
``exp(i * phi * sum_j max(n_j - 1, 0))`` on every occupation vector; the
cost of a parameter vector against K input/target pairs is one minus the
mean squared overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .fock import FockBasis, QuantumState, enumerate_basis
from .mesh import (
    MeshParams,
    identity_phases,
    mesh_to_unitary,
    phase_count,
    reck_layout,
    unit_count,
)

DEFAULT_KERR_PHI = math.pi


@lru_cache(maxsize=None)
def kerr_exponents(n: int, m: int) -> np.ndarray:
    """Per-basis-state integer sum_j max(n_j - 1, 0)."""
    basis = enumerate_basis(n, m)
    exps = np.maximum(basis.states - 1, 0).sum(axis=1).astype(np.int64)
    exps.flags.writeable = False
    return exps


def kerr_diagonal(basis: FockBasis, phi: float) -> np.ndarray:
    """Diagonal of the Kerr layer on ``basis``."""
    return np.exp(1j * phi * kerr_exponents(basis.n, basis.m))


def apply_kerr(state: QuantumState, phi: float) -> QuantumState:
    """Multiply each amplitude by its Kerr phase; norm is preserved exactly."""
    return QuantumState(state.basis, kerr_diagonal(state.basis, phi) * state.amplitudes)


@dataclass(frozen=True)
class TrainingSet:
    """K input/target state pairs on one shared basis."""

    pairs: tuple
    header: dict = field(default_factory=dict)

    def __post_init__(self):
        pairs = tuple((p[0], p[1]) for p in self.pairs)
        if len(pairs) < 1:
            raise ValueError("training set needs at least one pair")
        basis = pairs[0][0].basis
        for inp, out in pairs:
            if inp.basis != basis or out.basis != basis:
                raise ValueError("all training states must share one basis")
        object.__setattr__(self, "pairs", pairs)

    @property
    def basis(self) -> FockBasis:
        return self.pairs[0][0].basis

    def __len__(self) -> int:
        return len(self.pairs)

    def input_matrix(self) -> np.ndarray:
        return np.stack([p[0].amplitudes for p in self.pairs], axis=1)

    def target_matrix(self) -> np.ndarray:
        return np.stack([p[1].amplitudes for p in self.pairs], axis=1)

    def to_dict(self) -> dict:
        return {
            "header": dict(self.header),
            "pairs": [
                {"input": inp.to_dict(), "output": out.to_dict()}
                for inp, out in self.pairs
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainingSet":
        pairs = [
            (QuantumState.from_dict(p["input"]), QuantumState.from_dict(p["output"]))
            for p in data["pairs"]
        ]
        return cls(tuple(pairs), dict(data.get("header", {})))


@dataclass(frozen=True)
class QonnModel:
    """N-layer network on the (n, m) Fock basis.

    ``theta`` concatenates the m(m-1) mesh phases of every layer.  ``masks``
    optionally restricts each layer's mesh connectivity (a boolean per
    layout unit; disabled units act as identity and their theta slots are
    ignored).
    """

    n: int
    m: int
    layers: int
    theta: np.ndarray = field(repr=False)
    phi: float = DEFAULT_KERR_PHI
    masks: tuple | None = None

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        expected = self.layers * phase_count(self.m)
        if theta.shape != (expected,):
            raise ValueError(
                f"theta needs length {expected} "
                f"(= layers * m(m-1)), got {theta.shape}"
            )
        theta = theta.copy()
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)
        if self.masks is not None:
            if len(self.masks) != self.layers:
                raise ValueError("need one connectivity mask per layer")
            masks = []
            for mask in self.masks:
                arr = np.asarray(mask, dtype=np.bool_)
                if arr.shape != (unit_count(self.m),):
                    raise ValueError(
                        f"mask needs one flag per unit ({unit_count(self.m)})"
                    )
                arr = arr.copy()
                arr.flags.writeable = False
                masks.append(arr)
            object.__setattr__(self, "masks", tuple(masks))

    @property
    def basis(self) -> FockBasis:
        return enumerate_basis(self.n, self.m)

    def layer_phases(self, layer: int) -> np.ndarray:
        width = phase_count(self.m)
        return self.theta[layer * width : (layer + 1) * width]

    def layer_mask(self, layer: int):
        return None if self.masks is None else self.masks[layer]

    def layer_unitary(self, layer: int) -> np.ndarray:
        return mesh_to_unitary(
            MeshParams(self.m, self.layer_phases(layer)), self.layer_mask(layer)
        )

    def active_indices(self) -> np.ndarray:
        """Theta slots actually used by the network (masked units excluded)."""
        if self.masks is None:
            return np.arange(self.theta.size)
        width = phase_count(self.m)
        keep = []
        for layer in range(self.layers):
            base = layer * width
            for u, flag in enumerate(self.masks[layer]):
                if flag:
                    keep.extend((base + 2 * u, base + 2 * u + 1))
        return np.array(keep, dtype=np.int64)

    def effective_theta(self) -> np.ndarray:
        """Theta with masked slots pinned to the identity point, so the
        vector alone reproduces the network without connectivity metadata."""
        if self.masks is None:
            return self.theta.copy()
        theta = np.empty_like(self.theta)
        width = phase_count(self.m)
        ident = identity_phases(self.m)
        for layer in range(self.layers):
            base = layer * width
            block = self.theta[base : base + width].copy()
            for u, flag in enumerate(self.masks[layer]):
                if not flag:
                    block[2 * u : 2 * u + 2] = ident[2 * u : 2 * u + 2]
            theta[base : base + width] = block
        return theta

    def with_theta(self, theta) -> "QonnModel":
        return QonnModel(self.n, self.m, self.layers, theta, self.phi, self.masks)

    def propagate(self, columns: np.ndarray) -> np.ndarray:
        """Apply the full network to a (basis_size, K) stack of amplitude
        columns; the K columns share each layer's lifted matrix."""
        from .mesh import lift_entries

        diag = kerr_diagonal(self.basis, self.phi)
        out = np.asarray(columns, dtype=np.complex128)
        squeeze = out.ndim == 1
        if squeeze:
            out = out[:, None]
        if out.shape[0] != self.basis.size:
            raise ValueError(
                f"column length {out.shape[0]} does not match basis size "
                f"{self.basis.size}"
            )
        for layer in range(self.layers):
            lifted = lift_entries(self.layer_unitary(layer), self.n, self.m)
            out = lifted @ out
            out = diag[:, None] * out
        return out[:, 0] if squeeze else out

    def transfer_columns(self, indices) -> np.ndarray:
        """Columns of the full network matrix at the given basis indices."""
        cols = np.zeros((self.basis.size, len(indices)), dtype=np.complex128)
        cols[np.asarray(indices, dtype=np.int64), np.arange(len(indices))] = 1.0
        return self.propagate(cols)

    def transfer_matrix(self) -> np.ndarray:
        return self.propagate(np.eye(self.basis.size, dtype=np.complex128))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "layers": self.layers,
            "phi": float(self.phi),
            "theta": [float(x) for x in self.effective_theta()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QonnModel":
        return cls(
            int(data["n"]),
            int(data["m"]),
            int(data["layers"]),
            np.asarray(data["theta"], dtype=np.float64),
            float(data.get("phi", DEFAULT_KERR_PHI)),
        )


def identity_model(n: int, m: int, layers: int, phi: float = DEFAULT_KERR_PHI) -> QonnModel:
    theta = np.tile(identity_phases(m), layers)
    return QonnModel(n, m, layers, theta, phi)


def forward(model: QonnModel, state: QuantumState) -> QuantumState:
    """Run one state through the network."""
    if state.basis != model.basis:
        raise ValueError(f"state basis {state.basis} != model basis {model.basis}")
    return QuantumState(model.basis, model.propagate(state.amplitudes))


def cost(model: QonnModel, train: TrainingSet) -> float:
    """One minus the mean squared overlap between network outputs and
    targets; 0 iff every pair matches up to a global phase."""
    if train.basis != model.basis:
        raise ValueError(f"training basis {train.basis} != model basis {model.basis}")
    outs = model.propagate(train.input_matrix())
    overlaps = np.abs(np.sum(train.target_matrix().conj() * outs, axis=0)) ** 2
    return float(min(1.0, max(0.0, 1.0 - overlaps.mean())))


def mean_test_error(model: QonnModel, test: TrainingSet) -> float:
    """Cost evaluated on held-out pairs."""
    return cost(model, test)


@lru_cache(maxsize=None)
def _reference_mask(n: int, m: int, qubits: tuple) -> np.ndarray:
    basis = enumerate_basis(n, m)
    mask = np.ones(basis.size, dtype=bool)
    for k in qubits:
        mask &= (basis.states[:, 2 * k] == 1) & (basis.states[:, 2 * k + 1] == 0)
    mask.flags.writeable = False
    return mask


def reference_qubit_fidelity(state: QuantumState, qubits_to_check) -> float:
    """Probability that every listed dual-rail qubit holds exactly one photon
    in its top mode (logical 0), marginalizing over all other modes."""
    m = state.basis.m
    if m % 2 != 0:
        raise ValueError(f"basis with {m} modes is not dual-rail compatible")
    qubits = tuple(sorted(int(q) for q in qubits_to_check))
    if any(q < 0 or 2 * q + 1 >= m for q in qubits):
        raise ValueError(f"qubit indices {qubits} out of range for {m // 2} qubits")
    mask = _reference_mask(state.basis.n, m, qubits)
    return float(np.sum(np.abs(state.amplitudes[mask]) ** 2))
