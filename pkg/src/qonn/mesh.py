"""Triangular interferometer meshes and their multi-photon Fock-space lift.

Phase convention for one two-mode unit on adjacent modes (i, i+1): an
external phase shifter ``phi`` on the upper input followed by a balanced
Mach-Zehnder enclosing the internal phase ``theta``:

    T(theta, phi) = i e^{i theta/2} [[e^{i phi} sin(theta/2),  cos(theta/2)],
                                     [e^{i phi} cos(theta/2), -sin(theta/2)]]

The unit equals the identity exactly at (theta, phi) = (pi, pi), and a
balanced 50:50 splitter (Hadamard up to the global factor i e^{i pi/4})
at (theta, phi) = (pi/2, 0).  A mesh of ``m`` modes has m(m-1)/2 units laid
out in the triangular staircase (columns c = 1..m-1, each column running
units (c-1, c), (c-2, c-1), ..., (0, 1)), for m(m-1) phases total.  Units
are applied to the state in layout order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numba import njit, prange

from .fock import FockBasis, enumerate_basis

TWO_PI = 2.0 * math.pi

IDENTITY_THETA = math.pi
IDENTITY_PHI = math.pi

UNITARY_REJECT_TOL = 1e-8


@lru_cache(maxsize=None)
def reck_layout(m: int) -> tuple[tuple[int, int], ...]:
    """Ordered adjacent-mode pairs of the triangular staircase."""
    if m < 1:
        raise ValueError(f"mode count must be positive, got {m}")
    return tuple((j, j + 1) for c in range(1, m) for j in range(c - 1, -1, -1))


def unit_count(m: int) -> int:
    return m * (m - 1) // 2


def phase_count(m: int) -> int:
    return m * (m - 1)


def wrap_phases(phases) -> np.ndarray:
    """Wrap real phases into (0, 2pi]; used only at serialization."""
    wrapped = np.mod(np.asarray(phases, dtype=np.float64), TWO_PI)
    wrapped[wrapped == 0.0] = TWO_PI
    return wrapped


@dataclass(frozen=True)
class MeshParams:
    """Phases of one triangular mesh: unit u holds (theta, phi) at slots
    (2u, 2u+1) of ``phases``.  Stored unconstrained in R; wrapped into
    (0, 2pi] only when serialized."""

    m: int
    phases: np.ndarray = field(repr=False)

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=np.float64)
        if phases.shape != (phase_count(self.m),):
            raise ValueError(
                f"mesh on {self.m} modes needs {phase_count(self.m)} phases, "
                f"got {phases.shape}"
            )
        phases = phases.copy()
        phases.flags.writeable = False
        object.__setattr__(self, "phases", phases)

    @property
    def layout(self) -> tuple[tuple[int, int], ...]:
        return reck_layout(self.m)

    def units(self):
        """Yield (mode_pair, theta, phi) in application order."""
        for u, pair in enumerate(self.layout):
            yield pair, float(self.phases[2 * u]), float(self.phases[2 * u + 1])

    def to_dict(self) -> dict:
        return {"m": self.m, "phases": [float(p) for p in wrap_phases(self.phases)]}

    @classmethod
    def from_dict(cls, data: dict) -> "MeshParams":
        return cls(int(data["m"]), np.asarray(data["phases"], dtype=np.float64))


def identity_phases(m: int) -> np.ndarray:
    """Phase vector at the convention's identity point (every unit passes
    its modes through unchanged)."""
    phases = np.empty(phase_count(m), dtype=np.float64)
    phases[0::2] = IDENTITY_THETA
    phases[1::2] = IDENTITY_PHI
    return phases


def random_mesh(m: int, rng) -> MeshParams:
    """Phases i.i.d. uniform on (0, 2pi], deterministic given the rng seed."""
    if m < 2:
        raise ValueError(f"need at least 2 modes for a mesh, got {m}")
    gen = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    phases = TWO_PI - gen.uniform(0.0, TWO_PI, size=phase_count(m))
    return MeshParams(m, phases)


@njit(cache=True)
def _synthesize(m, lower_modes, thetas, phis, active):
    u_mat = np.eye(m, dtype=np.complex128)
    for u in range(lower_modes.shape[0]):
        if not active[u]:
            continue
        i = lower_modes[u]
        half = 0.5 * thetas[u]
        g = 1j * (math.cos(half) + 1j * math.sin(half))
        ephi = math.cos(phis[u]) + 1j * math.sin(phis[u])
        a = g * ephi * math.sin(half)
        b = g * math.cos(half)
        c = g * ephi * math.cos(half)
        d = -g * math.sin(half)
        for col in range(m):
            x = u_mat[i, col]
            y = u_mat[i + 1, col]
            u_mat[i, col] = a * x + b * y
            u_mat[i + 1, col] = c * x + d * y
    return u_mat


def mesh_to_unitary(params: MeshParams, active=None) -> np.ndarray:
    """Product of the two-mode unit matrices over the triangular layout.

    ``active`` optionally disables units (a boolean per layout unit);
    disabled units act as identity and their phases are ignored.
    """
    layout = params.layout
    lower = np.array([pair[0] for pair in layout], dtype=np.int64)
    if active is None:
        mask = np.ones(len(layout), dtype=np.bool_)
    else:
        mask = np.asarray(active, dtype=np.bool_)
        if mask.shape != (len(layout),):
            raise ValueError(
                f"active mask needs one flag per unit ({len(layout)}), got {mask.shape}"
            )
    return _synthesize(params.m, lower, params.phases[0::2], params.phases[1::2], mask)


def mode_mask(m: int, allowed_modes) -> np.ndarray:
    """Unit mask keeping only units whose both modes are in ``allowed_modes``."""
    allowed = set(int(x) for x in allowed_modes)
    if not all(0 <= x < m for x in allowed):
        raise ValueError(f"allowed modes {sorted(allowed)} out of range for m={m}")
    return np.array(
        [i in allowed and j in allowed for i, j in reck_layout(m)], dtype=np.bool_
    )


def unitarity_defect(matrix) -> float:
    """Frobenius norm of U^dag U - I."""
    mat = np.asarray(matrix, dtype=np.complex128)
    eye = np.eye(mat.shape[0])
    return float(np.linalg.norm(mat.conj().T @ mat - eye))


@dataclass(frozen=True)
class TransferMatrix:
    """Multi-photon transfer matrix of a mode unitary on a Fock basis."""

    basis: FockBasis
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        if entries.shape != (self.basis.size, self.basis.size):
            raise ValueError(
                f"entries shape {entries.shape} does not match basis size "
                f"{self.basis.size}"
            )
        entries = entries.copy()
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    def apply(self, state):
        from .fock import QuantumState

        if state.basis != self.basis:
            raise ValueError(f"state basis {state.basis} != {self.basis}")
        return QuantumState(self.basis, self.entries @ state.amplitudes)


@lru_cache(maxsize=None)
def _ladder_tables(n: int, m: int):
    """Stacked occupation/index tables for adding one photon at a time.

    Returns (occ_all, occ_off, map_all, map_off, dims, src_modes, col_norms):
    level k = 0..n holds the (k, m) basis; map rows give, for each level-k
    state and mode i, the level-(k+1) index of state + e_i.
    """
    bases = [enumerate_basis(k, m) for k in range(n + 1)]
    dims = np.array([b.size for b in bases], dtype=np.int64)
    occ_off = np.zeros(n + 2, dtype=np.int64)
    for k in range(n + 1):
        occ_off[k + 1] = occ_off[k] + dims[k]
    occ_all = np.vstack([b.states for b in bases]).astype(np.int64)

    map_off = np.zeros(n + 1, dtype=np.int64)
    for k in range(n):
        map_off[k + 1] = map_off[k] + dims[k]
    map_rows = []
    for k in range(n):
        rows = np.empty((dims[k], m), dtype=np.int64)
        nxt = bases[k + 1]
        for idx, occ in enumerate(bases[k].states):
            occ = list(occ)
            for i in range(m):
                occ[i] += 1
                rows[idx, i] = nxt.index(occ)
                occ[i] -= 1
        map_rows.append(rows)
    map_all = (
        np.vstack(map_rows) if map_rows else np.zeros((0, m), dtype=np.int64)
    )

    top = bases[n]
    src_modes = np.zeros((top.size, max(n, 1)), dtype=np.int64)
    col_norms = np.empty(top.size, dtype=np.float64)
    for s, occ in enumerate(top.states):
        src_modes[s, :n] = np.repeat(np.arange(m), occ)
        col_norms[s] = math.sqrt(float(np.prod([math.factorial(int(x)) for x in occ])))
    for arr in (occ_all, map_all, dims, src_modes, col_norms, occ_off, map_off):
        arr.flags.writeable = False
    return occ_all, occ_off, map_all, map_off, dims, src_modes, col_norms


@njit(cache=True, parallel=True)
def _lift_kernel(u_mat, n, m, occ_all, occ_off, map_all, map_off, dims, src_modes,
                 col_norms, sqrt_table):
    size = dims[n]
    out = np.empty((size, size), dtype=np.complex128)
    for s in prange(size):
        vec = np.zeros(1, dtype=np.complex128)
        vec[0] = 1.0 + 0.0j
        for k in range(n):
            j = src_modes[s, k]
            nxt = np.zeros(dims[k + 1], dtype=np.complex128)
            for idx in range(dims[k]):
                amp = vec[idx]
                if amp == 0.0:
                    continue
                occ_row = occ_off[k] + idx
                map_row = map_off[k] + idx
                for i in range(m):
                    u = u_mat[i, j]
                    if u == 0.0:
                        continue
                    nxt[map_all[map_row, i]] += (
                        u * sqrt_table[occ_all[occ_row, i] + 1] * amp
                    )
            vec = nxt
        norm = col_norms[s]
        for t in range(size):
            out[t, s] = vec[t] / norm
    return out


def lift_entries(u_mat: np.ndarray, n: int, m: int) -> np.ndarray:
    """Raw transfer-matrix entries of ``u_mat`` on the (n, m) basis.

    Entry (T, S) equals perm(submatrix(U, T, S)) / sqrt(prod T_i! prod S_j!)
    with the submatrix built by repeating rows/columns per occupation; it is
    evaluated by injecting the S photons one at a time, which factors the
    permanent expansion instead of recomputing it per entry.
    """
    u_mat = np.ascontiguousarray(u_mat, dtype=np.complex128)
    if n == 0:
        return np.ones((1, 1), dtype=np.complex128)
    occ_all, occ_off, map_all, map_off, dims, src_modes, col_norms = _ladder_tables(n, m)
    sqrt_table = np.sqrt(np.arange(n + 2, dtype=np.float64))
    return _lift_kernel(
        u_mat, n, m, occ_all, occ_off, map_all, map_off, dims, src_modes,
        col_norms, sqrt_table,
    )


_LIFT_CACHE: dict = {}
_LIFT_CACHE_MAX = 64


def lift_to_fock(u_mat, basis: FockBasis) -> TransferMatrix:
    """Lift an m-mode unitary to its multi-photon transfer matrix.

    Rejects inputs whose unitarity defect exceeds 1e-8.  Results are cached
    per (matrix bytes, basis); the cache is bounded and FIFO-evicted.
    """
    mat = np.ascontiguousarray(u_mat, dtype=np.complex128)
    if mat.shape != (basis.m, basis.m):
        raise ValueError(f"matrix shape {mat.shape} does not match m={basis.m}")
    defect = unitarity_defect(mat)
    if defect > UNITARY_REJECT_TOL:
        raise ValueError(f"matrix is not unitary (defect {defect:.3e})")
    key = (mat.tobytes(), basis.n, basis.m)
    cached = _LIFT_CACHE.get(key)
    if cached is None:
        cached = TransferMatrix(basis, lift_entries(mat, basis.n, basis.m))
        if len(_LIFT_CACHE) >= _LIFT_CACHE_MAX:
            _LIFT_CACHE.pop(next(iter(_LIFT_CACHE)))
        _LIFT_CACHE[key] = cached
    return cached
