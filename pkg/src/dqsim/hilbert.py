"""Composite Hilbert space of two qubits and one truncated bosonic mode.

The tensor-factor order is fixed everywhere as (qubit 1, qubit 2, mode):
the basis element (q1, q2, n) sits at index q1*2*(N+1) + q2*(N+1) + n,
where N is the Fock cutoff (levels 0..N are kept).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpaceLayout",
    "SIGMA_MINUS",
    "SIGMA_PLUS",
    "SIGMA_EE",
    "annihilation",
    "embed",
    "named_state",
    "two_qubit_state",
    "partial_trace_mode",
    "basis_index",
    "check_density_matrix",
]

# Single-qubit operators on the (|e>, |g>) basis ordering used throughout:
# index 0 = excited, index 1 = ground.
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |g><e|
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)   # |e><g|
SIGMA_EE = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)     # |e><e|


@dataclass(frozen=True)
class SpaceLayout:
    """Dimension bookkeeping for the qubit-qubit-mode product space.

    Parameters
    ----------
    fock_cutoff : int
        Highest retained Fock number N (mode dimension is N+1).
    """

    fock_cutoff: int

    def __post_init__(self):
        if self.fock_cutoff < 1:
            raise ValueError(f"fock_cutoff must be >= 1, got {self.fock_cutoff}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (2, 2, self.fock_cutoff + 1)

    @property
    def dim(self) -> int:
        return 4 * (self.fock_cutoff + 1)


def basis_index(q1: int, q2: int, n: int, layout: SpaceLayout) -> int:
    """Flat index of the basis element (q1, q2, n); qubit index 0 = excited."""
    nm = layout.fock_cutoff + 1
    if not (0 <= q1 < 2 and 0 <= q2 < 2 and 0 <= n < nm):
        raise ValueError(f"basis labels ({q1}, {q2}, {n}) out of range")
    return q1 * 2 * nm + q2 * nm + n


def annihilation(fock_cutoff: int) -> np.ndarray:
    """Truncated mode annihilation operator, <n-1|a|n> = sqrt(n)."""
    if fock_cutoff < 1:
        raise ValueError(f"fock_cutoff must be >= 1, got {fock_cutoff}")
    return np.diag(np.sqrt(np.arange(1, fock_cutoff + 1, dtype=float)), k=1).astype(complex)


def embed(op: np.ndarray, slot: int, layout: SpaceLayout) -> np.ndarray:
    """Lift a single-subsystem operator to the full space.

    ``slot`` is 0 (qubit 1), 1 (qubit 2) or 2 (mode); identities fill the
    remaining tensor factors in the fixed subsystem order.
    """
    dims = layout.dims
    if slot not in (0, 1, 2):
        raise ValueError(f"slot must be 0, 1 or 2, got {slot}")
    op = np.asarray(op, dtype=complex)
    if op.shape != (dims[slot], dims[slot]):
        raise ValueError(
            f"operator shape {op.shape} does not match subsystem dimension {dims[slot]} at slot {slot}"
        )
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[slot] = op
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


# Amplitudes of the named states on the two-qubit basis (ee, eg, ge, gg).
_TWO_QUBIT_STATES = {
    "G": np.array([0, 0, 0, 1], dtype=complex),
    "PhiPlus": np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2),
    "PhiMinus": np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2),
}


def two_qubit_state(name: str) -> np.ndarray:
    """Two-qubit state vector on basis (ee, eg, ge, gg): G, PhiPlus or PhiMinus."""
    if name not in _TWO_QUBIT_STATES:
        raise ValueError(f"unknown two-qubit state {name!r}")
    return _TWO_QUBIT_STATES[name].copy()


def named_state(name: str, layout: SpaceLayout) -> np.ndarray:
    """Full-space state vector: G0, E, PsiPlus or PsiMinus.

    G0 = |g,g>|0>, E = |g,g>|1>, PsiPlus/PsiMinus = (|e,g> +/- |g,e>)/sqrt(2) |0>.
    """
    nm = layout.fock_cutoff + 1
    mode = {"G0": 0, "E": 1, "PsiPlus": 0, "PsiMinus": 0}
    qubits = {"G0": "G", "E": "G", "PsiPlus": "PhiPlus", "PsiMinus": "PhiMinus"}
    if name not in mode:
        raise ValueError(f"unknown state name {name!r}")
    fock = np.zeros(nm, dtype=complex)
    fock[mode[name]] = 1.0
    return np.kron(_TWO_QUBIT_STATES[qubits[name]], fock)


def partial_trace_mode(rho: np.ndarray, layout: SpaceLayout) -> np.ndarray:
    """Trace out the mode, returning the 4x4 two-qubit density matrix."""
    d = layout.dim
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (d, d):
        raise ValueError(f"density matrix shape {rho.shape} does not match layout dimension {d}")
    nm = layout.fock_cutoff + 1
    r = rho.reshape(4, nm, 4, nm)
    return np.einsum("anbn->ab", r)


def check_density_matrix(
    rho: np.ndarray,
    *,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-8,
    positivity_tol: float = 1e-8,
) -> None:
    """Raise ValueError if rho is not a valid density matrix within tolerance."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > herm_tol:
        raise ValueError(f"density matrix not Hermitian: max |rho - rho^dag| = {herm:.3e}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr} deviates from 1 beyond {trace_tol}")
    lam_min = np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))
    if lam_min < -positivity_tol:
        raise ValueError(f"density matrix has eigenvalue {lam_min:.3e} below -{positivity_tol}")
