"""Entanglement and diagnostic observables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import SpaceLayout, annihilation, embed, named_state

__all__ = [
    "DarkState",
    "concurrence",
    "dark_state",
    "populations",
    "fidelity_pure",
    "purity",
    "mean_photon_number",
    "trace_distance",
]

# sigma_y (x) sigma_y on the fixed two-qubit basis order (ee, eg, ge, gg):
# antidiagonal (-1, +1, +1, -1).
_SPIN_FLIP = np.zeros((4, 4), dtype=complex)
_SPIN_FLIP[0, 3] = -1.0
_SPIN_FLIP[1, 2] = 1.0
_SPIN_FLIP[2, 1] = 1.0
_SPIN_FLIP[3, 0] = -1.0


def concurrence(rho: np.ndarray, *, imag_tol: float = 1e-8, clip_tol: float = 1e-10) -> float:
    """Wootters concurrence of a 4x4 two-qubit density matrix.

    C = max(0, l1 - l2 - l3 - l4) where the l_i are the decreasingly
    ordered square roots of the eigenvalues of rho * rho_tilde, with
    rho_tilde = (sy (x) sy) rho^* (sy (x) sy).  Eigenvalues with tiny
    negative real parts (above -clip_tol) are clipped to zero before the
    square root; an imaginary part beyond imag_tol signals a broken input.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"two-qubit density matrix must be 4x4, got shape {rho.shape}")
    rho_tilde = _SPIN_FLIP @ rho.conj() @ _SPIN_FLIP
    evals = np.linalg.eigvals(rho @ rho_tilde)
    if np.max(np.abs(evals.imag)) > imag_tol:
        raise ValueError(
            f"rho*rho_tilde eigenvalue has imaginary part {np.max(np.abs(evals.imag)):.3e}"
        )
    re = evals.real
    if np.min(re) < -clip_tol:
        raise ValueError(f"rho*rho_tilde eigenvalue {np.min(re):.3e} below -{clip_tol}")
    lam = np.sqrt(np.clip(re, 0.0, None))
    lam.sort()
    return float(max(0.0, lam[3] - lam[2] - lam[1] - lam[0]))


@dataclass(frozen=True)
class DarkState:
    """Coefficients of the dark state on (E, PsiMinus): c_e*|E> + c_psi_minus*|PsiMinus>."""

    c_e: float
    c_psi_minus: float

    def reduced_vector(self) -> np.ndarray:
        """3-vector on the ordered basis (E, PsiPlus, PsiMinus); middle entry is 0."""
        return np.array([self.c_e, 0.0, self.c_psi_minus], dtype=complex)

    def full_vector(self, layout: SpaceLayout) -> np.ndarray:
        return self.c_e * named_state("E", layout) + self.c_psi_minus * named_state(
            "PsiMinus", layout
        )


def dark_state(g: float, delta: float) -> DarkState:
    """Dark state -delta/sqrt(delta^2+2g^2) |E> + sqrt(2)g/sqrt(delta^2+2g^2) |PsiMinus>.

    Undefined at g = delta = 0, where the whole subspace is degenerate.
    """
    if g == 0.0 and delta == 0.0:
        raise ValueError("dark state undefined at g = delta = 0")
    norm = np.sqrt(delta**2 + 2.0 * g**2)
    return DarkState(c_e=-delta / norm, c_psi_minus=np.sqrt(2.0) * g / norm)


def fidelity_pure(rho: np.ndarray, psi: np.ndarray) -> float:
    """Overlap <psi|rho|psi> of a state with a pure reference vector."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    if rho.shape != (psi.size, psi.size):
        raise ValueError(
            f"dimension mismatch: rho shape {rho.shape}, vector length {psi.size}"
        )
    return float(np.real(psi.conj() @ rho @ psi))


def purity(rho: np.ndarray) -> float:
    """tr(rho^2)."""
    return float(np.real(np.trace(rho @ rho)))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Trace distance (1/2)*||rho - sigma||_1 between two Hermitian matrices."""
    diff = np.asarray(rho, dtype=complex) - np.asarray(sigma, dtype=complex)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def mean_photon_number(rho: np.ndarray, layout: SpaceLayout) -> float:
    """tr(rho a^dag a) on the full composite space."""
    a = embed(annihilation(layout.fock_cutoff), 2, layout)
    return float(np.real(np.trace(rho @ (a.conj().T @ a))))


def populations(rho: np.ndarray, layout: SpaceLayout) -> dict[str, float]:
    """Named-state populations and the mean photon number.

    Keys: P_G0, P_E, P_PsiPlus, P_PsiMinus, n_mode.
    """
    d = layout.dim
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (d, d):
        raise ValueError(f"density matrix shape {rho.shape} does not match layout dimension {d}")
    out = {
        f"P_{name}": fidelity_pure(rho, named_state(name, layout))
        for name in ("G0", "E", "PsiPlus", "PsiMinus")
    }
    out["n_mode"] = mean_photon_number(rho, layout)
    return out
