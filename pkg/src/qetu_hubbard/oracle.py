"""Reference computations independent of the Pauli machinery.

The Fock-space Hamiltonian is assembled from occupation-basis ladder
operators with explicit antisymmetry signs, so agreement with the
Jordan-Wigner Pauli sum is a genuine cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hubbard import BONDS, CANONICAL_ORDER, N_MODES, ModelParams, mode_index


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with column-aligned eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    def distinct_levels(self, tol: float = 1e-9) -> np.ndarray:
        """Eigenvalues with degenerate copies removed."""
        ev = self.eigenvalues
        keep = np.r_[True, np.diff(ev) > tol]
        return ev[keep]


def annihilation_operator(mode: int, n_modes: int = N_MODES) -> np.ndarray:
    """Dense ``a_mode`` in the occupation basis (mode 0 = most significant bit)."""
    dim = 2**n_modes
    out = np.zeros((dim, dim))
    bit = 1 << (n_modes - 1 - mode)
    before = ~((1 << (n_modes - mode)) - 1) & (dim - 1)
    for state in range(dim):
        if state & bit:
            sign = -1.0 if bin(state & before).count("1") % 2 else 1.0
            out[state ^ bit, state] = sign
    return out


def fock_hamiltonian(p: ModelParams) -> np.ndarray:
    """Hubbard Hamiltonian ``-t sum (a+_i a_j + h.c.) + u sum (n_u - 1/2)(n_d - 1/2)``."""
    dim = 2**N_MODES
    a = [annihilation_operator(k) for k in range(N_MODES)]
    num = [ak.T @ ak for ak in a]
    eye = np.eye(dim)
    h = np.zeros((dim, dim))
    for site in (1, 2, 3, 4):
        nu = num[mode_index(f"{site}u")]
        nd = num[mode_index(f"{site}d")]
        h += p.u * (nu - eye / 2) @ (nd - eye / 2)
    for i, j in BONDS:
        for spin in ("u", "d"):
            ai, aj = a[mode_index(f"{i}{spin}")], a[mode_index(f"{j}{spin}")]
            h -= p.t * (ai.T @ aj + aj.T @ ai)
    return h.astype(complex)


def _check_hermitian(h: np.ndarray) -> None:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("matrix must be square")
    if np.abs(h - h.conj().T).max() > 1e-10:
        raise ValueError("matrix is not Hermitian")


def exact_spectrum(h: np.ndarray) -> Spectrum:
    """Full eigendecomposition with a deterministic eigenvector phase.

    Each eigenvector is rotated so that its largest-magnitude component is
    real and positive (the first such component on ties).
    """
    _check_hermitian(h)
    w, v = np.linalg.eigh(h)
    v = v.astype(complex)
    for k in range(v.shape[1]):
        col = v[:, k]
        j = int(np.argmax(np.round(np.abs(col), 12)))
        v[:, k] = col * (abs(col[j]) / col[j])
    return Spectrum(eigenvalues=w, eigenvectors=v)


def dense_expm(h: np.ndarray, tau: float) -> np.ndarray:
    """``exp(-i tau H)`` through the eigendecomposition."""
    _check_hermitian(h)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * tau * w)) @ v.conj().T


def initial_product_state() -> np.ndarray:
    """System state with spin-up sites 1..4 in 1,0,0,1 and spin-down in -,-,+,+.

    Returned as a 256-vector in Jordan-Wigner qubit order.
    """
    zero, one = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    plus, minus = np.array([1.0, 1.0]) / np.sqrt(2), np.array([1.0, -1.0]) / np.sqrt(2)
    local = {"1u": one, "2u": zero, "3u": zero, "4u": one, "1d": minus, "2d": minus, "3d": plus, "4d": plus}
    out = np.ones(1)
    for orb in CANONICAL_ORDER:
        out = np.kron(out, local[orb.label])
    return out.astype(complex)
