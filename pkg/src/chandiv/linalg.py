"""Dense linear-algebra helpers for maps on d x d matrices.

Conventions used throughout the package:

* ``vec`` is row-major, ``vec(A)[i*d + j] = A[i, j]``; with it the map
  ``X -> A X B`` has the matrix ``kron(A, B.T)``.
* The Jamiolkowski operator is ``tau = (T (x) id)(omega)`` with
  ``omega = |Omega><Omega|`` and ``|Omega> = sum_i |ii> / sqrt(d)``.  The first
  tensor factor is the output of ``T``.
* The matrix-unit transfer matrix is ``T_hat = d * tau^Gamma`` where
  ``<ij|tau^Gamma|kl> = <ik|tau|jl>``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "vec",
    "unvec",
    "sandwich",
    "reshuffle",
    "choi_to_transfer",
    "transfer_to_choi",
    "ptrace_out",
    "ptrace_in",
    "hermitian_part",
    "psd_sqrt",
    "psd_inv_sqrt",
    "polar_unitary",
    "max_entangled",
]


def vec(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).reshape(-1)


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d)


def sandwich(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator matrix of ``X -> a X b`` in the row-major vec convention."""
    return np.kron(a, np.asarray(b).T)


def reshuffle(m: np.ndarray, d: int) -> np.ndarray:
    """The involution ``<ij|m^Gamma|kl> = <ik|m|jl>`` on d^2 x d^2 matrices."""
    return np.asarray(m).reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


def choi_to_transfer(tau: np.ndarray, d: int) -> np.ndarray:
    return d * reshuffle(tau, d)


def transfer_to_choi(t_hat: np.ndarray, d: int) -> np.ndarray:
    return reshuffle(t_hat, d) / d


def ptrace_out(m: np.ndarray, d: int) -> np.ndarray:
    """Trace over the first (output) factor, leaving the input marginal."""
    return np.einsum("aiaj->ij", np.asarray(m).reshape(d, d, d, d))


def ptrace_in(m: np.ndarray, d: int) -> np.ndarray:
    """Trace over the second (input) factor, leaving the output marginal."""
    return np.einsum("aibi->ab", np.asarray(m).reshape(d, d, d, d))


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(hermitian_part(m))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def psd_inv_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(hermitian_part(m))
    return (v / np.sqrt(w)) @ v.conj().T


def polar_unitary(m: np.ndarray) -> np.ndarray:
    """Unitary factor ``W`` of ``m = W |m|``.

    Built from the SVD, so zero singular values are resolved by pairing the
    left and right null spaces as the SVD returns them (the identity when
    ``m`` vanishes).
    """
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def max_entangled(d: int) -> np.ndarray:
    """Unit vector ``|Omega> = sum_i |ii> / sqrt(d)``."""
    return np.eye(d).reshape(-1).astype(complex) / np.sqrt(d)
