"""Orthonormal operator bases of the Hilbert-Schmidt space of d x d matrices."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

BASES = ("matrix_units", "gellmann", "unitary")


@lru_cache(maxsize=None)
def matrix_units(d: int) -> np.ndarray:
    """``|i><j|`` ordered row-major; shape ``(d*d, d, d)``."""
    out = np.zeros((d * d, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            out[i * d + j, i, j] = 1.0
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def gellmann(d: int) -> np.ndarray:
    """Normalized generalized Gell-Mann basis.

    Order: ``1/sqrt(d)``, then for each pair ``j < k`` the symmetric and
    antisymmetric off-diagonal elements, then the traceless diagonal ones.
    For ``d = 2`` this is ``(1, sx, sy, sz) / sqrt(2)``.
    """
    out = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j / np.sqrt(2)
            a[k, j] = 1j / np.sqrt(2)
            out += [s, a]
    for l in range(1, d):
        h = np.zeros((d, d), dtype=complex)
        h[:l, :l] = np.eye(l)
        h[l, l] = -l
        out.append(h / np.sqrt(l * (l + 1)))
    arr = np.array(out)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def unitary_basis(d: int) -> np.ndarray:
    """Shift-and-clock basis ``U_{a1,a2} / sqrt(d)``, index ``a1*d + a2``.

    ``U_{a1,a2} = sum_r exp(2 pi i r a2 / d) |a1 + r><r|``; element 0 is
    ``1/sqrt(d)`` and all others are traceless.
    """
    out = np.zeros((d * d, d, d), dtype=complex)
    for a1 in range(d):
        for a2 in range(d):
            for r in range(d):
                out[a1 * d + a2, (a1 + r) % d, r] = np.exp(2j * np.pi * r * a2 / d)
    out /= np.sqrt(d)
    out.setflags(write=False)
    return out


def basis_elements(name: str, d: int) -> np.ndarray:
    if name == "matrix_units":
        return matrix_units(d)
    if name == "gellmann":
        return gellmann(d)
    if name == "unitary":
        return unitary_basis(d)
    raise ValueError(f"unknown basis {name!r}; expected one of {BASES}")


def basis_change(name: str, d: int) -> np.ndarray:
    """Unitary ``S`` whose columns are ``vec(F_alpha)``.

    A matrix-unit transfer matrix ``T`` becomes ``S^dag T S`` in the basis.
    """
    f = basis_elements(name, d)
    return f.reshape(d * d, d * d).T
