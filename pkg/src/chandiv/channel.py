"""Linear maps on d x d matrices: representations, conversions and determinants.

A map is stored through its Jamiolkowski operator ``tau = (T (x) id)(omega)``;
Kraus operators and transfer matrices are derived on demand and cached.
:class:`Channel` adds the trace-preserving requirement.  Complete positivity
is *not* a construction requirement (the matrix transposition is a valid
:class:`Channel`); use :func:`validate` or :attr:`LinearMap.is_cp`.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from . import linalg as la
from .bases import BASES, basis_change
from .errors import (
    DimensionMismatch,
    InvalidInput,
    NegativeChoi,
    NotHermitian,
    NotTracePreserving,
    NumericalFailure,
    SingularNormalization,
)

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "KrausRep",
    "ChoiState",
    "TransferMatrix",
    "LinearMap",
    "Channel",
    "StructureReport",
    "PurityBounds",
    "build_channel",
    "build_map",
    "convert",
    "apply",
    "compose",
    "dual",
    "validate",
    "determinant",
    "purity_and_bounds",
    "distance",
    "identity_channel",
    "unitary_channel",
    "depolarizing_channel",
    "filter_map",
    "minimal_determinant_channel",
    "transposition_channel",
    "rebalance_to_tp",
]


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds.

    ``psd_tol`` is relative to the largest Choi eigenvalue, ``rank_rel_tol``
    to the largest Choi eigenvalue magnitude; the rest are absolute.
    """

    herm_tol: float = 1e-9
    trace_tol: float = 1e-9
    psd_tol: float = 1e-9
    tp_tol: float = 1e-9
    norm_tol: float = 1e-9
    rank_rel_tol: float = 1e-7
    conv_tol: float = 1e-12

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"tolerance {f.name} must be positive")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True, eq=False)
class KrausRep:
    operators: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops:
            raise DimensionMismatch("a Kraus representation needs at least one operator")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self):
        return len(self.operators)


@dataclass(frozen=True, eq=False)
class ChoiState:
    tau: np.ndarray

    @property
    def dim(self) -> int:
        return _dim_from_square(np.asarray(self.tau))


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    mat: np.ndarray
    basis: str = "matrix_units"

    @property
    def dim(self) -> int:
        return _dim_from_square(np.asarray(self.mat))


Representation = Union[KrausRep, ChoiState, TransferMatrix]


def _dim_from_square(m: np.ndarray) -> int:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square d^2 x d^2 matrix, got shape {m.shape}")
    d = int(round(np.sqrt(m.shape[0])))
    if d * d != m.shape[0]:
        raise DimensionMismatch(f"matrix size {m.shape[0]} is not a perfect square")
    if d < 2:
        raise DimensionMismatch("maps on 1 x 1 matrices are not supported")
    return d


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


class LinearMap:
    """Hermiticity-preserving linear map on d x d matrices.

    Parameters
    ----------
    choi : ndarray, shape (d*d, d*d)
        Jamiolkowski operator ``(T (x) id)(omega)``; output factor first.
    tol : Tolerances
    """

    def __init__(self, choi, tol: Tolerances = DEFAULT_TOL):
        choi = np.asarray(choi, dtype=complex)
        d = _dim_from_square(choi)
        if not np.all(np.isfinite(choi)):
            raise InvalidInput("Choi matrix has non-finite entries")
        herm_err = np.max(np.abs(choi - choi.conj().T))
        if herm_err > tol.herm_tol:
            raise NotHermitian(f"Choi matrix is not Hermitian (deviation {herm_err:.3g})")
        self.dim = d
        self.tol = tol
        self.choi = _frozen(la.hermitian_part(choi))

    # -- representations -------------------------------------------------
    @cached_property
    def transfer(self) -> np.ndarray:
        """Transfer matrix in the matrix-unit basis (``d tau^Gamma``)."""
        return _frozen(la.choi_to_transfer(self.choi, self.dim))

    def transfer_in(self, basis: str = "matrix_units") -> np.ndarray:
        if basis == "matrix_units":
            return self.transfer
        s = basis_change(basis, self.dim)
        return s.conj().T @ self.transfer @ s

    @cached_property
    def choi_eigh(self):
        w, v = np.linalg.eigh(self.choi)
        return w[::-1].copy(), v[:, ::-1].copy()

    @property
    def choi_eigenvalues(self) -> np.ndarray:
        return self.choi_eigh[0]

    @cached_property
    def kraus(self) -> tuple:
        """Canonical Kraus operators, ordered by descending Choi eigenvalue.

        The phase of each operator makes its largest-magnitude entry real
        positive.
        """
        w, v = self.choi_eigh
        lmax = max(w[0], 0.0)
        if w[-1] < -self.tol.psd_tol * max(lmax, 1.0):
            raise NegativeChoi(f"map is not completely positive (min Choi eigenvalue {w[-1]:.3g})")
        d = self.dim
        ops = []
        for lam, vecr in zip(w, v.T):
            if lam <= self.tol.rank_rel_tol * lmax:
                break
            k = np.sqrt(d * lam) * vecr.reshape(d, d)
            flat = k.reshape(-1)
            p = flat[np.argmax(np.abs(flat))]
            ops.append(k * (abs(p) / p))
        return tuple(_frozen(k) for k in ops)

    # -- structure -------------------------------------------------------
    @property
    def kraus_rank(self) -> int:
        w = np.abs(self.choi_eigenvalues)
        return int(np.sum(w > self.tol.rank_rel_tol * w.max()))

    @property
    def is_cp(self) -> bool:
        w = self.choi_eigenvalues
        return bool(w[-1] >= -self.tol.psd_tol * max(w[0], 1.0 / self.dim**2))

    @property
    def tp_defect(self) -> float:
        d = self.dim
        return float(np.max(np.abs(la.ptrace_out(d * self.choi, d) - np.eye(d))))

    @property
    def is_tp(self) -> bool:
        return self.tp_defect <= self.tol.tp_tol

    @property
    def is_unital(self) -> bool:
        d = self.dim
        err = np.linalg.norm(self.apply(np.eye(d)) - np.eye(d))
        return bool(err <= self.tol.tp_tol * d)

    # -- action ----------------------------------------------------------
    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"input has shape {rho.shape}, map acts on {self.dim}x{self.dim}")
        return la.unvec(self.transfer @ la.vec(rho), self.dim)

    __call__ = apply

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        return compose(self, other)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, kraus_rank={self.kraus_rank})"


class Channel(LinearMap):
    """Trace-preserving Hermiticity-preserving map (not necessarily CP)."""

    def __init__(self, choi, tol: Tolerances = DEFAULT_TOL):
        super().__init__(choi, tol)
        tr = np.trace(self.choi).real
        if abs(tr - 1) > tol.trace_tol or self.tp_defect > tol.tp_tol:
            raise NotTracePreserving(
                f"map is not trace preserving (defect {self.tp_defect:.3g}, tr tau = {tr:.12g})"
            )


# ---------------------------------------------------------------------------
# construction and conversion
# ---------------------------------------------------------------------------

def _choi_from_rep(rep: Representation, tol: Tolerances) -> np.ndarray:
    if isinstance(rep, KrausRep):
        d = rep.dim
        for k in rep.operators:
            if k.shape != (d, d):
                raise DimensionMismatch("Kraus operators must all be d x d")
            if not np.all(np.isfinite(k)):
                raise InvalidInput("Kraus operator has non-finite entries")
        vs = np.array([la.vec(k) for k in rep.operators])
        return vs.T @ vs.conj() / d
    if isinstance(rep, ChoiState):
        return np.asarray(rep.tau, dtype=complex)
    if isinstance(rep, TransferMatrix):
        m = np.asarray(rep.mat, dtype=complex)
        d = _dim_from_square(m)
        if not np.all(np.isfinite(m)):
            raise InvalidInput("transfer matrix has non-finite entries")
        if rep.basis not in BASES:
            raise ValueError(f"unknown basis {rep.basis!r}")
        if rep.basis != "matrix_units":
            s = basis_change(rep.basis, d)
            m = s @ m @ s.conj().T
        return la.transfer_to_choi(m, d)
    raise TypeError(f"unsupported representation {type(rep).__name__}")


def _attach(m: LinearMap, rep: Representation) -> LinearMap:
    # cached_property stores in __dict__, so pre-seeding the cache is a plain write.
    # Kraus input is not cached: extraction from the Choi matrix is canonical.
    if isinstance(rep, TransferMatrix) and rep.basis == "matrix_units":
        m.__dict__["transfer"] = _frozen(rep.mat)
    return m


def build_channel(rep: Representation, tol: Tolerances = DEFAULT_TOL) -> Channel:
    """Build a trace-preserving :class:`Channel` from any representation."""
    if isinstance(rep, KrausRep):
        d = rep.dim
        s = sum(k.conj().T @ k for k in rep.operators)
        if s.shape == (d, d) and np.max(np.abs(s - np.eye(d))) > tol.tp_tol:
            raise NotTracePreserving("Kraus operators do not satisfy sum K^dag K = 1")
    return _attach(Channel(_choi_from_rep(rep, tol), tol), rep)


def build_map(rep: Representation, tol: Tolerances = DEFAULT_TOL) -> LinearMap:
    """Like :func:`build_channel` without the trace-preservation requirement."""
    return _attach(LinearMap(_choi_from_rep(rep, tol), tol), rep)


def _same_kind(m: LinearMap, choi: np.ndarray) -> LinearMap:
    cls = Channel if isinstance(m, Channel) else LinearMap
    return cls(choi, m.tol)


def convert(ch: LinearMap, target: str, basis: str = "matrix_units") -> Representation:
    """Return ``ch`` as ``"kraus"``, ``"choi"`` or ``"transfer"`` (in ``basis``)."""
    if target == "kraus":
        return KrausRep(ch.kraus)
    if target == "choi":
        return ChoiState(np.array(ch.choi))
    if target == "transfer":
        return TransferMatrix(np.array(ch.transfer_in(basis)), basis)
    raise ValueError(f"unknown representation {target!r}")


def apply(ch: LinearMap, rho) -> np.ndarray:
    return ch.apply(rho)


def compose(t1: LinearMap, t2: LinearMap) -> LinearMap:
    """The map ``t1 o t2`` (``t2`` acts first); transfer matrix ``T1 T2``."""
    if t1.dim != t2.dim:
        raise DimensionMismatch(f"cannot compose maps on dimensions {t1.dim} and {t2.dim}")
    mat = t1.transfer @ t2.transfer
    choi = la.transfer_to_choi(mat, t1.dim)
    cls = Channel if isinstance(t1, Channel) and isinstance(t2, Channel) else LinearMap
    out = cls(choi, t1.tol)
    out.__dict__["transfer"] = _frozen(mat)
    return out


def dual(ch: LinearMap) -> LinearMap:
    """Hilbert-Schmidt adjoint; its transfer matrix is ``T^dag``."""
    mat = ch.transfer.conj().T
    return LinearMap(la.transfer_to_choi(mat, ch.dim), ch.tol)


# ---------------------------------------------------------------------------
# structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StructureReport:
    is_hermiticity_preserving: bool
    is_trace_preserving: bool
    is_unital: bool
    is_completely_positive: bool
    kraus_rank: int
    choi_eigenvalues: tuple
    det: float
    purity: float


def determinant(ch: LinearMap) -> float:
    """Real determinant of the transfer matrix (LU factorization)."""
    try:
        det = np.linalg.det(ch.transfer)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailure(str(exc)) from exc
    if abs(det.imag) >= 1e-8:
        raise NumericalFailure(f"determinant has imaginary residue {det.imag:.3g}")
    return float(det.real)


def validate(ch: LinearMap) -> StructureReport:
    try:
        w = ch.choi_eigenvalues
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailure(str(exc)) from exc
    # the Gell-Mann transfer matrix is real exactly when T(X^dag) = T(X)^dag
    hp = bool(np.max(np.abs(ch.transfer_in("gellmann").imag)) <= ch.tol.herm_tol * ch.dim)
    return StructureReport(
        is_hermiticity_preserving=hp,
        is_trace_preserving=ch.is_tp,
        is_unital=ch.is_unital,
        is_completely_positive=ch.is_cp,
        kraus_rank=ch.kraus_rank,
        choi_eigenvalues=tuple(float(x) for x in w),
        det=determinant(ch),
        purity=float(np.sum(w**2)),
    )


@dataclass(frozen=True)
class PurityBounds:
    purity: float
    mu: float
    det: float
    overlap: float
    det_bound_ok: bool
    mu3_bound_ok: bool


def purity_and_bounds(ch: Channel) -> PurityBounds:
    """Purity bound on the determinant and the largest-eigenvalue overlap bound.

    ``overlap`` is ``<Omega|tau_0|Omega>`` with ``tau_0`` the Jamiolkowski
    operator of ``T U_0`` and ``U_0`` the optimal unitary conjugation.
    """
    from .markov import optimal_unitary

    d = ch.dim
    w = ch.choi_eigenvalues
    purity = float(np.sum(w**2))
    mu = float(w[0])
    det = determinant(ch)
    u0, _ = optimal_unitary(ch)
    tau0 = compose(ch, unitary_channel(u0)).choi
    om = la.max_entangled(d)
    overlap = float((om.conj() @ tau0 @ om).real)
    return PurityBounds(
        purity=purity,
        mu=mu,
        det=det,
        overlap=overlap,
        det_bound_ok=det <= purity ** (d * d / 2) + 1e-10,
        mu3_bound_ok=overlap >= mu**3 - 1e-10,
    )


def distance(t1: LinearMap, t2: LinearMap) -> float:
    """Operator norm ``||T1 - T2||`` on the Hilbert-Schmidt space."""
    if t1.dim != t2.dim:
        raise DimensionMismatch(f"dimensions differ: {t1.dim} vs {t2.dim}")
    return float(np.linalg.norm(t1.transfer - t2.transfer, 2))


# ---------------------------------------------------------------------------
# named maps
# ---------------------------------------------------------------------------

def _from_transfer(mat, cls=Channel, tol=DEFAULT_TOL):
    d = _dim_from_square(np.asarray(mat))
    out = cls(la.transfer_to_choi(mat, d), tol)
    out.__dict__["transfer"] = _frozen(mat)
    return out


def identity_channel(d: int, tol: Tolerances = DEFAULT_TOL) -> Channel:
    return _from_transfer(np.eye(d * d, dtype=complex), tol=tol)


def unitary_channel(v, tol: Tolerances = DEFAULT_TOL) -> Channel:
    """Conjugation ``rho -> v rho v^dag``."""
    v = np.asarray(v, dtype=complex)
    return build_channel(KrausRep((v,)), tol)


def depolarizing_channel(d: int, p: float, tol: Tolerances = DEFAULT_TOL) -> Channel:
    """``rho -> p rho + (1 - p) tr(rho) 1/d``; ``p = 0`` is completely depolarizing."""
    e = la.vec(np.eye(d))
    mat = p * np.eye(d * d) + (1 - p) * np.outer(e, e) / d
    return _from_transfer(mat.astype(complex), tol=tol)


def filter_map(a, tol: Tolerances = DEFAULT_TOL) -> LinearMap:
    """Kraus-rank-one completely positive map ``X -> a X a^dag``."""
    a = np.asarray(a, dtype=complex)
    return build_map(KrausRep((a,)), tol)


def _swap_perm(d: int, pairs: Sequence) -> np.ndarray:
    p = np.eye(d * d, dtype=complex)
    for (i, j) in pairs:
        a, b = i * d + j, j * d + i
        p[[a, b]] = p[[b, a]]
    return p


def transposition_channel(d: int, tol: Tolerances = DEFAULT_TOL) -> Channel:
    """Matrix transposition: positive and trace preserving, never CP."""
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    return _from_transfer(_swap_perm(d, pairs), tol=tol)


def minimal_determinant_channel(d: int, tol: Tolerances = DEFAULT_TOL) -> Channel:
    """``rho -> (rho^{T_c} + 1 tr rho) / (1 + d)``, ``T_c`` swapping entries (1,d), (d,1)."""
    if d < 2:
        raise DimensionMismatch("d must be at least 2")
    e = la.vec(np.eye(d))
    mat = (_swap_perm(d, [(0, d - 1)]) + np.outer(e, e)) / (1 + d)
    return _from_transfer(mat, tol=tol)


def rebalance_to_tp(t1: LinearMap, t2: LinearMap):
    """Split ``t1 o t2`` into two trace-preserving maps of the same Kraus ranks.

    With ``P = sqrt(t1^*(1))`` the factors are ``T1 = t1 o (X -> P^-1 X P^-1)``
    and ``T2 = (X -> P X P) o t2``.
    """
    prod = compose(t1, t2)
    if not prod.is_tp:
        raise NotTracePreserving("t1 o t2 must be trace preserving")
    d = t1.dim
    p2 = dual(t1).apply(np.eye(d))
    w = np.linalg.eigvalsh(la.hermitian_part(p2))
    if w[0] <= t1.tol.psd_tol * max(w[-1], 1.0):
        raise SingularNormalization("t1^*(1) is singular")
    p = la.psd_sqrt(p2)
    pinv = la.psd_inv_sqrt(p2)
    f_in = filter_map(pinv, t1.tol)
    f_out = filter_map(p, t1.tol)
    c1 = compose(t1, f_in)
    c2 = compose(f_out, t2)
    return Channel(c1.choi, t1.tol), Channel(c2.choi, t1.tol)
