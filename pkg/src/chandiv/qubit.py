"""Qubit channels: Pauli transfer form, Lorentz normal form, divisibility
classification and the Kraus-rank-two normal form with its Lindblad schedules.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.spatial.transform import Rotation

from . import linalg as la
from .bases import basis_change
from .channel import (
    DEFAULT_TOL,
    Channel,
    KrausRep,
    LinearMap,
    Tolerances,
    build_channel,
    compose,
    determinant,
    distance,
    dual,
    filter_map,
    identity_channel,
    unitary_channel,
)
from .errors import (
    DegenerateClass,
    NonConvergence,
    NonPositiveLambda,
    NotInfinitesimalDivisible,
    NumericalFailure,
    OutOfRange,
    WrongDimension,
    WrongRank,
)
from .markov import (
    GeneratorSchedule,
    exp_generator,
    make_generator,
)

__all__ = [
    "PauliTransfer",
    "pauli_transfer",
    "channel_from_pauli",
    "DeltaDiagonalization",
    "diagonalize_delta",
    "rotation_to_unitary",
    "unital_channel",
    "unital_cp_eigenvalues",
    "unital_is_cp",
    "Diagonal",
    "NonDiagonal",
    "Singular",
    "LorentzNormalForm",
    "lorentz_normal_form",
    "nondiagonal_channel",
    "singular_channel",
    "Divisibility",
    "Infinitesimal",
    "Evidence",
    "ClassificationReport",
    "classify",
    "RankTwoClass",
    "rank_two_normal_form",
    "rank_two_from_angles",
    "amplitude_damping",
    "class1_channel",
    "class2_channel",
    "class3_channel",
    "class1_generator",
    "class2_generator",
    "class3_generator",
    "rank_two_generator_schedule",
    "nondiagonal_decompose",
    "unital_semigroup_channel",
    "markov_product_approx",
]

ETA = np.diag([1.0, -1.0, -1.0, -1.0])
SIGMA = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


def _require_qubit(ch: LinearMap):
    if ch.dim != 2:
        raise WrongDimension(f"qubit analysis needs d = 2, got d = {ch.dim}")


# ---------------------------------------------------------------------------
# Pauli transfer form
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PauliTransfer:
    """Real form ``[[1, 0], [v, delta]]`` with entries ``tr[s_i T(s_j)] / 2``."""

    v: np.ndarray
    delta: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        out = np.zeros((4, 4))
        out[0, 0] = 1.0
        out[1:, 0] = self.v
        out[1:, 1:] = self.delta
        return out


def _pauli_matrix(ch: LinearMap) -> np.ndarray:
    s = basis_change("gellmann", 2)
    r = s.conj().T @ ch.transfer @ s
    if np.max(np.abs(r.imag)) > 1e-10:
        raise NumericalFailure("Pauli transfer matrix is not real")
    return r.real


def pauli_transfer(ch: LinearMap) -> PauliTransfer:
    _require_qubit(ch)
    r = _pauli_matrix(ch)
    if np.max(np.abs(r[0] - [1, 0, 0, 0])) > 1e-9:
        raise NumericalFailure("first row of the Pauli transfer matrix is not (1,0,0,0)")
    return PauliTransfer(r[1:, 0].copy(), r[1:, 1:].copy())


def _map_from_pauli(r, tol=DEFAULT_TOL) -> LinearMap:
    s = basis_change("gellmann", 2)
    mat = s @ np.asarray(r, dtype=complex) @ s.conj().T
    return LinearMap(la.transfer_to_choi(mat, 2), tol)


def channel_from_pauli(r, tol: Tolerances = DEFAULT_TOL) -> Channel:
    """Channel with the given real 4x4 Pauli transfer matrix (or PauliTransfer)."""
    if isinstance(r, PauliTransfer):
        r = r.matrix
    m = _map_from_pauli(r, tol)
    return Channel(m.choi, tol)


def rotation_to_unitary(o: np.ndarray) -> np.ndarray:
    """``U`` in SU(2) with ``U s_j U^dag = sum_i o_ij s_i``."""
    x, y, z, w = Rotation.from_matrix(o).as_quat()
    return w * SIGMA[0] - 1j * (x * SIGMA[1] + y * SIGMA[2] + z * SIGMA[3])


@dataclass(frozen=True, eq=False)
class DeltaDiagonalization:
    o1: np.ndarray
    o2: np.ndarray
    lambdas: np.ndarray
    u1: np.ndarray
    u2: np.ndarray


def diagonalize_delta(pt) -> DeltaDiagonalization:
    """Special orthogonal ``O1, O2`` with ``O1 delta O2 = diag(l1, l2, l3)``.

    ``l1 >= l2 >= |l3|``; a negative determinant shows up in the sign of
    ``l3``.  ``u1, u2`` are the matching qubit unitaries, so conjugating by
    ``u1`` after and ``u2`` before the channel diagonalizes it.
    """
    delta = pt.delta if isinstance(pt, PauliTransfer) else np.asarray(pt, dtype=float)
    u, s, vt = np.linalg.svd(delta)
    lam = s.copy()
    if np.linalg.det(u) < 0:
        u[:, 2] *= -1
        lam[2] *= -1
    if np.linalg.det(vt) < 0:
        vt[2] *= -1
        lam[2] *= -1
    o1, o2 = u.T, vt.T
    if np.max(np.abs(o1 @ delta @ o2 - np.diag(lam))) > 1e-9 * max(1.0, np.abs(delta).max()):
        raise NumericalFailure("SVD failed to diagonalize delta")
    return DeltaDiagonalization(o1, o2, lam, rotation_to_unitary(o1), rotation_to_unitary(o2))


def unital_cp_eigenvalues(lam) -> np.ndarray:
    """Choi eigenvalues ``(1 + s1 l1 + s2 l2 + s3 l3) / 4`` with ``s1 s2 s3 = +1``."""
    l1, l2, l3 = lam
    return np.array([
        1 + l1 + l2 + l3,
        1 + l1 - l2 - l3,
        1 - l1 + l2 - l3,
        1 - l1 - l2 + l3,
    ]) / 4


def unital_is_cp(lam, tol: float = 1e-12) -> bool:
    return bool(unital_cp_eigenvalues(lam).min() >= -tol)


def unital_channel(lam, tol: Tolerances = DEFAULT_TOL) -> Channel:
    return channel_from_pauli(np.diag([1.0, *lam]), tol)


# ---------------------------------------------------------------------------
# Lorentz normal form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Diagonal:
    lambdas: tuple
    tag = "Diagonal"

    @property
    def parameters(self) -> dict:
        return {"lambda": list(self.lambdas)}

    def pauli(self) -> np.ndarray:
        return np.diag([1.0, *self.lambdas])


@dataclass(frozen=True)
class NonDiagonal:
    x: float
    tag = "NonDiagonal"

    @property
    def parameters(self) -> dict:
        return {"x": self.x}

    def pauli(self) -> np.ndarray:
        a = self.x / np.sqrt(3)
        r = np.diag([1.0, a, a, 1 / 3])
        r[3, 0] = 2 / 3
        return r


@dataclass(frozen=True)
class Singular:
    tag = "Singular"

    @property
    def parameters(self) -> dict:
        return {}

    def pauli(self) -> np.ndarray:
        r = np.zeros((4, 4))
        r[0, 0] = r[3, 0] = 1.0
        return r


@dataclass(frozen=True, eq=False)
class LorentzNormalForm:
    """``T_A T T_B`` equals ``form`` with ``T_A(X) = A X A^dag``."""

    form: object
    filters: tuple
    diagnostics: dict = field(default_factory=dict)

    @property
    def tag(self) -> str:
        return self.form.tag

    def channel(self, tol: Tolerances = DEFAULT_TOL) -> Channel:
        return channel_from_pauli(self.form.pauli(), tol)


def nondiagonal_channel(x: float, tol: Tolerances = DEFAULT_TOL) -> Channel:
    if not 0 <= x <= 1:
        raise OutOfRange("x must lie in [0, 1]")
    return channel_from_pauli(NonDiagonal(x).pauli(), tol)


def singular_channel(tol: Tolerances = DEFAULT_TOL) -> Channel:
    """Replacement channel ``rho -> |0><0| tr(rho)``."""
    return channel_from_pauli(Singular().pauli(), tol)


def _rank_one_operator(r: np.ndarray) -> np.ndarray:
    """``A`` with ``X -> A X A^dag`` having Pauli matrix ``r`` (assumed of that kind)."""
    s = basis_change("gellmann", 2)
    tau = la.hermitian_part(la.transfer_to_choi(s @ np.asarray(r, dtype=complex) @ s.conj().T, 2))
    w, v = np.linalg.eigh(tau)
    a = la.unvec(np.sqrt(2 * max(w[-1], 0.0)) * v[:, -1], 2)
    k = np.argmax(np.abs(a))
    return a * (abs(a.flat[k]) / a.flat[k])


def _apply_filters(ch: LinearMap, a, b) -> np.ndarray:
    """Pauli matrix of ``T_A T T_B``."""
    return _pauli_matrix(compose(compose(filter_map(a), ch), filter_map(b)))


def _normalize_filters(ch, a, b):
    # rescale a so that T_A T T_B is trace preserving
    r = _apply_filters(ch, a, b)
    return a / np.sqrt(r[0, 0]), b


def _sinkhorn(ch: Channel, max_rounds=500, tol=1e-10, max_cond=1e6):
    tau = ch.choi.copy()
    a = np.eye(2, dtype=complex)
    c = np.eye(2, dtype=complex)
    resid = np.inf
    for it in range(1, max_rounds + 1):
        rho_out = la.ptrace_in(tau, 2)
        x = la.psd_inv_sqrt(2 * rho_out)
        k = np.kron(x, np.eye(2))
        tau = k @ tau @ k.conj().T
        tau /= np.trace(tau).real
        rho_in = la.ptrace_out(tau, 2)
        y = la.psd_inv_sqrt(2 * rho_in)
        k = np.kron(np.eye(2), y)
        tau = k @ tau @ k.conj().T
        tau /= np.trace(tau).real
        a = x @ a
        c = y @ c
        a /= np.sqrt(abs(np.linalg.det(a)))
        c /= np.sqrt(abs(np.linalg.det(c)))
        cond = max(np.linalg.cond(a), np.linalg.cond(c))
        if not np.isfinite(cond) or cond >= max_cond:
            return None, {"rounds": it, "residual": resid, "condition": cond}
        resid = max(
            np.abs(2 * la.ptrace_in(tau, 2) - np.eye(2)).max(),
            np.abs(2 * la.ptrace_out(tau, 2) - np.eye(2)).max(),
        )
        if resid < tol:
            return (a, c.T), {"rounds": it, "residual": resid, "condition": cond}
    return None, {"rounds": max_rounds, "residual": resid, "condition": cond}


def _eta_dot(u, v):
    return u[0] * v[0] - u[1:] @ v[1:]


def _eta_complement(vectors):
    """Two eta-orthonormal spacelike vectors orthogonal to ``vectors`` (a Lorentzian plane)."""
    basis = np.array(vectors).T
    # eta-orthogonal complement = null space of basis^T eta
    ns = scipy.linalg.null_space(basis.T @ ETA)
    out = []
    for col in ns.T:
        v = col.copy()
        for w in out:
            v = v + _eta_dot(v, w) * w  # <w,w> = -1
        n = -_eta_dot(v, v)
        if n <= 0:
            raise NumericalFailure("complement of a Lorentzian plane is not spacelike")
        out.append(v / np.sqrt(n))
    return out


def _orient(cols):
    m = np.array(cols).T
    if np.linalg.det(m) < 0:
        m[:, 2] *= -1
    return m


def _nondiagonal_lorentz(r: np.ndarray):
    """``(L1, L2, x)`` with ``L1 R L2`` proportional to the NonDiagonal(x) representative."""
    m = ETA @ r.T @ ETA @ r
    # spectrum {mu, mu, nu, nu} with nu = x^2 mu <= mu: use trace identities,
    # which stay well conditioned where the Jordan eigenvalue does not
    t1, t2 = np.trace(m), np.trace(m @ m)
    ssum, ssq = t1 / 2, t2 / 2
    prod = (ssum * ssum - ssq) / 2
    disc = max(ssum * ssum / 4 - prod, 0.0)
    if np.sqrt(disc) < 1e-7 * abs(ssum):
        disc = 0.0  # x = 1 up to rounding; the square root would amplify it
    mu = ssum / 2 + np.sqrt(disc)
    nu = ssum / 2 - np.sqrt(disc)
    if mu <= 1e-12 * max(1.0, np.abs(m).max()):
        raise NumericalFailure("degenerate invariant spectrum")
    x = float(np.sqrt(np.clip(nu / mu, 0.0, 1.0)))
    n = m - mu * np.eye(4)
    _, sv, vh = np.linalg.svd(n @ n)
    kern2 = vh[sv < 1e-10 * mu * mu].conj().T
    if kern2.shape[1] < 2:
        kern2 = vh[-2:].conj().T
    img = n @ kern2
    uu, ss, _ = np.linalg.svd(img)
    u0 = uu[:, 0]
    if u0[0] < 0:
        u0 = -u0
    w = np.linalg.lstsq(n, (4 / 3) * mu * u0, rcond=1e-8)[0]
    k2 = 2 / _eta_dot(u0, w)
    if k2 <= 0:
        raise NumericalFailure("null pair has the wrong orientation")
    kk = np.sqrt(k2)
    u = kk * u0
    ubar = kk * w
    # fix the kernel component so that ubar is lightlike
    ubar = ubar - _eta_dot(ubar, ubar) / (2 * _eta_dot(ubar, u)) * u
    f0, f3 = (u + ubar) / 2, (u - ubar) / 2
    f1, f2 = _eta_complement([f0, f3])
    l2 = _orient([f0, f1, f2, f3])
    s = np.sqrt(3 * mu)
    q = r @ l2
    g3 = 3 * q[:, 3] / s
    g0 = q[:, 0] / s - (2 / 3) * g3
    if x > 1e-6:
        a = x / np.sqrt(3)
        g1, g2 = q[:, 1] / (s * a), q[:, 2] / (s * a)
    else:
        g1, g2 = _eta_complement([g0, g3])
    linv = _orient([g0, g1, g2, g3])
    return np.linalg.inv(linv), l2, x


def _diagonal_lorentz(r: np.ndarray):
    """``(L1, L2)`` with ``L1 R L2`` diagonal, from the eigenvectors of ``eta R^T eta R``."""
    m = ETA @ r.T @ ETA @ r
    ev, vecs = np.linalg.eig(m)
    if np.max(np.abs(ev.imag)) > 1e-8 * max(1.0, np.abs(ev).max()) or np.linalg.cond(vecs) > 1e8:
        raise NumericalFailure("invariant matrix is not diagonalizable")
    ev, vecs = ev.real, vecs.real
    norms = np.array([_eta_dot(v, v) for v in vecs.T])
    j = int(np.argmax(norms))
    if norms[j] <= 1e-8:
        raise NumericalFailure("no timelike eigenvector")
    f0 = vecs[:, j] / np.sqrt(norms[j])
    if f0[0] < 0:
        f0 = -f0
    rest = [i for i in range(4) if i != j]
    cols = [f0]
    for i in rest:
        v = vecs[:, i].copy()
        for w in cols[1:]:
            v = v + _eta_dot(v, w) * w
        v = v - _eta_dot(v, f0) * f0
        cols.append(v / np.sqrt(-_eta_dot(v, v)))
    l2 = _orient(cols)
    c2 = ev[j]
    q = r @ l2
    c = np.sqrt(c2)
    g = [q[:, 0] / c]
    for i in range(1, 4):
        n = -_eta_dot(q[:, i], q[:, i])
        g.append(q[:, i] / np.sqrt(n) if n > 1e-14 * c2 else None)
    missing = [i for i in range(1, 4) if g[i] is None]
    if missing:
        known = [g[0]] + [g[i] for i in range(1, 4) if g[i] is not None]
        ns = scipy.linalg.null_space(np.array(known) @ ETA)
        fill = []
        for col in ns.T:
            v = col.copy()
            for w in fill:
                v = v + _eta_dot(v, w) * w
            fill.append(v / np.sqrt(-_eta_dot(v, v)))
        for i, v in zip(missing, fill):
            g[i] = v
    linv = _orient(g)
    return np.linalg.inv(linv), l2


def _finish_diagonal(ch, a, b, diag):
    """Rotate a unital normal form to ordered diagonal form and fold the rotations in."""
    a, b = _normalize_filters(ch, a, b)
    r = _apply_filters(ch, a, b)
    dd = diagonalize_delta(r[1:, 1:])
    a = dd.u1 @ a
    b = b @ dd.u2
    r = _apply_filters(ch, a, b)
    lam = tuple(float(l) for l in dd.lambdas)
    form = Diagonal(lam)
    diag["residual"] = float(np.abs(r - form.pauli()).max())
    return LorentzNormalForm(form, (a, b), diag)


def _cond(a):
    return float(np.linalg.cond(a))


def lorentz_normal_form(ch: Channel, tol: Tolerances = DEFAULT_TOL) -> LorentzNormalForm:
    """Normal form of a qubit channel under invertible Kraus-rank-one filters.

    Sinkhorn-style filtering of the Choi marginals is tried first; if it
    converges the form is Diagonal.  Otherwise the filter-invariant matrix
    ``eta R^T eta R`` decides between the diagonal and non-diagonal cases.
    """
    _require_qubit(ch)
    r = _pauli_matrix(ch)
    diag = {}
    # replacement channels: T(rho) = sigma tr(rho)
    if np.abs(r[:, 1:]).max() < 1e-12:
        v = r[1:, 0]
        nv = np.linalg.norm(v)
        if nv > 1 - 1e-9:
            o = _rotation_to(v / nv)
            u = rotation_to_unitary(o)
            diag.update(iterations=0, residual=0.0, method="replacement")
            return LorentzNormalForm(Singular(), (u, np.eye(2, dtype=complex)), diag)
        # mixed output: filter it to the maximally mixed state
        sigma = ch.apply(np.eye(2) / 2)
        a = la.psd_inv_sqrt(2 * sigma)
        out = _finish_diagonal(ch, a, np.eye(2, dtype=complex), {"iterations": 0, "method": "replacement"})
        return _checked(out, tol)

    filt, info = _sinkhorn(ch)
    diag.update(iterations=info["rounds"], sinkhorn_residual=float(info["residual"]))
    if filt is not None:
        a, b = filt
        out = _finish_diagonal(ch, a, b, dict(diag, method="filtering"))
        return _checked(out, tol)

    errors = {}
    try:
        l1, l2, x = _nondiagonal_lorentz(r)
        a, b = _rank_one_operator(l1), _rank_one_operator(l2)
        a, b = _normalize_filters(ch, a, b)
        form = NonDiagonal(x)
        res = float(np.abs(_apply_filters(ch, a, b) - form.pauli()).max())
        if res < 1e-6:
            diag.update(method="invariant", residual=res)
            return _checked(LorentzNormalForm(form, (a, b), diag), tol)
        errors["nondiagonal_residual"] = res
    except (NumericalFailure, np.linalg.LinAlgError, ValueError) as exc:
        errors["nondiagonal"] = str(exc)
    try:
        l1, l2 = _diagonal_lorentz(r)
        a, b = _rank_one_operator(l1), _rank_one_operator(l2)
        out = _finish_diagonal(ch, a, b, dict(diag, method="invariant"))
        if out.diagnostics["residual"] < 1e-6:
            return _checked(out, tol)
        errors["diagonal_residual"] = out.diagnostics["residual"]
    except (NumericalFailure, np.linalg.LinAlgError, ValueError) as exc:
        errors["diagonal"] = str(exc)
    raise NonConvergence("no Lorentz normal form found", dict(diag, **errors))


def _checked(nf: LorentzNormalForm, tol) -> LorentzNormalForm:
    a, b = nf.filters
    nf.diagnostics["filter_condition"] = [_cond(a), _cond(b)]
    if nf.diagnostics.get("residual", 0.0) > 1e-6:
        raise NonConvergence("normal-form residual too large", dict(nf.diagnostics))
    return nf


def _rotation_to(v):
    """Rotation taking the z axis to unit vector ``v``."""
    z = np.array([0.0, 0.0, 1.0])
    if np.allclose(v, z):
        return np.eye(3)
    if np.allclose(v, -z):
        return np.diag([1.0, -1.0, -1.0])
    # rotation sending z to v is the transpose of one sending v to z
    rot, _ = Rotation.align_vectors([v], [z])
    return rot.as_matrix()


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

class Divisibility(str, enum.Enum):
    UNITARY = "Unitary"
    DIVISIBLE = "Divisible"
    INDIVISIBLE = "Indivisible"


class Infinitesimal(str, enum.Enum):
    DIVISIBLE = "InfinitesimalDivisible"
    NOT_DIVISIBLE = "NotInfinitesimalDivisible"
    BOUNDARY = "BoundaryZeroDet"


@dataclass(frozen=True)
class Evidence:
    kraus_rank: int
    normal_form: str
    det: float
    s_min_sq: Optional[float]
    det_delta: Optional[float]


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    divisibility: Divisibility
    infinitesimal: Infinitesimal
    positive_divisible: bool
    evidence: Evidence
    normal_form: Optional[LorentzNormalForm] = None


def classify(ch: Channel, tol: Tolerances = DEFAULT_TOL) -> ClassificationReport:
    """Divisibility, infinitesimal divisibility and positive divisibility of a qubit channel."""
    _require_qubit(ch)
    rank = ch.kraus_rank
    det = determinant(ch)
    positive = det >= -1e-10
    if rank == 1:
        ev = Evidence(1, "Unitary", det, 1.0, 1.0)
        return ClassificationReport(Divisibility.UNITARY, Infinitesimal.DIVISIBLE, positive, ev)
    nf = lorentz_normal_form(ch, tol)
    delta = nf.form.pauli()[1:, 1:]
    sv = np.linalg.svd(delta, compute_uv=False)
    s_min_sq = float(sv[-1] ** 2)
    det_delta = float(np.linalg.det(delta))
    ev = Evidence(rank, nf.tag, det, s_min_sq, det_delta)

    if rank == 3 and nf.tag == "Diagonal":
        div = Divisibility.INDIVISIBLE
    else:
        div = Divisibility.DIVISIBLE

    if nf.tag != "Diagonal":
        inf = Infinitesimal.DIVISIBLE
    elif div is Divisibility.INDIVISIBLE:
        inf = Infinitesimal.NOT_DIVISIBLE
    elif int(np.sum(sv > 1e-9)) < 2:
        inf = Infinitesimal.DIVISIBLE
    elif abs(det) < 1e-10:
        inf = Infinitesimal.BOUNDARY
    elif det_delta > 0 and s_min_sq >= det_delta - 1e-12:
        inf = Infinitesimal.DIVISIBLE
    else:
        inf = Infinitesimal.NOT_DIVISIBLE
    return ClassificationReport(div, inf, positive, ev, nf)


# ---------------------------------------------------------------------------
# Kraus rank two
# ---------------------------------------------------------------------------

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)


def _normal_kraus(a, b, x):
    """``A1 = |0><a|``, ``A2 = |0><b| + x |1><1|``."""
    a1 = np.outer(KET0, np.conj(a))
    a2 = np.outer(KET0, np.conj(b)) + x * np.outer(KET1, KET1)
    return a1, a2


def amplitude_damping(gamma: float, tol: Tolerances = DEFAULT_TOL) -> Channel:
    if not 0 <= gamma <= 1:
        raise OutOfRange("gamma must lie in [0, 1]")
    k0 = np.diag([1.0, np.sqrt(1 - gamma)])
    k1 = np.sqrt(gamma) * np.outer(KET0, KET1)
    return build_channel(KrausRep((k0, k1)), tol)


def class1_channel(x: float, tol: Tolerances = DEFAULT_TOL) -> Channel:
    """``|a> = sqrt(1-x^2)|1>``, ``|b> = |0>``; equal to amplitude damping with ``gamma = 1-x^2``."""
    if not 0 <= x <= 1:
        raise OutOfRange("x must lie in [0, 1]")
    return build_channel(KrausRep(_normal_kraus(np.sqrt(1 - x * x) * KET1, KET0, x)), tol)


def class2_channel(y: float, tol: Tolerances = DEFAULT_TOL) -> Channel:
    """``|a> = sqrt(1-y^2)|0>``, ``|b> = y|0>``, ``x = 1``; scales coherences by ``y``."""
    if not 0 <= y <= 1:
        raise OutOfRange("y must lie in [0, 1]")
    return build_channel(KrausRep(_normal_kraus(np.sqrt(1 - y * y) * KET0, y * KET0, 1.0)), tol)


def _class3_vectors(c1, x, phi):
    c0 = np.sqrt(1 - c1 * c1)
    na = np.sqrt((1 - x * x) / (1 - x * x * c1 * c1))
    a = na * np.array([c1, -c0 * np.exp(-1j * phi)])
    # b b^dag = 1 - x^2 |1><1| - a a^dag has rank one
    m = np.diag([1.0, 1 - x * x]).astype(complex) - np.outer(a, a.conj())
    b0 = np.sqrt(max(m[0, 0].real, 0.0))
    b = np.array([b0, m[1, 0] / b0])
    return a, b


def class3_channel(c1: float, x: float, phi: float, tol: Tolerances = DEFAULT_TOL) -> Channel:
    """Class-3 channel sending ``c0 e^{i phi}|0> + c1|1>`` to a pure state.

    The image is proportional to ``y c0 e^{i phi}|0> + x c1|1>`` with
    ``y >= 1``.
    """
    if not (0 < c1 < 1 and 0 < x < 1):
        raise OutOfRange("class-3 parameters need c1, x in (0, 1)")
    a, b = _class3_vectors(c1, x, phi)
    return build_channel(KrausRep(_normal_kraus(a, b, x)), tol)


@dataclass(frozen=True, eq=False)
class RankTwoClass:
    """``T = U1 o C o U2`` with ``C`` in Kraus normal form.

    ``kind`` is ``"class1"`` (``x``), ``"class2"`` (``y``) or ``"class3"``
    (``c1, x, phi``); ``unitaries`` are the conjugating matrices.
    """

    kind: str
    params: dict
    unitaries: tuple = (np.eye(2, dtype=complex), np.eye(2, dtype=complex))

    def channel(self, tol: Tolerances = DEFAULT_TOL) -> Channel:
        p = self.params
        if self.kind == "class1":
            return class1_channel(p["x"], tol)
        if self.kind == "class2":
            return class2_channel(p["y"], tol)
        return class3_channel(p["c1"], p["x"], p["phi"], tol)

    def wrap(self, c: LinearMap) -> LinearMap:
        u1, u2 = self.unitaries
        return compose(compose(unitary_channel(u1), c), unitary_channel(u2))


def _rank_one_combination(k1, k2):
    """Unit ``(al1, al2)`` with ``det(al1 K1 + al2 K2) = 0``."""
    d1, d2 = np.linalg.det(k1), np.linalg.det(k2)
    mid = np.linalg.det(k1 + k2) - d1 - d2
    # det(K1 + t K2) = d1 + mid t + d2 t^2
    if abs(d1) < 1e-14:
        al = np.array([1.0, 0.0], dtype=complex)
    elif abs(d2) < 1e-14:
        al = np.array([0.0, 1.0], dtype=complex)
    else:
        t = np.roots([d2, mid, d1])[0]
        al = np.array([1.0, t], dtype=complex)
    return al / np.linalg.norm(al)


def rank_two_normal_form(ch: Channel, tol: Tolerances = DEFAULT_TOL):
    """Find unitaries with ``T = U1 C U2`` and ``C`` a class-1/2/3 channel.

    Returns ``(RankTwoClass, C)``.  A unitary channel comes back as the
    degenerate class-1 point ``x = 1`` (``C`` the identity).
    """
    _require_qubit(ch)
    rank = ch.kraus_rank
    if rank > 2:
        raise WrongRank(f"Kraus rank {rank} > 2")
    if rank == 1:
        u = ch.kraus[0]
        cls = RankTwoClass("class1", {"x": 1.0}, (u, np.eye(2, dtype=complex)))
        return cls, identity_channel(2, tol)
    k1, k2 = ch.kraus[:2]
    al = _rank_one_combination(k1, k2)
    kh1 = al[0] * k1 + al[1] * k2
    kh2 = -np.conj(al[1]) * k1 + np.conj(al[0]) * k2
    u, s, vh = np.linalg.svd(kh1)
    e0, e1 = u[:, 0], u[:, 1]
    f1 = s[0] * vh[0].conj()
    f2 = kh2.conj().T @ e0
    f3 = kh2.conj().T @ e1
    x = float(np.linalg.norm(f3))
    v1 = np.array([e0.conj(), e1.conj()])  # rows <e0|, <e1|
    fh = f3 / x if x > 1e-12 else KET1
    g = np.array([-np.conj(fh[1]), np.conj(fh[0])])
    v2 = np.column_stack([g, fh])  # V2|1> = fh
    a = v2.conj().T @ f1
    b = v2.conj().T @ f2
    # phases: multiply A1 by a phase, A2 by a phase compensated on |1><1|
    ta = np.angle(a[0]) if abs(a[0]) > 1e-14 else 0.0
    a = a * np.exp(-1j * ta)
    tb = np.angle(b[0]) if abs(b[0]) > 1e-14 else 0.0
    b = b * np.exp(-1j * tb)
    d1 = np.diag([1.0, np.exp(-1j * tb)])  # left phase keeping x real
    p_left = d1 @ v1
    q_right = v2

    eps = 1e-9
    if abs(a[0]) < eps and abs(b[1]) < eps:
        kind = "class1"
        # rotate the remaining phase of a1 away
        g1 = np.angle(a[1]) if abs(a[1]) > 1e-14 else 0.0
        dg = np.diag([1.0, np.exp(-1j * g1)])
        a, b = dg @ a, dg @ b
        p_left, q_right = dg @ p_left, q_right @ dg.conj().T
        params = {"x": x}
    elif abs(x - 1) < eps:
        kind = "class2"
        params = {"y": float(np.clip(b[0].real, 0.0, 1.0))}
    else:
        kind = "class3"
        na = np.linalg.norm(a)
        params = {
            "c1": float(a[0].real / na),
            "x": x,
            "phi": float(np.mod(-np.angle(-a[1]), 2 * np.pi)),
        }
    cls = RankTwoClass(kind, params, (p_left.conj().T, q_right.conj().T))
    c = cls.channel(tol)
    err = distance(cls.wrap(c), ch)
    if err > 1e-8:
        raise NumericalFailure(f"rank-two normal form reconstruction error {err:.3g}")
    return cls, c


def rank_two_from_angles(u: float, v: float, tol: Tolerances = DEFAULT_TOL) -> Channel:
    """Rank-two channel with ``delta = diag(cu, cv, cu cv)`` and ``v = (0, 0, su sv)``."""
    if not (0 <= u <= np.pi / 2 and 0 <= v <= np.pi / 2):
        raise OutOfRange("angles must lie in [0, pi/2]")
    cu, cv, su, sv = np.cos(u), np.cos(v), np.sin(u), np.sin(v)
    r = np.diag([1.0, cu, cv, cu * cv])
    r[3, 0] = su * sv
    return channel_from_pauli(r, tol)


# -- generators ---------------------------------------------------------------

def class1_generator():
    """``L(rho) = 2|0><1|rho|1><0| - rho|1><1| - |1><1|rho``; ``C_x = exp(-ln(x) L)``."""
    return make_generator(np.zeros((2, 2)), [np.sqrt(2) * np.outer(KET0, KET1)])


def class2_generator():
    """``L(rho) = (s_z rho s_z - rho) / 2``; ``C_y = exp(-ln(y) L)``."""
    return make_generator(np.zeros((2, 2)), [SIGMA[3] / np.sqrt(2)])


def class3_generator(c1: float, phi: float):
    """Generator of ``x -> C_{c1,x,phi}`` at ``x = 1``, i.e. ``d/de C_{c1,exp(-e),phi}``."""
    if not 0 < c1 < 1:
        raise OutOfRange("c1 must lie in (0, 1)")
    c0 = np.sqrt(1 - c1 * c1)
    h = (1j * c1 / c0) * (np.exp(1j * phi) * np.outer(KET0, KET1) - np.exp(-1j * phi) * np.outer(KET1, KET0))
    a = np.sqrt(2) * np.outer(KET0, [c1, -c0 * np.exp(1j * phi)]) / c0
    return make_generator(h, [a])


def rank_two_generator_schedule(cls: RankTwoClass) -> GeneratorSchedule:
    """Time-dependent generator whose ordered exponential is ``cls.channel()``."""
    p = cls.params
    eps = 1e-12
    if cls.kind == "class1":
        x = p["x"]
        if not eps < x < 1 - eps:
            raise DegenerateClass(f"class-1 parameter x = {x} has no finite-time generator")
        l1 = class1_generator()
        return GeneratorSchedule(-np.log(x), lambda tau: l1, "class1")
    if cls.kind == "class2":
        y = p["y"]
        if not eps < y < 1 - eps:
            raise DegenerateClass(f"class-2 parameter y = {y} has no finite-time generator")
        l2 = class2_generator()
        return GeneratorSchedule(-np.log(y), lambda tau: l2, "class2")
    c1, x, phi = p["c1"], p["x"], p["phi"]
    if not (eps < x < 1 - eps and eps < c1 < 1 - eps):
        raise DegenerateClass("class-3 parameters must lie strictly inside (0, 1)")
    return GeneratorSchedule(-np.log(x), lambda tau: class3_generator(c1 * np.exp(-tau), phi), "class3")


def nondiagonal_decompose(x: float, tol: Tolerances = DEFAULT_TOL):
    """Kraus-rank-two factors ``(F1, F2)`` with ``F1 o F2 = NonDiagonal(x)``."""
    if not 0 <= x < 1:
        raise OutOfRange("x must lie in [0, 1)")
    f1 = nondiagonal_channel(1.0, tol)
    f2 = unital_channel((x, x, 1.0), tol)
    return f1, f2


def unital_semigroup_channel(lam, t: float, tol: Tolerances = DEFAULT_TOL) -> Channel:
    """Unital channel (possibly not CP) with ``delta_t = exp(t ln diag(lam))``."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise NonPositiveLambda("matrix logarithm needs all lambda > 0")
    return unital_channel(tuple(lam**t), tol)


# ---------------------------------------------------------------------------
# products of Markovian channels
# ---------------------------------------------------------------------------

def _check_cp(ch, what):
    w = ch.choi_eigenvalues
    if w.min() < -ch.tol.psd_tol * max(1.0, w.max()):
        raise NumericalFailure(f"{what} is not CP (min Choi eigenvalue {w.min():.3g})")


def _tp_chain(maps):
    """Rebalance CP maps ``M1 o ... o Mm`` (TP product) into TP factors.

    With ``W_k = (M1 ... Mk)^*(1)`` and ``P_k = sqrt(W_k)`` the factors
    ``X -> P_{k-1} M_k(P_k^-1 X P_k^-1) P_{k-1}`` telescope to the product.
    """
    out = []
    w_prev = np.eye(2, dtype=complex)
    p_prev = np.eye(2, dtype=complex)
    for k, m in enumerate(maps):
        w = dual(m).apply(w_prev)
        last = k == len(maps) - 1
        p = np.eye(2, dtype=complex) if last else la.psd_sqrt(w)
        pinv = np.eye(2, dtype=complex) if last else la.psd_inv_sqrt(w)
        piece = compose(compose(filter_map(p_prev), m), filter_map(pinv))
        out.append(Channel(piece.choi, m.tol))
        w_prev, p_prev = w, p
    return out


def _semigroup_of(ch: Channel) -> Channel:
    """``exp(T - id)``, the Markovian channel next to a near-identity ``T``."""
    return exp_generator(ch.transfer - np.eye(4), 1.0)


def _chain_product(chs):
    out = chs[0]
    for c in chs[1:]:
        out = compose(out, c)
    return out


def _unitary_roots(u, n: int, tol) -> list:
    """``n`` equal Hamiltonian steps whose product is conjugation by ``u``."""
    u = np.asarray(u, dtype=complex)
    u = u / np.sqrt(np.linalg.det(u))
    root = scipy.linalg.expm(scipy.linalg.logm(u) / n)
    return [unitary_channel(root, tol)] * n


def _rank_two_factors(cls: RankTwoClass, n: int, tol) -> list:
    """Markovian factors (left to right) whose product approximates ``cls.wrap(C)``."""
    u1, u2 = cls.unitaries
    p = cls.params
    if cls.kind == "class1" and p["x"] >= 1 - 1e-12:
        core = []
    else:
        key = {"class1": "x", "class2": "y"}.get(cls.kind)
        if key is not None and p[key] <= 1e-12:
            # closure point: approach through the semigroup
            cls = RankTwoClass(cls.kind, {key: 1.0 / (n + 1)}, cls.unitaries)
        sched = rank_two_generator_schedule(cls)
        dt = sched.duration / n
        core = [exp_generator(sched(k * dt), dt, tol) for k in reversed(range(n))]
    return _unitary_roots(u1, n, tol) + core + _unitary_roots(u2, n, tol)


def _normal_form_factors(nf: LorentzNormalForm, n: int, tol) -> list:
    """Markovian factors whose product approximates the normal-form channel."""
    if nf.tag == "Diagonal":
        lam = np.array(nf.form.lambdas)
        if np.sum(np.abs(lam) > 1e-9) < 2:
            # rank(delta) < 2: closure of the unital semigroups
            lam = np.where(np.abs(lam) > 1.0 / (n + 1), lam, 1.0 / (n + 1))
        if np.any(lam <= 0):
            raise NotInfinitesimalDivisible("normal form has a non-positive lambda")
        step = unital_semigroup_channel(lam, 1.0 / n, tol)
        _check_cp(step, "unital semigroup step")
        return [step] * n
    if nf.tag == "NonDiagonal":
        out = []
        for f in nondiagonal_decompose(min(nf.form.x, 1 - 1e-12), tol):
            cls, _ = rank_two_normal_form(f, tol)
            out += _rank_two_factors(cls, n, tol)
        return out
    cls, _ = rank_two_normal_form(singular_channel(tol), tol)
    return _rank_two_factors(cls, n, tol)


def _is_scaled_unitary(a) -> bool:
    return bool(np.allclose(a @ a.conj().T, np.eye(2) * abs(np.linalg.det(a)), atol=1e-10))


def markov_product_approx(ch: Channel, n: int, tol: Tolerances = DEFAULT_TOL):
    """Approximate an infinitesimal-divisible qubit channel by Markovian factors.

    Returns ``(reconstruction, distance)``.  Kraus-rank-two channels use
    their rank-two generator with ``n`` steps (exact for classes 1 and 2);
    channels whose normal-form filters are unitary are products of unitary
    roots and ``n`` unital semigroup steps.  Otherwise the normal-form
    factors are sandwiched between interpolating filters, rebalanced to
    trace-preserving near-identity channels ``N_k`` and each is replaced by
    its semigroup ``exp(N_k - id)``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rep = classify(ch, tol)
    if rep.infinitesimal is not Infinitesimal.DIVISIBLE:
        raise NotInfinitesimalDivisible(f"channel is {rep.infinitesimal.value}")
    if rep.divisibility is Divisibility.UNITARY:
        return ch, 0.0
    if ch.kraus_rank <= 2:
        cls, _ = rank_two_normal_form(ch, tol)
        recon = _chain_product(_rank_two_factors(cls, n, tol))
        return recon, distance(recon, ch)
    nf = rep.normal_form
    a, b = nf.filters
    factors = _normal_form_factors(nf, n, tol)
    if _is_scaled_unitary(a) and _is_scaled_unitary(b):
        ua = np.linalg.inv(a) * np.sqrt(abs(np.linalg.det(a)))
        ub = np.linalg.inv(b) * np.sqrt(abs(np.linalg.det(b)))
        chain = _unitary_roots(ua, n, tol) + factors + _unitary_roots(ub, n, tol)
        recon = _chain_product(chain)
        return recon, distance(recon, ch)
    # T = T_{A^-1} N T_{B^-1}; spread the filters along the chain
    loge = scipy.linalg.logm(a @ b)
    m = len(factors)
    ainv = np.linalg.inv(a)
    gs = [ainv @ scipy.linalg.expm(k / m * loge) for k in range(m + 1)]
    maps = [compose(compose(filter_map(gs[k]), f), filter_map(np.linalg.inv(gs[k + 1])))
            for k, f in enumerate(factors)]
    recon = _chain_product([_semigroup_of(t) for t in _tp_chain(maps)])
    return recon, distance(recon, ch)
