"""Lindblad generators, semigroups and the Markovian approximation of a channel."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np
import scipy.linalg

from . import linalg as la
from .bases import unitary_basis
from .channel import (
    DEFAULT_TOL,
    Channel,
    LinearMap,
    Tolerances,
    compose,
    unitary_channel,
)
from .errors import (
    DimensionMismatch,
    InvalidGenerator,
    NonConvergence,
    NotHermitian,
    NotPSD,
    NumericalFailure,
)

__all__ = [
    "GKSForm",
    "LindbladGenerator",
    "GeneratorReport",
    "MarkovApproxResult",
    "GeneratorSchedule",
    "make_generator",
    "generator_from_transfer",
    "validate_generator",
    "exp_generator",
    "gks_projection",
    "det_from_gks",
    "optimal_unitary",
    "markov_product_approx",
    "fixed_point_matrix",
    "markov_approx",
    "time_ordered_exp",
    "constant_schedule",
]


def traceless_unitary_basis(d: int) -> np.ndarray:
    return unitary_basis(d)[1:]


@dataclass(frozen=True, eq=False)
class GKSForm:
    """Dissipator ``sum G_ab (F_a rho F_b^dag - {F_b^dag F_a, rho}/2)``.

    ``basis`` holds the d^2 - 1 traceless orthonormal ``F_a``; it defaults to
    the shift-and-clock basis without its identity element.
    """

    g: np.ndarray
    basis: np.ndarray = None

    def __post_init__(self):
        g = np.asarray(self.g, dtype=complex)
        n = g.shape[0]
        d = int(round(np.sqrt(n + 1)))
        if g.shape != (n, n) or d * d != n + 1:
            raise DimensionMismatch(f"GKS matrix must be (d^2-1) x (d^2-1), got {g.shape}")
        basis = traceless_unitary_basis(d) if self.basis is None else np.asarray(self.basis, complex)
        if basis.shape != (n, d, d):
            raise DimensionMismatch("basis does not match the GKS matrix")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def _hamiltonian_superop(h: np.ndarray) -> np.ndarray:
    d = h.shape[0]
    one = np.eye(d)
    # i[rho, H] = i rho H - i H rho
    return 1j * (la.sandwich(one, h) - la.sandwich(h, one))


def _anticomm_superop(k: np.ndarray) -> np.ndarray:
    one = np.eye(k.shape[0])
    return la.sandwich(k, one) + la.sandwich(one, k)


@dataclass(frozen=True, eq=False)
class LindbladGenerator:
    """``L(rho) = i[rho, H] + D(rho)`` with ``D`` a GKS form or Lindblad operators."""

    hamiltonian: np.ndarray
    dissipator: Union[GKSForm, tuple]

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        object.__setattr__(self, "hamiltonian", h)
        if not isinstance(self.dissipator, GKSForm):
            ops = tuple(np.asarray(a, dtype=complex) for a in self.dissipator)
            for a in ops:
                if a.shape != h.shape:
                    raise DimensionMismatch("Lindblad operators must match the Hamiltonian shape")
            object.__setattr__(self, "dissipator", ops)
        elif self.dissipator.dim != h.shape[0]:
            raise DimensionMismatch("GKS basis dimension does not match the Hamiltonian")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @cached_property
    def transfer(self) -> np.ndarray:
        """Matrix of ``L`` in the matrix-unit basis."""
        d = self.dim
        out = _hamiltonian_superop(self.hamiltonian)
        if isinstance(self.dissipator, GKSForm):
            f, g = self.dissipator.basis, self.dissipator.g
            k = np.zeros((d, d), dtype=complex)
            for a in range(len(f)):
                for b in range(len(f)):
                    if g[a, b] != 0:
                        out = out + g[a, b] * np.kron(f[a], f[b].conj())
                        k += g[a, b] * f[b].conj().T @ f[a]
        else:
            k = np.zeros((d, d), dtype=complex)
            for a in self.dissipator:
                out = out + np.kron(a, a.conj())
                k += a.conj().T @ a
        return out - 0.5 * _anticomm_superop(k)

    def scaled(self, t: float) -> "LindbladGenerator":
        if isinstance(self.dissipator, GKSForm):
            diss = GKSForm(t * self.dissipator.g, self.dissipator.basis)
        else:
            diss = tuple(np.sqrt(t) * a for a in self.dissipator)
        return LindbladGenerator(t * self.hamiltonian, diss)


def make_generator(h, dissipator, tol: Tolerances = DEFAULT_TOL) -> LindbladGenerator:
    """Checked constructor: ``H`` Hermitian and the GKS matrix positive semidefinite."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionMismatch("Hamiltonian must be square")
    if np.max(np.abs(h - h.conj().T)) > tol.herm_tol:
        raise NotHermitian("Hamiltonian is not Hermitian")
    if isinstance(dissipator, GKSForm):
        g = dissipator.g
        if np.max(np.abs(g - g.conj().T)) > tol.herm_tol:
            raise NotHermitian("GKS matrix is not Hermitian")
        w = np.linalg.eigvalsh(la.hermitian_part(g))
        if w[0] < -tol.psd_tol * max(1.0, w[-1]):
            raise NotPSD(f"GKS matrix has negative eigenvalue {w[0]:.3g}")
        f = dissipator.basis
        n = len(f)
        gram = np.einsum("aij,bij->ab", f.conj(), f)
        if np.max(np.abs(gram - np.eye(n))) > 1e-12 or np.max(np.abs(np.trace(f, axis1=1, axis2=2))) > 1e-12:
            raise InvalidGenerator("GKS basis must be traceless and orthonormal")
        dissipator = GKSForm(la.hermitian_part(g), f)
    return LindbladGenerator(la.hermitian_part(h), dissipator)


def _as_superop(l) -> np.ndarray:
    if isinstance(l, LindbladGenerator):
        return l.transfer
    m = np.asarray(l, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch("generator matrix must be square")
    return m


def _dim_of(m: np.ndarray) -> int:
    d = int(round(np.sqrt(m.shape[0])))
    if d * d != m.shape[0]:
        raise DimensionMismatch("generator matrix size is not a perfect square")
    return d


def _gks_coefficients(m: np.ndarray, d: int) -> np.ndarray:
    """Coefficients ``c_ab`` of ``L(rho) = sum c_ab F_a rho F_b^dag`` in the unitary basis."""
    b = unitary_basis(d).reshape(d * d, d * d).T
    return b.conj().T @ la.reshuffle(m, d) @ b


def gks_projection(l, tol: Tolerances = DEFAULT_TOL):
    """Unique Hamiltonian / dissipative split over the traceless unitary basis.

    Returns ``(H, GKSForm)`` with ``H`` traceless.  Raises
    :class:`InvalidGenerator` when ``l`` does not generate a CP semigroup.
    """
    m = _as_superop(l)
    d = _dim_of(m)
    rep = validate_generator(m, tol)
    if not rep.valid:
        raise InvalidGenerator(rep.describe())
    c = la.hermitian_part(_gks_coefficients(m, d))
    f = unitary_basis(d)
    kappa = np.einsum("a,aij->ij", c[1:, 0], f[1:]) / np.sqrt(d) + c[0, 0] / (2 * d) * np.eye(d)
    h = 0.5j * (kappa - kappa.conj().T)
    h = h - np.trace(h) / d * np.eye(d)
    return la.hermitian_part(h), GKSForm(c[1:, 1:], f[1:])


def generator_from_transfer(m, tol: Tolerances = DEFAULT_TOL) -> LindbladGenerator:
    """Standard-form :class:`LindbladGenerator` of a generator given as a matrix."""
    h, g = gks_projection(m, tol)
    return LindbladGenerator(h, g)


@dataclass(frozen=True)
class GeneratorReport:
    trace_annihilating: bool
    hermiticity_preserving: bool
    conditionally_cp: bool
    worst_eigenvalue: float
    tp_defect: float

    @property
    def valid(self) -> bool:
        return self.trace_annihilating and self.hermiticity_preserving and self.conditionally_cp

    def describe(self) -> str:
        bad = [n for n in ("trace_annihilating", "hermiticity_preserving", "conditionally_cp")
               if not getattr(self, n)]
        return "invalid generator: " + ", ".join(bad) + f" (worst eigenvalue {self.worst_eigenvalue:.3g})"


def validate_generator(l, tol: Tolerances = DEFAULT_TOL) -> GeneratorReport:
    """Check ``L^*(1) = 0``, Hermiticity preservation and conditional complete positivity.

    The last test projects the Jamiolkowski operator of ``L`` off the
    maximally entangled vector and asks for positive semidefiniteness.
    """
    m = _as_superop(l)
    d = _dim_of(m)
    one = la.vec(np.eye(d))
    tp_defect = float(np.linalg.norm(m.conj().T @ one))
    c = la.reshuffle(m, d) / d
    herm = float(np.max(np.abs(c - c.conj().T))) <= tol.herm_tol
    om = la.max_entangled(d)
    p = np.eye(d * d) - np.outer(om, om.conj())
    w = np.linalg.eigvalsh(la.hermitian_part(p @ c @ p))
    scale = max(1.0, float(np.max(np.abs(w))))
    return GeneratorReport(
        trace_annihilating=tp_defect <= tol.tp_tol * d,
        hermiticity_preserving=herm,
        conditionally_cp=bool(w[0] >= -tol.psd_tol * scale),
        worst_eigenvalue=float(w[0]),
        tp_defect=tp_defect,
    )


def exp_generator(l, t: float = 1.0, tol: Tolerances = DEFAULT_TOL, check: bool = True) -> Channel:
    """The channel ``exp(t L)`` (scaling and squaring Pade via scipy)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    m = _as_superop(l)
    d = _dim_of(m)
    if check:
        rep = validate_generator(m, tol)
        if not rep.valid:
            raise InvalidGenerator(rep.describe())
    mat = scipy.linalg.expm(t * m)
    if not np.all(np.isfinite(mat)):
        raise NumericalFailure("matrix exponential overflowed")
    out = Channel(la.transfer_to_choi(mat, d), tol)
    if check and not out.is_cp:
        raise NumericalFailure("exponential of a valid generator is not CP within tolerance")
    out.__dict__["transfer"] = mat
    return out


def det_from_gks(g: GKSForm, t: float = 1.0) -> float:
    """Determinant of ``exp(t L)``: ``exp(-d t tr G)``, whatever the Hamiltonian."""
    return float(np.exp(-g.dim * t * np.trace(g.g).real))


# ---------------------------------------------------------------------------
# Markovian approximation
# ---------------------------------------------------------------------------

def _polar_ascent(kraus, v, max_iter, conv_tol, herm_tol=1e-9):
    traces = np.array([np.trace(k @ v) for k in kraus])
    f = float(np.sum(np.abs(traces) ** 2))
    history = [f]
    for it in range(1, max_iter + 1):
        m = np.einsum("a,aij->ij", traces.conj(), kraus)
        # stationarity: m V is Hermitian at a fixed point
        mv = m @ v
        scale = max(float(np.max(np.abs(mv))), 1e-300)
        skew = float(np.max(np.abs(mv - mv.conj().T))) / scale
        v_new = la.polar_unitary(m).conj().T
        traces = np.array([np.trace(k @ v_new) for k in kraus])
        f_new = float(np.sum(np.abs(traces) ** 2))
        if f_new < f - 1e-12 * max(1.0, f):
            raise NumericalFailure(f"polar ascent decreased the objective ({f} -> {f_new})")
        history.append(f_new)
        v, f = v_new, f_new
        if abs(history[-1] - history[-2]) < conv_tol and skew < herm_tol:
            return v, f, it, history, True
    return v, f, max_iter, history, False


def optimal_unitary(ch: LinearMap, max_iter: int = 1000, return_info: bool = False):
    """Unitary ``V`` maximizing ``tr_H[T U_V] = sum_a |tr(K_a V)|^2``.

    Alternating polar maximization: given the previous ``V``, the next one is
    the adjoint polar unitary of ``sum_a conj(tr(K_a V)) K_a``; each step is
    the exact maximizer of the bilinear relaxation, so the objective never
    decreases.  Besides the identity start, the adjoint polar unitaries of
    the Kraus operators are used as starts and the best fixed point is kept.
    At the fixed point ``sum_a conj(tr(K_a V)) K_a V >= 0``.

    A start stops once the objective changes by less than ``conv_tol`` and
    that fixed-point matrix is Hermitian to ``1e-9`` relative; the objective
    converges quadratically faster than ``V`` so the first test alone leaves
    a visible Hamiltonian residue.

    Returns ``(V, objective)``, plus an info dict when ``return_info``.
    """
    kraus = np.array(ch.kraus)
    d = ch.dim
    conv_tol = ch.tol.conv_tol
    starts = [np.eye(d, dtype=complex)] + [la.polar_unitary(k).conj().T for k in kraus]
    best = None
    for v0 in starts:
        v, f, it, hist, ok = _polar_ascent(kraus, v0, max_iter, conv_tol)
        if best is None or f > best[1] + 1e-12:
            best = (v, f, it, hist, ok)
    v, f, it, hist, ok = best
    if not ok:
        raise NonConvergence(
            f"polar ascent did not converge in {max_iter} iterations",
            {"objective": f, "iterations": it},
        )
    # fix the global phase so that det V is real positive
    ph = np.linalg.det(v)
    v = v * (ph.conj() / abs(ph)) ** (1 / d)
    if return_info:
        return v, f, {"iterations": it, "history": hist}
    return v, f


def fixed_point_matrix(ch: LinearMap, v) -> np.ndarray:
    """``sum_a conj(tr(K_a V)) K_a V``, positive semidefinite at the optimum."""
    kraus = np.array(ch.kraus)
    traces = np.array([np.trace(k @ v) for k in kraus])
    return np.einsum("a,aij->ij", traces.conj(), kraus) @ v


@dataclass(frozen=True, eq=False)
class MarkovApproxResult:
    u0: np.ndarray
    semigroup_generator: LindbladGenerator
    dissipative_generator: LindbladGenerator
    iterations: int
    objective: float

    def channel(self, t: float = 1.0) -> Channel:
        """``exp(t (T - id))``."""
        return exp_generator(self.semigroup_generator, t)


def markov_approx(ch: Channel) -> MarkovApproxResult:
    """Semigroup ``exp(t(T - id))`` and the purely dissipative ``T U_0 - id``."""
    d = ch.dim
    v, f, info = optimal_unitary(ch, return_info=True)
    eye = np.eye(d * d)
    semi = generator_from_transfer(ch.transfer - eye, ch.tol)
    tu = compose(ch, unitary_channel(v, ch.tol))
    diss = generator_from_transfer(tu.transfer - eye, ch.tol)
    return MarkovApproxResult(v, semi, diss, info["iterations"], f)


# ---------------------------------------------------------------------------
# time-dependent generators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorSchedule:
    """Continuous family ``tau -> L(tau)`` on ``[0, duration]``."""

    duration: float
    sample: Callable[[float], LindbladGenerator]
    label: str = ""

    def __call__(self, tau: float) -> LindbladGenerator:
        return self.sample(tau)


def constant_schedule(l: LindbladGenerator, duration: float) -> GeneratorSchedule:
    return GeneratorSchedule(duration, lambda tau: l, "constant")


def time_ordered_exp(sched: GeneratorSchedule, steps: int, rule: str = "left",
                     tol: Tolerances = DEFAULT_TOL, check: bool = True) -> Channel:
    """Ordered product ``exp(L(tau_n) dt) ... exp(L(tau_1) dt)``, later times on the left.

    ``rule="left"`` samples ``tau_k = (k-1) dt`` (first order in ``dt``);
    ``rule="midpoint"`` samples ``tau_k = (k - 1/2) dt`` (second order).
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    offsets = {"left": 0.0, "midpoint": 0.5}
    if rule not in offsets:
        raise ValueError(f"unknown rule {rule!r}")
    dt = sched.duration / steps
    first = sched(0.0)
    d = first.dim
    total = np.eye(d * d, dtype=complex)
    for k in range(steps):
        l = sched((k + offsets[rule]) * dt)
        m = l.transfer
        if check:
            rep = validate_generator(m, tol)
            if not rep.valid:
                raise InvalidGenerator(f"at tau={(k + offsets[rule]) * dt:.6g}: " + rep.describe())
        total = scipy.linalg.expm(dt * m) @ total
    out = Channel(la.transfer_to_choi(total, d), tol)
    out.__dict__["transfer"] = total
    return out


def markov_product_approx(ch: Channel, n: int, tol: Tolerances = DEFAULT_TOL):
    """Qubit product-of-semigroups approximation; see :func:`chandiv.qubit.markov_product_approx`."""
    from .qubit import markov_product_approx as impl

    return impl(ch, n, tol)
