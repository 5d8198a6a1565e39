"""Seeded sampling of unitaries, channels and generators, and the property suites."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import linalg as la
from .channel import (
    Channel,
    KrausRep,
    build_channel,
    compose,
    determinant,
    purity_and_bounds,
)
from .errors import UnknownSuite
from .markov import (
    GKSForm,
    LindbladGenerator,
    det_from_gks,
    exp_generator,
    fixed_point_matrix,
    gks_projection,
    markov_approx,
    validate_generator,
)
from .qubit import unital_cp_eigenvalues, unital_is_cp

__all__ = [
    "mix64",
    "sample_rng",
    "random_unitary",
    "random_channel",
    "random_generator",
    "SampleSpec",
    "PropertyReport",
    "Violation",
    "SUITES",
    "run_property_suite",
    "sample_channels",
    "min_unital_determinant",
    "semigroup_criterion_grid",
]

MASK64 = (1 << 64) - 1


def mix64(base: int, index: int) -> int:
    """Per-sample seed: splitmix64 finalizer applied to ``base + (index + 1) * golden``."""
    z = (int(base) + (int(index) + 1) * 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def sample_rng(base: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(mix64(base, index)))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(int(seed) & MASK64))


def _ginibre(rng, m, n):
    return (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2)


def random_unitary(d: int, seed) -> np.ndarray:
    """Haar unitary: QR of a complex Gaussian matrix with ``diag(R) > 0``."""
    return _haar_isometry(_rng(seed), d, d)


def _haar_isometry(rng, m: int, n: int) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(rng, m, n))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


@dataclass(frozen=True)
class SampleSpec:
    """``dim = None`` alternates d = 2, 3 by sample index; ``kraus_rank = None`` draws a rank."""

    dim: Optional[int] = 2
    kraus_rank: Optional[int] = None
    seed: int = 0
    count: int = 1

    def __post_init__(self):
        if self.dim is not None and not 2 <= self.dim <= 5:
            raise ValueError("dim must lie in [2, 5]")
        if self.kraus_rank is not None:
            dmax = (self.dim or 3) ** 2
            if not 1 <= self.kraus_rank <= dmax:
                raise ValueError(f"kraus_rank must lie in [1, {dmax}]")
        if not 0 <= int(self.seed) <= MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.count < 1:
            raise ValueError("count must be positive")

    def dim_for(self, index: int) -> int:
        return self.dim if self.dim is not None else (2, 3)[index % 2]


def random_channel(spec: SampleSpec, index: int = 0) -> Channel:
    """Channel from a Haar isometry ``d -> d r`` cut into ``r`` Kraus operators.

    Sample ``index`` of ``spec`` is generated from ``mix64(spec.seed, index)``.
    """
    rng = sample_rng(spec.seed, index)
    d = spec.dim_for(index)
    r = spec.kraus_rank if spec.kraus_rank is not None else int(rng.integers(1, d * d + 1))
    r = min(r, d * d)
    v = _haar_isometry(rng, d * r, d)
    return build_channel(KrausRep(tuple(v.reshape(r, d, d))))


def sample_channels(spec: SampleSpec) -> list:
    return [random_channel(spec, i) for i in range(spec.count)]


def random_generator(d: int, seed, hamiltonian: bool = True) -> LindbladGenerator:
    """Traceless Gaussian Hermitian ``H`` and ``G = W^dag W`` over the unitary basis."""
    rng = _rng(seed)
    n = d * d - 1
    if hamiltonian:
        h = _ginibre(rng, d, d)
        h = (h + h.conj().T) / 2
        h -= np.trace(h) / d * np.eye(d)
    else:
        h = np.zeros((d, d), dtype=complex)
    w = _ginibre(rng, n, n)
    g = w.conj().T @ w / (n * d)
    return LindbladGenerator(h, GKSForm(la.hermitian_part(g)))


# ---------------------------------------------------------------------------
# property suites
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    seed: int
    description: str
    magnitude: float


@dataclass
class PropertyReport:
    suite: str
    samples: int
    violations: list = field(default_factory=list)
    worst_margin: float = np.inf

    @property
    def ok(self) -> bool:
        return not self.violations


class _Recorder:
    def __init__(self, name):
        self.report = PropertyReport(name, 0)

    def check(self, seed: int, margin: float, description: str):
        """Record a margin; negative margins are violations."""
        margin = float(margin)
        if margin < self.report.worst_margin:
            self.report.worst_margin = margin
        if not margin >= 0:
            self.report.violations.append(Violation(int(seed), description, -margin))


def _pair(spec, i, rank=None):
    sub = SampleSpec(spec.dim_for(i), rank if rank is not None else spec.kraus_rank, spec.seed, 1)
    a = random_channel(sub, 2 * i)
    b = random_channel(sub, 2 * i + 1)
    return a, b


def _suite_det_range(spec, rec):
    for i in range(spec.count):
        ch = random_channel(spec, i)
        d = ch.dim
        det = determinant(ch)
        rec.check(mix64(spec.seed, i), 1 + 1e-10 - abs(det), f"det {det:.6g} outside [-1, 1] (d={d})")
        nrm = np.linalg.norm(ch.transfer, 2)
        rec.check(mix64(spec.seed, i), np.sqrt(d) + 1e-9 - nrm, f"transfer norm {nrm:.6g} > sqrt(d)")


def _suite_det_monotone(spec, rec):
    for i in range(spec.count):
        a, b = _pair(spec, i)
        da, db, dab = determinant(a), determinant(b), determinant(compose(a, b))
        rec.check(mix64(spec.seed, i), min(abs(da), abs(db)) + 1e-10 - abs(dab),
                  f"|det T1T2| = {abs(dab):.6g} exceeds min(|det T1|, |det T2|)")


def _suite_det_multiplicative(spec, rec):
    for i in range(spec.count):
        a, b = _pair(spec, i)
        da, db, dab = determinant(a), determinant(b), determinant(compose(a, b))
        tol = 1e-8 * max(1.0, abs(da * db))
        rec.check(mix64(spec.seed, i), tol - abs(dab - da * db), "det not multiplicative")


def _suite_rank2_nonneg(spec, rec):
    sub = SampleSpec(spec.dim, 2, spec.seed, spec.count)
    for i in range(spec.count):
        ch = random_channel(sub, i)
        det = determinant(ch)
        rec.check(mix64(spec.seed, i), det + 1e-10, f"Kraus-rank-two det {det:.6g} < 0")


def _suite_purity_bound(spec, rec):
    for i in range(spec.count):
        ch = random_channel(spec, i)
        w = ch.choi_eigenvalues
        purity = float(np.sum(w**2))
        det = determinant(ch)
        d = ch.dim
        rec.check(mix64(spec.seed, i), purity ** (d * d / 2) + 1e-10 - det,
                  f"det {det:.6g} above purity bound {purity ** (d * d / 2):.6g}")


def _suite_mu3_bound(spec, rec):
    for i in range(spec.count):
        ch = random_channel(spec, i)
        pb = purity_and_bounds(ch)
        rec.check(mix64(spec.seed, i), pb.overlap - pb.mu**3 + 1e-10,
                  f"overlap {pb.overlap:.6g} below mu^3 = {pb.mu ** 3:.6g}")


def _suite_semigroup_cp(spec, rec):
    for i in range(spec.count):
        ch = random_channel(spec, i)
        d = ch.dim
        gen = ch.transfer - np.eye(d * d)
        rep = validate_generator(gen)
        rec.check(mix64(spec.seed, i), 0.0 if rep.valid else min(rep.worst_eigenvalue, -1e-16),
                  "T - id is not a valid generator")
        for t in (0.1, 1.0, 10.0):
            e = exp_generator(gen, t, check=False)
            rec.check(mix64(spec.seed, i), e.choi_eigenvalues.min() + 1e-9,
                      f"exp(t(T - id)) not CP at t={t}")


def _suite_dissipative_u0(spec, rec):
    for i in range(spec.count):
        ch = random_channel(spec, i)
        res = markov_approx(ch)
        h, _ = gks_projection(res.dissipative_generator)
        hn = float(np.max(np.abs(h))) if h.size else 0.0
        rec.check(mix64(spec.seed, i), 1e-7 - hn, f"Hamiltonian part {hn:.3g} after U0")
        m = fixed_point_matrix(ch, res.u0)
        wmin = np.linalg.eigvalsh(la.hermitian_part(m))[0]
        rec.check(mix64(spec.seed, i), wmin + 1e-7, f"fixed-point matrix eigenvalue {wmin:.3g}")


def _suite_generator_det(spec, rec):
    for i in range(spec.count):
        d = spec.dim_for(i)
        seed = mix64(spec.seed, i)
        gen = random_generator(d, seed)
        ch = exp_generator(gen, 1.0)
        direct = determinant(ch)
        formula = det_from_gks(gen.dissipator, 1.0)
        rel = abs(direct - formula) / formula
        rec.check(seed, 1e-8 - rel, f"det mismatch, relative {rel:.3g}")
        diss = LindbladGenerator(np.zeros((d, d)), gen.dissipator)
        nrm = np.linalg.norm(diss.transfer, 2)
        bound = 2 * np.trace(gen.dissipator.g).real
        rec.check(seed, bound + 1e-7 - nrm, f"||L|| = {nrm:.6g} above 2 tr G = {bound:.6g}")


def _suite_qubit_classifier(spec, rec):
    from .qubit import Divisibility, Infinitesimal, classify
    from .channel import unitary_channel

    for i in range(spec.count):
        seed = mix64(spec.seed, i)
        rng = sample_rng(spec.seed, i)
        if i % 3 == 2:
            ch = exp_generator(random_generator(2, seed), float(rng.uniform(0.05, 2.0)))
            rep = classify(ch)
            rec.check(seed, -1.0 if rep.divisibility is Divisibility.INDIVISIBLE else 0.0,
                      "Markovian channel classified indivisible")
            rec.check(seed, -1.0 if rep.infinitesimal is Infinitesimal.NOT_DIVISIBLE else 0.0,
                      "Markovian channel classified not infinitesimal divisible")
        else:
            ch = random_channel(SampleSpec(2, None, spec.seed, 1), i)
            rep = classify(ch)
        if rep.divisibility is Divisibility.INDIVISIBLE:
            rec.check(seed, 0.0 if rep.infinitesimal is Infinitesimal.NOT_DIVISIBLE else -1.0,
                      "indivisible but not flagged non-infinitesimal")
        if rep.infinitesimal is Infinitesimal.DIVISIBLE:
            rec.check(seed, rep.evidence.det + 1e-10, "infinitesimal divisible with negative det")
        if ch.kraus_rank == 4:
            rec.check(seed, 0.0 if rep.divisibility is Divisibility.DIVISIBLE else -1.0,
                      "Kraus rank four but not divisible")
        # unitary invariance
        u1, u2 = random_unitary(2, rng), random_unitary(2, rng)
        rot = compose(compose(unitary_channel(u1), ch), unitary_channel(u2))
        rep2 = classify(rot)
        same = (rep.divisibility, rep.infinitesimal, rep.evidence.normal_form) == \
            (rep2.divisibility, rep2.infinitesimal, rep2.evidence.normal_form)
        rec.check(seed, 0.0 if same else -1.0, "verdict changed under unitary conjugation")


def _suite_rank2_reconstruction(spec, rec):
    from .channel import distance
    from .qubit import rank_two_normal_form

    for i in range(spec.count):
        ch = random_channel(SampleSpec(2, 2, spec.seed, 1), i)
        cls, c = rank_two_normal_form(ch)
        err = distance(cls.wrap(c), ch)
        rec.check(mix64(spec.seed, i), 1e-8 - err, f"rank-two reconstruction error {err:.3g}")


def _suite_semigroup_criterion(spec, rec):
    res = max(2, min(20, int(round(spec.count ** (1 / 3)))))
    out = semigroup_criterion_grid(res)
    rec.report.samples = out["cells"]
    for cell in out["failures"]:
        rec.check(spec.seed, -cell["magnitude"], cell["description"])
    if not out["failures"]:
        rec.check(spec.seed, out["worst_margin"], "")
    return out["cells"]


SUITES: dict = {
    "det_range": _suite_det_range,
    "det_monotone": _suite_det_monotone,
    "det_multiplicative": _suite_det_multiplicative,
    "rank2_nonneg": _suite_rank2_nonneg,
    "purity_bound": _suite_purity_bound,
    "mu3_bound": _suite_mu3_bound,
    "lemma1_cp": _suite_semigroup_cp,
    "dissipative_u0": _suite_dissipative_u0,
    "thm5_det": _suite_generator_det,
    "qubit_classifier_consistency": _suite_qubit_classifier,
    "rank2_reconstruction": _suite_rank2_reconstruction,
    "condid2_semigroup": _suite_semigroup_criterion,
}


def run_property_suite(name: str, spec: SampleSpec) -> PropertyReport:
    """Run a registered invariant over ``spec.count`` seeded samples.

    Every violation records the per-sample seed ``mix64(spec.seed, i)``.
    """
    try:
        fn: Callable = SUITES[name]
    except KeyError:
        raise UnknownSuite(f"unknown suite {name!r}; known: {sorted(SUITES)}") from None
    rec = _Recorder(name)
    cells = fn(spec, rec)
    rec.report.samples = cells if cells is not None else spec.count
    return rec.report


# ---------------------------------------------------------------------------
# unital qubit grids
# ---------------------------------------------------------------------------

def _cp_mask(l1, l2, l3, tol=1e-12):
    return (
        (1 + l1 + l2 + l3 >= -tol)
        & (1 + l1 - l2 - l3 >= -tol)
        & (1 - l1 + l2 - l3 >= -tol)
        & (1 - l1 - l2 + l3 >= -tol)
    )


def _grid_min(center, half_width, step):
    axes = [np.arange(c - half_width, c + half_width + step / 2, step) for c in center]
    axes = [a[(a >= -1) & (a <= 1)] for a in axes]
    l1, l2, l3 = np.meshgrid(*axes, indexing="ij")
    det = l1 * l2 * l3
    det = np.where(_cp_mask(l1, l2, l3), det, np.inf)
    k = np.unravel_index(np.argmin(det), det.shape)
    return float(det[k]), np.array([l1[k], l2[k], l3[k]])


def min_unital_determinant(step: float = 0.01, refine: int = 5):
    """Minimum of ``l1 l2 l3`` over CP unital qubit channels by grid search.

    A step-``step`` grid over ``[-1, 1]^3`` (CP-filtered with the closed-form
    Choi eigenvalues) is followed by ``refine`` rounds of a grid ten times
    finer around the incumbent.  Returns ``(det, lambdas, history)``.
    """
    det, arg = _grid_min((0.0, 0.0, 0.0), 1.0, step)
    history = [(step, det)]
    for _ in range(refine):
        half = step
        step = step / 10
        det, arg = _grid_min(arg, half, step)
        history.append((step, det))
    return det, arg, history


def semigroup_criterion_grid(resolution: int = 20, times=None, probe_exponents=range(4, 31),
                       margin: float = 1e-3) -> dict:
    """Check the semigroup criterion for unital qubit channels on a lambda grid.

    Cells are all ``(l1, l2, l3)`` with ``l_i = k/resolution``
    (``k = 1..resolution``) passing the CP test.  Where
    ``min(l)^2 >= l1 l2 l3`` the channels ``exp(t ln diag(l))`` must be CP
    at every ``t`` in ``times`` (default ``k/16``); where ``l1 l2 l3 > min(l)^2 + margin`` some
    ``t = 2^-k`` with ``k`` in ``probe_exponents`` must break CP.
    """
    if times is None:
        times = [k / 16 for k in range(1, 17)]
    probes = [2.0**-k for k in probe_exponents]
    vals = np.arange(1, resolution + 1) / resolution
    cells = 0
    worst = np.inf
    failures = []
    counts = {"satisfying": 0, "violating": 0, "ambiguous": 0}
    for lam in itertools.product(vals, repeat=3):
        lam = np.array(lam)
        if not unital_is_cp(lam):
            continue
        cells += 1
        det = float(np.prod(lam))
        smin2 = float(lam.min()) ** 2
        if smin2 >= det:
            counts["satisfying"] += 1
            m = min(np.min(unital_cp_eigenvalues(lam**t)) for t in times)
            worst = min(worst, m + 1e-12)
            if m < -1e-12:
                failures.append({"lambda": lam.tolist(), "magnitude": -m,
                                 "description": f"CP fails on semigroup for lambda={lam.tolist()}"})
        elif det > smin2 + margin:
            counts["violating"] += 1
            m = min(np.min(unital_cp_eigenvalues(lam**t)) for t in probes)
            if not m < 0:
                failures.append({"lambda": lam.tolist(), "magnitude": max(m, 1e-300),
                                 "description": f"no CP violation detected for lambda={lam.tolist()}"})
            else:
                worst = min(worst, -m)
        else:
            counts["ambiguous"] += 1
    return {"cells": cells, "failures": failures, "worst_margin": float(worst), "counts": counts}
