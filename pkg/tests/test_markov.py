import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from chandiv import linalg as la
from chandiv.bases import basis_change
from chandiv.channel import KrausRep, build_channel, compose, determinant, distance, unitary_channel
from chandiv.errors import DimensionMismatch, InvalidGenerator, NotHermitian, NotPSD
from chandiv.markov import (
    GKSForm,
    LindbladGenerator,
    constant_schedule,
    det_from_gks,
    exp_generator,
    fixed_point_matrix,
    generator_from_transfer,
    gks_projection,
    make_generator,
    markov_approx,
    optimal_unitary,
    time_ordered_exp,
    traceless_unitary_basis,
    validate_generator,
)
from chandiv.sampling import random_generator, random_unitary

from conftest import random_kraus

SZ = np.diag([1.0, -1.0])
SX = np.array([[0.0, 1.0], [1.0, 0.0]])


def lindblad_apply(h, ops, rho):
    """Direct evaluation of i[rho, H] + sum A rho A^dag - {A^dag A, rho}/2."""
    out = 1j * (rho @ h - h @ rho)
    for a in ops:
        out = out + a @ rho @ a.conj().T - 0.5 * (a.conj().T @ a @ rho + rho @ a.conj().T @ a)
    return out


def test_dephasing_generator_pauli_matrix():
    gen = make_generator(np.zeros((2, 2)), [SZ])
    b = basis_change("gellmann", 2)
    assert np.allclose(b.conj().T @ gen.transfer @ b, np.diag([0, -2, -2, 0]))


@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_transfer_matches_direct_action(d, seed):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = h + h.conj().T
    ops = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(2)]
    gen = make_generator(h, ops)
    rho = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    assert np.allclose(la.unvec(gen.transfer @ la.vec(rho), d), lindblad_apply(h, ops, rho))


@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_gks_roundtrip(d, seed):
    gen = random_generator(d, seed)
    h, g = gks_projection(gen.transfer)
    assert abs(np.trace(h)) < 1e-12
    assert np.allclose(h, gen.hamiltonian, atol=1e-10)
    assert np.allclose(g.g, gen.dissipator.g, atol=1e-10)
    again = generator_from_transfer(gen.transfer)
    assert np.allclose(again.transfer, gen.transfer, atol=1e-10)


def test_lindblad_ops_to_gks_keeps_map(rng):
    ops = [rng.standard_normal((3, 3)) for _ in range(3)]
    gen = make_generator(np.diag([1.0, 0.0, -1.0]), ops)
    std = generator_from_transfer(gen.transfer)
    assert np.allclose(std.transfer, gen.transfer)
    assert np.linalg.eigvalsh(std.dissipator.g).min() > -1e-10


def test_validate_generator_rejects():
    gen = make_generator(np.zeros((2, 2)), [SX])
    assert validate_generator(gen).valid
    bad = validate_generator(-gen.transfer)
    assert bad.trace_annihilating and not bad.conditionally_cp and not bad.valid
    assert "conditionally_cp" in bad.describe()
    notp = validate_generator(gen.transfer + np.eye(4))
    assert not notp.trace_annihilating
    with pytest.raises(InvalidGenerator):
        exp_generator(-gen.transfer, 1.0)
    with pytest.raises(InvalidGenerator):
        gks_projection(-gen.transfer)


def test_make_generator_checks():
    with pytest.raises(NotHermitian):
        make_generator(np.array([[0, 1], [0, 0]]), [SX])
    with pytest.raises(NotPSD):
        make_generator(np.zeros((2, 2)), GKSForm(-np.eye(3)))
    with pytest.raises(DimensionMismatch):
        GKSForm(np.eye(4))
    with pytest.raises(DimensionMismatch):
        LindbladGenerator(np.zeros((2, 2)), [np.eye(3)])


@given(st.integers(2, 3), st.integers(0, 2**32 - 1), st.floats(0.0, 3.0))
def test_exponential_is_channel_with_predicted_det(d, seed, t):
    gen = random_generator(d, seed)
    ch = exp_generator(gen, t)
    assert ch.is_cp and ch.is_tp
    # Jacobi: det exp(tL) = exp(t tr L), and tr L = -d tr G
    assert np.trace(gen.transfer).real == pytest.approx(-d * np.trace(gen.dissipator.g).real)
    expected = det_from_gks(gen.dissipator, t)
    assert determinant(ch) == pytest.approx(expected, rel=1e-8)
    assert expected == pytest.approx(np.exp(t * np.trace(gen.transfer).real), rel=1e-12)


def test_scaled_generator():
    gen = random_generator(2, 4)
    assert np.allclose(gen.scaled(0.3).transfer, 0.3 * gen.transfer)
    ops = LindbladGenerator(np.eye(2), [SX])
    assert np.allclose(ops.scaled(2.0).transfer, 2.0 * ops.transfer)


@given(st.integers(2, 3), st.integers(1, 9), st.integers(0, 2**32 - 1))
def test_channel_minus_identity_is_generator(d, r, seed):
    ch = build_channel(KrausRep(random_kraus(np.random.default_rng(seed), d, min(r, d * d))))
    gen = ch.transfer - np.eye(d * d)
    assert validate_generator(gen).valid
    for t in (0.1, 1.0, 10.0):
        assert exp_generator(gen, t).choi_eigenvalues.min() >= -1e-9


def test_optimal_unitary_of_unitary_channel(rng):
    u = random_unitary(3, 7)
    v, f = optimal_unitary(unitary_channel(u))
    assert f == pytest.approx(9.0)
    w = u @ v
    assert np.allclose(w, w[0, 0] * np.eye(3))
    assert np.linalg.det(v).imag == pytest.approx(0, abs=1e-10)
    assert np.linalg.det(v).real > 0


@pytest.mark.parametrize("d", [2, 3])
def test_optimal_unitary_beats_random_unitaries(d):
    rng = np.random.default_rng(d)
    ch = build_channel(KrausRep(random_kraus(rng, d, 3)))
    v, f = optimal_unitary(ch)
    assert np.allclose(v @ v.conj().T, np.eye(d))

    def obj(w):
        return sum(abs(np.trace(k @ w)) ** 2 for k in ch.kraus)

    assert obj(v) == pytest.approx(f)
    for s in range(30):
        assert obj(random_unitary(d, 100 + s)) <= f + 1e-9
    m = fixed_point_matrix(ch, v)
    assert np.allclose(m, m.conj().T, atol=1e-8)
    assert np.linalg.eigvalsh(la.hermitian_part(m)).min() >= -1e-8


def test_objective_history_is_monotone(rng):
    ch = build_channel(KrausRep(random_kraus(rng, 3, 4)))
    _, _, info = optimal_unitary(ch, return_info=True)
    hist = np.array(info["history"])
    assert np.all(np.diff(hist) >= -1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_markov_approx_is_purely_dissipative(d):
    ch = build_channel(KrausRep(random_kraus(np.random.default_rng(40 + d), d, d)))
    res = markov_approx(ch)
    h, _ = gks_projection(res.dissipative_generator)
    assert np.max(np.abs(h)) <= 1e-7
    semi = res.channel(1.0)
    assert np.allclose(semi.transfer, scipy.linalg.expm(ch.transfer - np.eye(d * d)))
    tu = compose(ch, unitary_channel(res.u0))
    assert np.allclose(res.dissipative_generator.transfer, tu.transfer - np.eye(d * d))


def test_constant_schedule_matches_expm():
    gen = random_generator(2, 11)
    ch = time_ordered_exp(constant_schedule(gen, 0.7), 5)
    assert distance(ch, exp_generator(gen, 0.7)) < 1e-12


def test_time_ordering_puts_later_times_left():
    a = make_generator(np.zeros((2, 2)), [np.array([[0, 1.0], [0, 0]])])
    b = make_generator(SX, [])
    from chandiv.markov import GeneratorSchedule

    sched = GeneratorSchedule(2.0, lambda tau: a if tau < 1 else b)
    ch = time_ordered_exp(sched, 2)
    expected = compose(exp_generator(b, 1.0), exp_generator(a, 1.0))
    assert distance(ch, expected) < 1e-12


def _rotating_schedule():
    from chandiv.markov import GeneratorSchedule

    base = make_generator(np.zeros((2, 2)), [np.array([[0, 1.0], [0, 0]])])
    h = 0.8 * SX

    def sample(tau):
        u = scipy.linalg.expm(-1j * tau * SZ)
        return make_generator(u @ h @ u.conj().T, [u @ a @ u.conj().T for a in base.dissipator])

    return GeneratorSchedule(1.0, sample)


@pytest.mark.parametrize("rule,order", [("left", 1), ("midpoint", 2)])
def test_time_ordered_convergence_order(rule, order):
    sched = _rotating_schedule()
    ref = time_ordered_exp(sched, 4096, rule="midpoint")
    e1 = distance(time_ordered_exp(sched, 32, rule=rule), ref)
    e2 = distance(time_ordered_exp(sched, 64, rule=rule), ref)
    assert e1 / e2 == pytest.approx(2**order, rel=0.15)


def test_time_ordered_bad_arguments():
    sched = constant_schedule(random_generator(2, 1), 1.0)
    with pytest.raises(ValueError):
        time_ordered_exp(sched, 0)
    with pytest.raises(ValueError):
        time_ordered_exp(sched, 4, rule="right")


def test_traceless_basis():
    f = traceless_unitary_basis(3)
    assert f.shape == (8, 3, 3)
    assert np.allclose(np.trace(f, axis1=1, axis2=2), 0)
