import numpy as np
import pytest
from hypothesis import given, strategies as st

from chandiv import linalg as la
from chandiv.bases import basis_change, basis_elements, gellmann, matrix_units, unitary_basis


def _cmat(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_sandwich_matches_vec(d, seed):
    rng = np.random.default_rng(seed)
    a, b, x = _cmat(rng, d), _cmat(rng, d), _cmat(rng, d)
    assert np.allclose(la.sandwich(a, b) @ la.vec(x), la.vec(a @ x @ b))


@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_reshuffle_is_involution(d, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((d * d, d * d))
    assert np.allclose(la.reshuffle(la.reshuffle(m, d), d), m)


def test_choi_transfer_roundtrip(rng):
    d = 3
    t = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
    assert np.allclose(la.choi_to_transfer(la.transfer_to_choi(t, d), d), t)


def test_identity_choi_is_max_entangled():
    d = 3
    om = la.max_entangled(d)
    tau = la.transfer_to_choi(np.eye(d * d), d)
    assert np.allclose(tau, np.outer(om, om.conj()))


def test_partial_traces_of_product():
    rng = np.random.default_rng(0)
    a, b = _cmat(rng, 3), _cmat(rng, 3)
    m = np.kron(a, b)
    assert np.allclose(la.ptrace_out(m, 3), np.trace(a) * b)
    assert np.allclose(la.ptrace_in(m, 3), np.trace(b) * a)


def test_polar_unitary(rng):
    m = _cmat(rng, 3)
    u = la.polar_unitary(m)
    assert np.allclose(u @ u.conj().T, np.eye(3))
    p = u.conj().T @ m
    assert np.allclose(p, p.conj().T)
    assert np.linalg.eigvalsh(p).min() > 0


def test_psd_sqrt_and_inverse(rng):
    a = _cmat(rng, 3)
    p = a @ a.conj().T + np.eye(3)
    s = la.psd_sqrt(p)
    assert np.allclose(s @ s, p)
    assert np.allclose(la.psd_inv_sqrt(p) @ s, np.eye(3))


@pytest.mark.parametrize("name", ["matrix_units", "gellmann", "unitary"])
@pytest.mark.parametrize("d", [2, 3, 4])
def test_bases_orthonormal(name, d):
    f = basis_elements(name, d)
    gram = np.einsum("aij,bij->ab", f.conj(), f)
    assert np.allclose(gram, np.eye(d * d))
    s = basis_change(name, d)
    assert np.allclose(s.conj().T @ s, np.eye(d * d))


@pytest.mark.parametrize("d", [2, 3, 5])
def test_identity_first_and_traceless_rest(d):
    for f in (gellmann(d), unitary_basis(d)):
        assert np.allclose(f[0], np.eye(d) / np.sqrt(d))
        assert np.allclose(np.trace(f[1:], axis1=1, axis2=2), 0)


def test_qubit_gellmann_is_pauli():
    sx = np.array([[0, 1], [1, 0]])
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1, -1])
    g = gellmann(2)
    for k, s in enumerate((sx, sy, sz), start=1):
        assert np.allclose(g[k], s / np.sqrt(2))


def test_unitary_basis_elements_are_scaled_unitaries():
    d = 3
    for f in unitary_basis(d):
        u = np.sqrt(d) * f
        assert np.allclose(u @ u.conj().T, np.eye(d))


def test_matrix_units_order():
    e = matrix_units(2)
    assert e[1][0, 1] == 1 and e[2][1, 0] == 1


def test_unknown_basis():
    with pytest.raises(ValueError):
        basis_elements("pauli", 2)
