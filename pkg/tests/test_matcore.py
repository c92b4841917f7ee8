import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmatfun import matcore as mc
from qmatfun.errors import (
    DomainError,
    NotHermitianError,
    SingularMatrixError,
    ValidationError,
    WindowError,
)


def test_check_hermitian_symmetrizes_tiny_asymmetry():
    M = np.array([[1.0, 2.0 + 1e-14], [2.0, 3.0]])
    H = mc.check_hermitian(M)
    assert np.array_equal(H, H.conj().T)


def test_check_hermitian_rejects_large_asymmetry():
    with pytest.raises(NotHermitianError):
        mc.check_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_check_density_rejects_bad_trace():
    with pytest.raises(ValidationError):
        mc.check_density(np.eye(2))


def test_check_density_invertibility():
    with pytest.raises(SingularMatrixError):
        mc.check_density(np.diag([1.0, 0.0]), require_invertible=True)


def test_spectrum_window():
    mc.check_spectrum_window(np.diag([0.2, 0.9]), 0.1, 1.0)
    with pytest.raises(WindowError):
        mc.check_spectrum_window(np.diag([0.05, 0.9]), 0.1, 1.0)


def test_apply_spectral_function_reports_bad_eigenvalue():
    with pytest.raises(DomainError, match="eigenvalue"):
        mc.apply_spectral_function(np.diag([1.0, -1.0]), np.log)


@pytest.mark.parametrize("dim", [2, 4, 8])
@pytest.mark.parametrize("kappa", [1.0, 4.0, 50.0])
def test_random_density_condition_and_trace(dim, kappa):
    rho = mc.random_density(dim, kappa, seed=dim)
    w = np.linalg.eigvalsh(rho)
    assert abs(np.trace(rho) - 1) < 1e-12
    assert w[-1] / w[0] == pytest.approx(kappa, rel=1e-9)


def test_random_density_is_reproducible():
    assert np.array_equal(mc.random_density(4, 3.0, seed=5), mc.random_density(4, 3.0, seed=5))


def test_random_unitary_is_unitary():
    U = mc.random_unitary(6, seed=1)
    assert np.allclose(U.conj().T @ U, np.eye(6), atol=1e-12)


def test_psd_sqrt_and_inverse(psd_pair):
    A, _ = psd_pair
    S = mc.psd_sqrt(A)
    Si = mc.psd_inv_sqrt(A)
    assert np.allclose(S @ S, A, atol=1e-13)
    assert np.allclose(S @ Si, np.eye(4), atol=1e-12)


def test_partial_trace_product_state():
    a = mc.random_density(2, 2.0, seed=1)
    b = mc.random_density(3, 2.0, seed=2)
    ab = np.kron(a, b)
    assert np.allclose(mc.partial_trace(ab, (2, 3), keep=[0]), a)
    assert np.allclose(mc.partial_trace(ab, (2, 3), keep=1), b)


def test_condition_number():
    assert mc.condition_number(np.diag([0.1, 0.5, 1.0])) == pytest.approx(10.0)


finite = st.floats(min_value=-1e300, max_value=1e300, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_matrix_text_roundtrip_bit_exact(rows, cols, data):
    re = data.draw(st.lists(finite, min_size=rows * cols, max_size=rows * cols))
    im = data.draw(st.lists(finite, min_size=rows * cols, max_size=rows * cols))
    M = (np.array(re) + 1j * np.array(im)).reshape(rows, cols)
    back = mc.parse_matrix(mc.format_matrix(M, comment="roundtrip"))
    assert np.array_equal(back.view(np.float64), M.view(np.float64))


def test_matrix_file_roundtrip(tmp_path):
    M = mc.random_hermitian(3, seed=2)
    path = tmp_path / "m.mat"
    mc.write_matrix(path, M)
    assert np.array_equal(mc.read_matrix(path), M)


@pytest.mark.parametrize("text", [
    "",
    "2 x\n",
    "1 1\n1.0\n",
    "1 2\n1 0\n",
    "1 1\nfoo bar\n",
])
def test_parse_matrix_rejects_malformed(text):
    with pytest.raises(ValidationError):
        mc.parse_matrix(text)
