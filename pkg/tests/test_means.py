import numpy as np
import pytest

from qmatfun import functions as F
from qmatfun import means as mn
from qmatfun.errors import CapabilityError, ParameterError, WindowError
from qmatfun.matcore import opnorm, psd_sqrt, random_psd

TABLED = [F.arithmetic(0.3), F.harmonic(0.3), F.geometric(0.5), F.logarithmic(),
          F.heinz(0.3), F.power_mean(0.5, 0.5)]


def _normalized(seed, dim=4, delta=0.2):
    A = random_psd(dim, delta, seed=seed)
    return A / opnorm(A)


def test_geometric_fixture():
    A = np.diag([0.64, 0.25])
    B = np.diag([0.25, 0.64])
    assert np.allclose(mn.oracle_mean(A, B, "geometric"), 0.4 * np.eye(2), atol=1e-14)


def test_oracle_geometric_riccati(psd_pair):
    A, B = psd_pair
    G = mn.oracle_mean(A, B, "geometric")
    assert opnorm(G @ np.linalg.inv(A) @ G - B) < 1e-10


def test_oracle_geometric_commuting_is_sqrt():
    A = np.diag([0.3, 0.9])
    B = np.diag([0.7, 0.2])
    assert np.allclose(mn.oracle_mean(A, B, "geometric"), psd_sqrt(A @ B))


def test_spectral_geometric_mean_commuting_case():
    A = np.diag([0.3, 0.9])
    B = np.diag([0.7, 0.2])
    assert np.allclose(mn.spectral_geometric_mean(A, B), psd_sqrt(A @ B))


@pytest.mark.parametrize("method", ["harmonic_mixture", "stieltjes"])
@pytest.mark.parametrize("spec", [F.geometric(0.5), F.logarithmic()], ids=lambda s: s.label)
def test_block_encoded_mean_accuracy(method, spec):
    A, B = _normalized(1), _normalized(2)
    delta = 0.9 * min(np.linalg.eigvalsh(A)[0], np.linalg.eigvalsh(B)[0])
    rep = mn.compute_mean(A, B, spec, method, delta, 1e-5, m=32 if method != "stieltjes" else None)
    assert rep.error <= 1e-4
    assert rep.encoding.sound()
    assert np.allclose(rep.result, rep.result.conj().T)


@pytest.mark.parametrize("method", ["harmonic-mixture", "stieltjes"])
@pytest.mark.parametrize("spec", TABLED, ids=lambda s: s.label)
def test_idempotency(method, spec):
    A = _normalized(5)
    delta = 0.9 * np.linalg.eigvalsh(A)[0]
    rep = mn.compute_mean(A, A, spec, method, delta, 1e-9)
    assert opnorm(rep.result - A) <= 1e-8


def test_error_within_ledger():
    A, B = _normalized(3), _normalized(4)
    delta = 0.9 * min(np.linalg.eigvalsh(A)[0], np.linalg.eigvalsh(B)[0])
    rep = mn.stieltjes_mean(A, B, F.arithmetic(0.5), delta, 1e-6)
    assert rep.error <= rep.ledger_bound
    assert rep.ledger_bound <= 1e-6


def test_window_check():
    A = np.diag([1.0, 0.05])
    with pytest.raises(WindowError):
        mn.harmonic_mixture_mean(A, A, "geometric", 0.1)
    with pytest.raises(ParameterError):
        mn.harmonic_mixture_mean(A, A, "geometric", 1.5)


def test_non_monotone_generator_rejected():
    with pytest.raises(CapabilityError):
        mn.oracle_mean(np.eye(2), np.eye(2), F.chi_square())


def test_unknown_method():
    with pytest.raises(ParameterError):
        mn.compute_mean(np.eye(2), np.eye(2), "geometric", "newton", 0.5)


def test_kv_contains_result_entries():
    A = np.diag([0.64, 0.25])
    B = np.diag([0.25, 0.64])
    kv = mn.compute_mean(A, B, "geometric", "stieltjes", 0.2, 1e-4).as_kv()
    assert "result[0,0]=" in kv and "method=stieltjes" in kv
