import math

import mpmath
import numpy as np
import pytest

from qmatfun import divergence as dv
from qmatfun import functions as F
from qmatfun.errors import CapabilityError, ParameterError, SingularMatrixError, ValidationError
from qmatfun.matcore import random_unitary
from qmatfun.validation import random_state_pair

KL_COMMUTING = 0.13081203594113694  # 0.75 log 1.5 + 0.25 log 0.5


def _mp_classical(p, q, f):
    return float(mpmath.fsum(mpmath.mpf(qi) * f(mpmath.mpf(pi) / mpmath.mpf(qi))
                             for pi, qi in zip(p, q)))


def test_frozen_fixture_value():
    want = _mp_classical([0.75, 0.25], [0.5, 0.5], lambda x: x * mpmath.log(x))
    assert want == pytest.approx(KL_COMMUTING, abs=1e-15)


@pytest.mark.parametrize("dim", [2, 4, 8])
def test_oracle_reduces_to_classical_in_shared_basis(dim):
    rng = np.random.default_rng(dim)
    p = rng.dirichlet(np.ones(dim))
    q = rng.dirichlet(np.ones(dim))
    U = random_unitary(dim, seed=dim)
    rho = U @ np.diag(p) @ U.conj().T
    sigma = U @ np.diag(q) @ U.conj().T
    want = _mp_classical(p, q, lambda x: x * mpmath.log(x))
    assert dv.oracle_divergence(rho, sigma, "xlogx") == pytest.approx(want, abs=1e-10)


@pytest.mark.parametrize("name,mp_f", [
    ("chi_square", lambda x: (x - 1) ** 2),
    ("kl_form", lambda x: x * mpmath.log(x) - x + 1),
])
def test_oracle_other_generators(commuting_pair, name, mp_f):
    rho, sigma = commuting_pair
    want = _mp_classical([0.75, 0.25], [0.5, 0.5], mp_f)
    assert dv.oracle_divergence(rho, sigma, name) == pytest.approx(want, abs=1e-12)


def test_oracle_of_identical_states_is_zero(state_pair):
    rho, _ = state_pair
    assert abs(dv.oracle_divergence(rho, rho, "xlogx")) < 1e-12


def test_build_gamma_normalization():
    bundle = dv.build_gamma(np.eye(2) / 2, np.eye(2) / 2, 1e-8)
    assert np.allclose(bundle.oracle_gamma, np.eye(2) / 8)
    assert bundle.scale == pytest.approx(8.0)
    assert np.allclose(bundle.encoding.extract(), np.eye(2) / 8, atol=1e-7)
    assert bundle.encoding.sound()


@pytest.mark.parametrize("route", ["1", "2"])
def test_routes_on_fixture(commuting_pair, route):
    rho, sigma = commuting_pair
    rep = dv.estimate_divergence(rho, sigma, "xlogx", route, 1e-3)
    assert rep.error <= 1e-3
    assert rep.within_tolerance
    assert rep.replay_trail() == pytest.approx(rep.estimate, rel=1e-14)
    assert rep.encoding.sound()


def test_routes_agree_on_random_pair():
    rho, sigma = random_state_pair(4, 4.0, seed=11)
    r1 = dv.xlogx_route1(rho, sigma, 1e-3)
    r2 = dv.xlogx_route2(rho, sigma, 1e-3)
    assert r1.error <= 1e-3 and r2.error <= 1e-3
    assert abs(r1.estimate - r2.estimate) <= 2e-3


def test_route2_provenance_names_resolvent_sum(commuting_pair):
    rep = dv.xlogx_route2(*commuting_pair, 1e-3)
    assert "resolvent_sum" in rep.encoding.explain()


def test_trail_factors():
    rep = dv.xlogx_route1(np.eye(2) / 2, np.eye(2) / 2, 1e-3)
    names = [n for n, _ in rep.trail_factors]
    assert names == ["two_log_beta", "four_kappa"]
    assert dict(rep.trail_factors)["four_kappa"] == pytest.approx(8.0)
    assert dict(rep.trail_offset)["log_four_kappa"] == pytest.approx(math.log(8.0))


def test_sample_access_matches_purification(commuting_pair):
    a = dv.xlogx_route1(*commuting_pair, 1e-3, access_model="purification")
    b = dv.xlogx_route1(*commuting_pair, 1e-3, access_model="sample_emulated")
    assert b.estimate == pytest.approx(a.estimate, abs=1e-12)
    assert b.trail_factors[0][0] == "sample_normalization"
    assert b.repetitions > a.repetitions


def test_noise_is_seeded(commuting_pair):
    a = dv.xlogx_route1(*commuting_pair, 1e-3, noise=True, seed=5)
    b = dv.xlogx_route1(*commuting_pair, 1e-3, noise=True, seed=5)
    c = dv.xlogx_route1(*commuting_pair, 1e-3, noise=True, seed=6)
    assert a.estimate == b.estimate != c.estimate


@pytest.mark.parametrize("f,want", [
    (F.chi_square(), 0.25),
    (F.kl_form(), KL_COMMUTING),
    (F.power_alpha(0.5), 1 - (0.5 * math.sqrt(1.5) + 0.5 * math.sqrt(0.5))),
], ids=lambda v: getattr(v, "label", ""))
def test_general_convex_fixture(commuting_pair, f, want):
    rep = dv.general_convex(*commuting_pair, f, 1e-3)
    assert rep.oracle == pytest.approx(want, abs=1e-12)
    assert rep.error <= 1e-3


def test_route_capability_errors(commuting_pair):
    with pytest.raises(CapabilityError):
        dv.estimate_divergence(*commuting_pair, "chi_square", "1")
    with pytest.raises(ParameterError):
        dv.estimate_divergence(*commuting_pair, "xlogx", "3")


def test_rejects_bad_inputs():
    with pytest.raises(SingularMatrixError):
        dv.xlogx_route1(np.diag([0.5, 0.5]), np.diag([1.0, 0.0]))
    with pytest.raises(ValidationError):
        dv.xlogx_route1(np.diag([0.9, 0.3]), np.eye(2) / 2)


def test_kv_is_deterministic(commuting_pair):
    a = dv.xlogx_route2(*commuting_pair, 1e-3).as_kv()
    b = dv.xlogx_route2(*commuting_pair, 1e-3).as_kv()
    assert a == b
    assert "estimate=" in a and "trail.factor.four_kappa=" in a
