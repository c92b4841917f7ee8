import math

import mpmath
import numpy as np
import pytest

from qmatfun import funcapprox as fa
from qmatfun import functions as F
from qmatfun.errors import ContractError, ParameterError


def _mp_log_target(beta, xs):
    lb = mpmath.log(mpmath.mpf(beta))
    return np.array([float(mpmath.log(mpmath.mpf(x)) / (2 * lb)) for x in xs])


@pytest.mark.parametrize("beta", [1 / 4, 1 / 8, 1 / 16, 1 / 32])
def test_log_poly_error_against_mpmath(beta):
    p = fa.log_poly(beta, 1e-6)
    xs = np.geomspace(beta, 1.0, 257)
    assert np.max(np.abs(p(xs) - _mp_log_target(beta, xs))) <= 1e-6
    assert p.qsvt_admissible


def test_log_poly_degree_grows_with_inverse_beta():
    degs = [fa.log_poly(b, 1e-6).degree for b in (1 / 4, 1 / 8, 1 / 16, 1 / 32)]
    assert degs == sorted(degs)
    assert fa.log_poly(1 / 16, 1e-6).charged_degree == math.ceil(16 * math.log(1e6))


def test_xlogx_poly_is_x_times_log_poly():
    beta = 1 / 16
    p = fa.xlogx_poly(beta, 1e-6)
    xs = np.linspace(beta, 1, 101)
    want = xs * np.log(xs) / (2 * math.log(beta))
    assert np.max(np.abs(p(xs) - want)) <= p.certified_error + 1e-15
    assert p.degree == fa.log_poly(beta, 1e-6).degree + 1


@pytest.mark.parametrize("kappa", [2.0, 10.0, 100.0])
def test_inverse_poly(kappa):
    p = fa.inverse_poly(kappa, 1e-8)
    xs = np.geomspace(1 / kappa, 1, 400)
    assert np.max(np.abs(p(xs) - 1 / (kappa * xs))) <= 1e-8
    assert p.qsvt_admissible


@pytest.mark.parametrize("c", [0.25, 0.5, 0.75])
def test_power_polys(c):
    kappa = 8.0
    xs = np.geomspace(1 / kappa, 1, 300)
    neg = fa.negative_power_poly(c, kappa, 1e-8)
    pos = fa.positive_power_poly(c, kappa, 1e-8)
    assert np.max(np.abs(neg(xs) - xs**-c / (2 * kappa**c))) <= 1e-8
    assert np.max(np.abs(pos(xs) - xs**c / 2)) <= 1e-8
    assert neg.qsvt_admissible and pos.qsvt_admissible


def test_require_admissible_raises_for_large_polynomial():
    p = fa.chebyshev_fit(lambda x: 3 * x, 0.0, 1.0, 1e-10)
    with pytest.raises(ContractError):
        p.require_admissible()


def test_log_resolvent_matches_mpmath_and_vanishes_at_one():
    beta = 1 / 16
    r = fa.log_resolvent(beta, 16, weighted=False)
    xs = np.geomspace(beta, 1, 200)
    want = 2 * _mp_log_target(beta, xs)
    assert np.max(np.abs(r(xs) - want)) <= r.certified_error * 1.01 + 1e-15
    assert abs(r(1.0)) < 1e-15
    assert np.all(r.poles.weights > 0)


def test_log_resolvent_geometric_decay():
    errs = [fa.log_resolvent(1 / 16, m, weighted=False).certified_error for m in (4, 8, 16, 32)]
    for a, b in zip(errs, errs[1:]):
        assert b <= 0.5 * a


@pytest.mark.parametrize("beta", [1 / 4, 1 / 16, 1 / 64])
def test_log_stieltjes_size_is_log_log(beta):
    eps = 1e-6
    r = fa.log_stieltjes(beta, eps, weighted=False)
    assert r.certified_error <= eps
    assert r.m <= 1.0 * math.log(1 / beta) * math.log(1 / eps)


def test_quadrature_rule_text_roundtrip():
    r = fa.log_resolvent(1 / 8, 8)
    back = fa.QuadratureRule.from_text(r.poles.to_text())
    assert np.array_equal(back.nodes, r.poles.nodes)
    assert np.array_equal(back.weights, r.poles.weights)


def test_quadrature_rule_rejects_negative_weights():
    with pytest.raises(ParameterError):
        fa.QuadratureRule(np.array([1.0]), np.array([-1.0]), (0.0, 1.0))


@pytest.mark.parametrize("spec", [F.xlogx(), F.kl_form(), F.power_alpha(0.5), F.chi_square()],
                         ids=lambda s: s.label)
def test_kraus_rational_certified(spec):
    r = fa.kraus_rational(spec, 0.1, 1e-6, upper=3.0)
    xs = np.geomspace(0.1, 3.0, 300)
    assert np.max(np.abs(r(xs) - spec(xs))) <= 1e-6
    assert np.all(r.weights >= 0)


@pytest.mark.parametrize("spec", [F.geometric(0.5), F.logarithmic(), F.heinz(0.3),
                                  F.power_mean(0.5, 0.5), F.power_mean(-0.5, 0.3),
                                  F.harmonic(0.3), F.arithmetic(0.3)], ids=lambda s: s.label)
def test_monotone_stieltjes_rational(spec):
    r = fa.monotone_stieltjes_rational(spec, 0.1, 1e-6, upper=10.0)
    xs = np.geomspace(0.1, 10.0, 300)
    assert np.max(np.abs(r(xs) - spec(xs))) <= 1e-6
    assert r(1.0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("spec", [F.geometric(0.5), F.logarithmic()], ids=lambda s: s.label)
def test_mixture_rule_converges_geometrically(spec):
    errs = [fa.kubo_ando_measure(spec, m, (0.1, 10.0)).certified_error for m in (4, 8, 16, 32)]
    for a, b in zip(errs, errs[1:]):
        assert b <= 0.5 * a or b < 1e-12
    q = fa.kubo_ando_measure(spec, 32)
    assert q.weights.sum() == pytest.approx(1.0, abs=1e-14)
