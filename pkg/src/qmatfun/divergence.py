"""Maximal f-divergence: exact oracle and block-encoding pipelines.

For density matrices ``rho`` and invertible ``sigma``

.. math:: D_f(\\rho\\|\\sigma) = \\mathrm{Tr}[\\sigma^{1/2} f(\\sigma^{-1/2}\\rho\\sigma^{-1/2})\\sigma^{1/2}].

The pipelines build ``gamma = sigma^{-1/2} rho sigma^{-1/2} / s`` with
``s = 4 kappa_w`` and ``kappa_w = 1/lambda_min(sigma)`` (the window on which
the negative-power transform of the encoded ``sigma`` is defined), then

* ``route1``: apply the polynomial ``x P(x) ~ x log x / (2 log beta)``;
* ``route2``: evaluate ``gamma log gamma`` through shifted resolvents
  ``(gamma + tau_k)^{-1}`` of a positive log quadrature;
* ``general_convex``: evaluate a positive Kraus rational ``r_m(A)`` of
  ``A = s gamma`` for any supported operator-convex ``f``.

For ``f = x log x`` the divergence follows from the encoded
``G ~ gamma log gamma / (2 log beta)`` through

.. math:: D = s\\,(2\\log\\beta)\\,\\mathrm{Tr}[\\sigma G] + \\log(s)\\,\\mathrm{Tr}\\rho,

which the report records as a normalization trail.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import functions as F
from .blockenc import (
    QueryCount,
    encode_density,
    identity_encoding,
    linear_combination,
    product,
    renormalized,
    scale_down,
)
from .errors import CapabilityError, DimensionError, ParameterError
from .funcapprox import kraus_rational, log_stieltjes, xlogx_poly
from .matcore import (
    apply_spectral_function,
    check_density,
    hermitian_eig,
    opnorm,
    psd_inv_sqrt,
    psd_sqrt,
)
from .qsvt import amplify, apply_polynomial, invert, power_neg, retarget

__all__ = [
    "GammaBundle",
    "DivergenceReport",
    "oracle_divergence",
    "classical_divergence",
    "build_gamma",
    "trace_expectation",
    "xlogx_route1",
    "xlogx_route2",
    "general_convex",
    "estimate_divergence",
    "ACCESS_MODELS",
]

ACCESS_MODELS = ("purification", "sample_emulated")
WINDOW_MARGIN = 0.9


def _spec(f):
    if isinstance(f, str):
        return F.from_name(f)
    return f


def oracle_divergence(rho, sigma, f):
    """Exact ``Tr[sigma^{1/2} f(sigma^{-1/2} rho sigma^{-1/2}) sigma^{1/2}]``.

    Parameters
    ----------
    rho, sigma : ndarray
        Density matrices; `sigma` must be positive definite.
    f : FunctionSpec or str
        Scalar generator (any vectorized callable with ``f(1) = 0`` works).
    """
    f = _spec(f)
    rho = check_density(rho, name="rho")
    sigma = check_density(sigma, require_invertible=True, name="sigma")
    Si = psd_inv_sqrt(sigma)
    S = psd_sqrt(sigma)
    A = Si @ rho @ Si
    A = 0.5 * (A + A.conj().T)
    fA = apply_spectral_function(A, lambda x: f(np.clip(x, 0.0, None)), tol=1e-9)
    return float(np.trace(S @ fA @ S).real)


def classical_divergence(p, q, f):
    """Classical ``sum_i q_i f(p_i/q_i)`` for probability vectors with ``q > 0``."""
    f = _spec(f)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return float(np.sum(q * f(p / q)))


@dataclass(frozen=True, eq=False)
class GammaBundle:
    """Encoding of ``gamma = sigma^{-1/2} rho sigma^{-1/2} / (4 kappa_window)``.

    Attributes
    ----------
    encoding : BlockEncoding
    kappa_sigma : float
        Condition number of ``sigma``.
    kappa_window : float
        ``1/lambda_min(sigma)``; the normalization uses ``s = 4 kappa_window``.
    kappa_gamma : float
        Condition number of ``gamma``.
    oracle_gamma : ndarray
        Exact ``gamma``.
    gamma_min, gamma_max : float
        Extreme eigenvalues of the exact ``gamma``.
    """

    encoding: object
    kappa_sigma: float
    kappa_window: float
    kappa_gamma: float
    oracle_gamma: np.ndarray
    gamma_min: float
    gamma_max: float
    sigma_encoding: object = None

    @property
    def scale(self):
        return 4.0 * self.kappa_window


def build_gamma(rho, sigma, eps):
    """Encode ``gamma`` from purification encodings of ``rho`` and ``sigma``.

    ``sigma^{-1/2}/(2 kappa_w^{1/2})`` comes from the negative-power transform
    on the window ``[1/kappa_w, 1]``; two products sandwich ``rho``.
    """
    rho = check_density(rho, name="rho")
    sigma = check_density(sigma, require_invertible=True, name="sigma")
    if rho.shape != sigma.shape:
        raise DimensionError("rho and sigma must have the same dimension")
    ws = hermitian_eig(sigma).eigenvalues
    kappa_sigma = float(ws[-1] / ws[0])
    kappa_w = float(1.0 / ws[0])
    enc_rho = encode_density(rho, "rho")
    enc_sigma = encode_density(sigma, "sigma")
    S = power_neg(enc_sigma, 0.5, kappa_w, eps, label="sigma^-1/2")
    g = product(product(S, enc_rho, label="S rho"), S, label="gamma")
    Si = psd_inv_sqrt(sigma)
    gamma = Si @ rho @ Si / (4.0 * kappa_w)
    gamma = 0.5 * (gamma + gamma.conj().T)
    wg = hermitian_eig(gamma).eigenvalues
    kappa_gamma = float(wg[-1] / wg[0]) if wg[0] > 0 else float("inf")
    return GammaBundle(g, kappa_sigma, kappa_w, kappa_gamma, gamma, float(wg[0]),
                       float(wg[-1]), enc_sigma)


def _rng(noise_seed):
    return np.random.default_rng(noise_seed)


def trace_expectation(sigma, g, access_model="purification", eps=1e-3, noise=False,
                      seed=None):
    """Trace estimate used in the final step.

    ``purification`` returns ``Tr[sigma extract(g)]``; ``sample_emulated``
    returns ``Tr[(pi sigma/4) extract(g)] / N``. With ``noise=True`` a
    zero-mean uniform perturbation of magnitude at most `eps` (seeded) is
    added, standing in for the statistical error of amplitude estimation.
    """
    if access_model not in ACCESS_MODELS:
        raise ParameterError(f"unknown access model {access_model!r}")
    sigma = np.asarray(sigma)
    G = g.extract() if hasattr(g, "extract") else np.asarray(g)
    if sigma.shape != G.shape:
        raise DimensionError(f"sigma {sigma.shape} and block {G.shape} differ in shape")
    val = float(np.real(np.trace(sigma @ G)))
    if access_model == "sample_emulated":
        N = sigma.shape[0]
        val = (math.pi / (4.0 * N)) * val
    if noise:
        val += float(_rng(seed).uniform(-eps, eps))
    return val


def trace_queries(g_queries, access_model, eps_trace, sigma_name="sigma"):
    """Queries charged for the trace estimate and the repetition count.

    Purification access charges ``ceil(1/eps)`` coherent uses of the
    ``sigma`` preparation and of the block encoding; sample access charges
    ``ceil(1/eps^2)`` repetitions of one use of each.
    """
    prim = f"U_{sigma_name}"
    one = g_queries + QueryCount.of({prim: 1, prim + "†": 1})
    if access_model == "purification":
        reps = int(math.ceil(1.0 / eps_trace))
        return one.scaled(reps), 1
    reps = int(math.ceil(1.0 / eps_trace**2))
    return one, reps


@dataclass(frozen=True, eq=False)
class DivergenceReport:
    """Outcome of a divergence pipeline.

    Attributes
    ----------
    estimate, oracle : float
    route : str
    access_model : str
    raw : float
        Trace quantity before normalization.
    trail_factors : tuple of (name, float)
        Multiplicative factors applied to `raw` in order.
    trail_offset : tuple of (name, float)
        Additive term applied last.
    ledger_bound : float
        Error bound implied by the encoding ledger and the trail.
    tolerance : float
        Requested accuracy.
    encoding : BlockEncoding
        Final encoding fed to the trace step.
    gamma : GammaBundle
    queries : QueryCount
        Total charged queries (encoding and trace estimation).
    repetitions : int
    details : dict
        Sizes: polynomial degree, quadrature size ``m``, internal eps, window.
    noise : bool
    """

    estimate: float
    oracle: float
    route: str
    access_model: str
    raw: float
    trail_factors: tuple
    trail_offset: tuple
    ledger_bound: float
    tolerance: float
    encoding: object
    gamma: GammaBundle
    queries: QueryCount
    repetitions: int
    details: dict = field(default_factory=dict)
    noise: bool = False
    f_label: str = "x log x"

    @property
    def error(self):
        return abs(self.estimate - self.oracle)

    @property
    def within_tolerance(self):
        return self.error <= self.tolerance

    def replay_trail(self):
        """Recompute the estimate from `raw` and the recorded trail."""
        return _apply_trail(self.raw, self.trail_factors, self.trail_offset)

    def as_kv(self):
        """Deterministic ``key=value`` lines (17 significant digits)."""
        items = [
            ("kind", "divergence"),
            ("f", self.f_label),
            ("route", self.route),
            ("access", self.access_model),
            ("estimate", f"{self.estimate:.17g}"),
            ("oracle", f"{self.oracle:.17g}"),
            ("abs_error", f"{self.error:.17g}"),
            ("tolerance", f"{self.tolerance:.17g}"),
            ("ledger_bound", f"{self.ledger_bound:.17g}"),
            ("raw", f"{self.raw:.17g}"),
        ]
        for name, val in self.trail_factors:
            items.append((f"trail.factor.{name}", f"{val:.17g}"))
        for name, val in self.trail_offset:
            items.append((f"trail.offset.{name}", f"{val:.17g}"))
        items += [
            ("kappa_sigma", f"{self.gamma.kappa_sigma:.17g}"),
            ("kappa_window", f"{self.gamma.kappa_window:.17g}"),
            ("kappa_gamma", f"{self.gamma.kappa_gamma:.17g}"),
            ("alpha", f"{self.encoding.alpha:.17g}"),
            ("ancillas", str(self.encoding.ancillas)),
            ("queries_total", str(self.queries.total)),
            ("repetitions", str(self.repetitions)),
            ("noise", "on" if self.noise else "off"),
        ]
        for k in sorted(self.details):
            v = self.details[k]
            items.append((f"detail.{k}", f"{v:.17g}" if isinstance(v, float) else str(v)))
        for k, v in self.queries.tallies:
            items.append((f"queries.{k}", str(v)))
        return "\n".join(f"{k}={v}" for k, v in items) + "\n"

    def as_table(self):
        rows = [
            ("f", self.f_label), ("route", self.route), ("access", self.access_model),
            ("estimate", f"{self.estimate:.10g}"), ("oracle", f"{self.oracle:.10g}"),
            ("|error|", f"{self.error:.3e}"), ("tolerance", f"{self.tolerance:.3e}"),
            ("ledger bound", f"{self.ledger_bound:.3e}"),
            ("kappa_sigma", f"{self.gamma.kappa_sigma:.6g}"),
            ("kappa_gamma", f"{self.gamma.kappa_gamma:.6g}"),
            ("queries", str(self.queries.total)), ("repetitions", str(self.repetitions)),
        ]
        w = max(len(r[0]) for r in rows)
        return "\n".join(f"{k:<{w}}  {v}" for k, v in rows) + "\n"


def _apply_trail(raw, factors, offset):
    val = raw
    for _, fac in factors:
        val = val * fac
    for _, off in offset:
        val = val + off
    return val


def _check_eps(eps):
    if not 0 < eps <= 0.5:
        raise ParameterError(f"eps must lie in (0, 1/2], got {eps}")


def _finish(route, access, bundle, enc, factors, offset, approx_bound, eps, rho, sigma, f,
            noise, seed, details, f_label):
    """Trace step, trail bookkeeping and report assembly."""
    N = sigma.shape[0]
    scale = 1.0
    for _, fac in factors:
        scale *= abs(fac)
    eps_trace = 0.5 * eps / max(scale, 1.0)
    raw = trace_expectation(sigma, enc, "purification", eps_trace, noise, seed)
    if access == "sample_emulated":
        raw = trace_expectation(sigma, enc, access, eps_trace * math.pi / (4 * N), noise, seed)
        factors = (("sample_normalization", 4.0 * N / math.pi),) + tuple(factors)
    estimate = _apply_trail(raw, factors, offset)
    q_trace, reps = trace_queries(enc.queries, access, eps_trace)
    oracle = oracle_divergence(rho, sigma, f)
    bound = approx_bound + (0.5 * eps if noise else 0.0)
    return DivergenceReport(estimate, oracle, route, access, raw, tuple(factors), tuple(offset),
                            bound, eps, enc, bundle, q_trace, reps, details, noise, f_label)


def _ledger_loop(build, eps, factor, start):
    """Rebuild with tighter internal eps until ``factor * ledger <= eps/2``.

    The ledger is close to linear in the internal accuracy, so each retry
    shrinks it by the observed overshoot (at least a factor of four).
    """
    eps_int = start
    for _ in range(8):
        enc, extra = build(eps_int)
        bound = factor * enc.eps
        if bound <= 0.5 * eps:
            return enc, extra, eps_int, bound
        eps_int *= min(0.25, 0.4 * eps / bound)
        if eps_int < 1e-13:
            break
    return enc, extra, eps_int, bound


def _window(bundle):
    beta = WINDOW_MARGIN * bundle.gamma_min
    if not 0 < beta < 1:
        raise ParameterError(f"degenerate gamma window beta={beta}")
    return beta


def xlogx_route1(rho, sigma, eps=1e-3, access_model="purification", noise=False, seed=None):
    """``D_{x log x}`` via direct polynomial transform of the encoded ``gamma``.

    Parameters
    ----------
    rho, sigma : ndarray
        Density matrices (``sigma`` invertible).
    eps : float
        Target additive accuracy; half goes to the encoding ledger, half to
        the trace estimate.
    access_model : {"purification", "sample_emulated"}
    noise : bool
        Add seeded trace-estimation noise.
    seed : int, optional
        Noise seed.
    """
    _check_eps(eps)
    rho = check_density(rho, name="rho")
    sigma = check_density(sigma, require_invertible=True, name="sigma")
    probe = build_gamma(rho, sigma, 1e-6)
    beta = _window(probe)
    s = probe.scale
    factors = (("two_log_beta", 2.0 * math.log(beta)), ("four_kappa", s))
    offset = (("log_four_kappa", math.log(s) * float(np.trace(rho).real)),)
    factor = abs(2.0 * math.log(beta)) * s
    holder = {}

    def build(eps_int):
        bundle = build_gamma(rho, sigma, eps_int)
        p = xlogx_poly(beta, eps_int)
        enc = apply_polynomial(bundle.encoding, p, label="gamma log gamma/(2 log beta)")
        holder["bundle"] = bundle
        return enc, p

    enc, p, eps_int, bound = _ledger_loop(build, eps, factor, eps / (20.0 * factor))
    details = {"beta": beta, "degree": p.degree, "charged_degree": p.charged_degree,
               "eps_internal": eps_int}
    return _finish("route1", access_model, holder["bundle"], enc, factors, offset, bound, eps,
                   rho, sigma, F.xlogx(), noise, seed, details, "x log x")


def _shifted(gamma_enc, shift, weight=0.5):
    """Encoding of ``weight (gamma + shift I)`` via scaling and LCU."""
    ident = identity_encoding(gamma_enc.dim, as_qubits=False)
    if shift <= 0:
        raise ParameterError("shift must be positive")
    if shift < 1:
        scaled = scale_down(ident, 1.0 / shift, label=f"{shift:.4g} I")
        return linear_combination([gamma_enc, scaled], [weight, weight],
                                  label=f"shift[{shift:.4g}]")
    return linear_combination([gamma_enc, ident], [weight, weight * shift],
                              label=f"shift[{shift:.4g}]")


def xlogx_route2(rho, sigma, eps=1e-3, access_model="purification", noise=False, seed=None):
    """``D_{x log x}`` via the resolvent (Stieltjes) representation of ``log``.

    With a positive rule ``log x ~ sum_k omega_k (alpha_k - 1/(x + tau_k))``
    on ``[beta, 1]``:

    1. encode ``(gamma + tau_k)/2`` by LCU and invert it on its window;
    2. combine the inverses into ``R = sum_k omega_k (gamma + tau_k)^{-1}``
       (node ``resolvent_sum``);
    3. form ``L = (sum_k omega_k alpha_k) gamma - gamma R`` scaled by
       ``1/(2 log beta)``;
    4. amplify away the LCU subnormalization when it exceeds one;
    5. trace against ``sigma`` and apply the normalization trail.
    """
    _check_eps(eps)
    rho = check_density(rho, name="rho")
    sigma = check_density(sigma, require_invertible=True, name="sigma")
    probe = build_gamma(rho, sigma, 1e-6)
    beta = _window(probe)
    s = probe.scale
    lb = math.log(beta)
    factors = (("two_log_beta", 2.0 * lb), ("four_kappa", s))
    offset = (("log_four_kappa", math.log(s) * float(np.trace(rho).real)),)
    factor = abs(2.0 * lb) * s
    holder = {}

    def build(eps_int):
        bundle = build_gamma(rho, sigma, eps_int)
        G = bundle.encoding
        rule = log_stieltjes(beta, min(eps_int, 0.5))
        tau, omega, shifts = rule.poles.nodes, rule.poles.weights, rule.shifts
        invs, coeffs = [], []
        for t_k, w_k in zip(tau, omega):
            sh = _shifted(G, t_k)
            kappa_k = (1.0 + t_k) / (beta + t_k)
            inv = invert(renormalized(sh), kappa_k, eps_int,
                         label=f"inv[tau={t_k:.4g}]")
            invs.append(inv)
            # extract(inv) = (beta + tau)(gamma + tau)^{-1}
            coeffs.append(w_k / (beta + t_k))
        P = linear_combination(invs, coeffs, label="resolvent_sum")
        Q = product(G, P, label="gamma * resolvent_sum")
        a_sum = float(np.sum(omega * shifts))
        L = linear_combination([G, Q], [a_sum / (2.0 * lb), -1.0 / (2.0 * lb)],
                               label="log_combination")
        ext = L.extract()
        if L.alpha > 1.0:
            nrm = opnorm(ext)
            delta_amp = min(0.5, max(1e-3, 1.0 - nrm))
            enc = amplify(renormalized(L), L.alpha, delta_amp, eps_int,
                          label="remove_subnormalization")
        else:
            enc = L
        exact = apply_spectral_function(bundle.oracle_gamma,
                                        lambda x: x * np.log(x) / (2.0 * lb))
        enc = retarget(enc, exact, 0.5 * rule.certified_error,
                       label="gamma log gamma/(2 log beta)")
        holder["bundle"] = bundle
        return enc, rule

    enc, rule, eps_int, bound = _ledger_loop(build, eps, factor, eps / (20.0 * factor))
    details = {"beta": beta, "m": rule.m, "quadrature_error": rule.certified_error,
               "eps_internal": eps_int}
    return _finish("route2", access_model, holder["bundle"], enc, factors, offset, bound, eps,
                   rho, sigma, F.xlogx(), noise, seed, details, "x log x")


def general_convex(rho, sigma, f, eps=1e-3, access_model="purification", noise=False,
                   seed=None):
    """``D_f`` for an operator-convex ``f`` through its positive Kraus rational.

    With ``A = s gamma`` and ``r_m(A) = a + bA + cA^2 + sum_k w_k (A-I)^2 (A+t_k)^{-1}``
    every term is built from the encoded ``gamma``: ``(A - I)/s`` by LCU with
    the identity, resolvents by inversion of ``(gamma + t_k/s)/2``, products,
    and a final LCU. The trace ``Tr[sigma r_m(A)]`` is the estimate.
    """
    _check_eps(eps)
    f = _spec(f)
    if not f.is_convex:
        raise CapabilityError(f"{f.label} is not an operator-convex generator")
    rho = check_density(rho, name="rho")
    sigma = check_density(sigma, require_invertible=True, name="sigma")
    probe = build_gamma(rho, sigma, 1e-6)
    s = probe.scale
    lo_g = WINDOW_MARGIN * probe.gamma_min
    lo = lo_g * s
    hi = max(1.1 * probe.gamma_max * s, lo * 1.5)
    a, b, c = f.coeffs
    # largest coefficient that multiplies encoded-gamma errors
    factor = max(1.0, abs(b) * s, abs(c) * s * s)
    holder = {}

    def build(eps_int):
        bundle = build_gamma(rho, sigma, eps_int)
        G = bundle.encoding
        r = kraus_rational(f, lo, min(eps, 0.25) * 0.25, upper=hi)
        ident = identity_encoding(G.dim, as_qubits=False)
        parts, weights = [], []
        if a != 0:
            parts.append(ident)
            weights.append(a)
        if b != 0:
            parts.append(G)
            weights.append(b * s)
        if c != 0:
            parts.append(product(G, G, label="gamma^2"))
            weights.append(c * s * s)
        if r.m:
            E = linear_combination([G, ident], [1.0, -1.0 / s], label="(A-I)/s")
            EE = product(E, E, label="((A-I)/s)^2")
            for t_k, w_k in zip(r.poles.nodes, r.poles.weights):
                sh = _shifted(G, t_k / s)
                kappa_k = (1.0 + t_k / s) / (lo_g + t_k / s)
                inv = invert(renormalized(sh), kappa_k, eps_int, label=f"inv[t={t_k:.4g}]")
                parts.append(product(EE, inv, label=f"kraus_term[t={t_k:.4g}]"))
                # extract = (A-I)^2 (A+t)^{-1} (lo_g + t/s)/s
                weights.append(w_k * s / (lo_g + t_k / s))
        L = linear_combination(parts, weights, label="kraus_rational")
        A = s * bundle.oracle_gamma
        exact = apply_spectral_function(A, lambda x: f(np.clip(x, 0.0, None)), tol=1e-9)
        enc = retarget(L, exact, r.certified_error, label=f"r_m(A)[{f.describe()}]")
        holder["bundle"] = bundle
        holder["rational"] = r
        return enc, r

    enc, r, eps_int, bound = _ledger_loop(build, eps, 1.0, eps / (20.0 * factor))
    details = {"m": r.m, "rational_error": r.certified_error, "interval_lo": lo,
               "interval_hi": hi, "eps_internal": eps_int}
    return _finish("general_convex", access_model, holder["bundle"], enc, (), (), bound, eps,
                   rho, sigma, f, noise, seed, details, f.label)


def estimate_divergence(rho, sigma, f="xlogx", route="1", eps=1e-3,
                        access_model="purification", noise=False, seed=None):
    """Dispatch to a pipeline by route name (``1``, ``2`` or ``general``)."""
    f = _spec(f)
    route = str(route)
    if route in ("1", "route1"):
        if f.tag != "xlogx":
            raise CapabilityError("route 1 implements f = x log x only; use route 'general'")
        return xlogx_route1(rho, sigma, eps, access_model, noise, seed)
    if route in ("2", "route2"):
        if f.tag != "xlogx":
            raise CapabilityError("route 2 implements f = x log x only; use route 'general'")
        return xlogx_route2(rho, sigma, eps, access_model, noise, seed)
    if route in ("general", "general_convex"):
        return general_convex(rho, sigma, f, eps, access_model, noise, seed)
    raise ParameterError(f"unknown route {route!r}")
