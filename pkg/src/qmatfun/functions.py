"""Descriptors of the scalar functions driving divergences and means.

Two families are supported:

* operator-convex ``f`` with ``f(1) = 0`` (divergence generators), written as

  .. math:: f(x) = a + b x + c x^2 + \\int_0^\\infty \\frac{(x-1)^2}{x+t}\\, d\\nu(t)

* operator-monotone ``f`` with ``f(1) = 1`` (Kubo-Ando mean generators),
  written as a mixture of weighted harmonic means

  .. math:: f(x) = \\int_0^1 \\frac{x}{(1-s) x + s}\\, d\\mu(s)

  (equivalently ``alpha + beta x + int x/(x+lam) dnu(lam)`` with
  ``alpha = mu({0})``, ``beta = mu({1})`` and ``lam = s/(1-s)``).

Each built-in ships a positive quadrature generator for its representing
measure; `custom` specs carry caller-supplied data.
"""

from dataclasses import dataclass, field
import math
from typing import Callable, Optional

import numpy as np

from .errors import CapabilityError, ParameterError

CONVEX_TAGS = ("xlogx", "chi_square", "power_alpha", "kl_form")
MONOTONE_TAGS = (
    "arithmetic",
    "harmonic",
    "geometric",
    "logarithmic",
    "heinz",
    "power_mean",
)

__all__ = [
    "FunctionSpec",
    "CONVEX_TAGS",
    "MONOTONE_TAGS",
    "xlogx",
    "chi_square",
    "power_alpha",
    "kl_form",
    "arithmetic",
    "harmonic",
    "geometric",
    "logarithmic",
    "heinz",
    "power_mean",
    "custom_convex",
    "custom_monotone",
    "from_name",
    "logarithmic_mean_scalar",
]


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x == 0, 0.0, x * np.log(np.where(x > 0, x, np.nan)))
    return out


def logarithmic_mean_scalar(x):
    """``(x - 1)/log x`` with a series branch for ``|x - 1| < 1e-4``."""
    x = np.asarray(x, dtype=float)
    u = x - 1.0
    near = np.abs(u) < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        far = u / np.log(np.where(near, 2.0, x))
    series = 1.0 + u / 2.0 - u**2 / 12.0 + u**3 / 24.0
    return np.where(near, series, far)


@dataclass(frozen=True)
class FunctionSpec:
    """Descriptor of an operator-convex or operator-monotone scalar function.

    Attributes
    ----------
    tag : str
        One of :data:`CONVEX_TAGS`, :data:`MONOTONE_TAGS` or ``"custom"``.
    kind : {"convex", "monotone"}
    params : dict
        Parameters such as ``t``, ``p``, ``alpha``.
    fn : callable
        Vectorized scalar evaluator.
    coeffs : tuple of float
        ``(a, b, c)`` for convex specs, ``(alpha, beta)`` for monotone ones.
    measure : callable or None
        ``measure(m) -> (nodes, weights)``: an ``m``-point positive rule for the
        continuous part of the representing measure (variable ``s`` in
        ``(0, 1)``); None when the measure is purely atomic.
    label : str
        Human-readable name.
    """

    tag: str
    kind: str
    params: dict
    fn: Callable
    coeffs: tuple
    measure: Optional[Callable] = field(default=None, compare=False)
    label: str = ""

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    @property
    def is_convex(self):
        return self.kind == "convex"

    @property
    def is_monotone(self):
        return self.kind == "monotone"

    @property
    def has_continuous_measure(self):
        return self.measure is not None

    def check_normalization(self, tol=1e-12):
        """Assert ``f(1) = 0`` (convex) or ``f(1) = 1`` (monotone)."""
        target = 0.0 if self.is_convex else 1.0
        val = float(self(np.array([1.0]))[0])
        if abs(val - target) > tol:
            raise ParameterError(f"{self.label}: f(1) = {val!r}, expected {target}")
        return val

    def describe(self):
        if not self.params:
            return self.tag
        inner = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.tag}({inner})"


# --------------------------------------------------------------------------
# Quadrature generators for representing measures.
#
# Convex specs: the Kraus measure nu on t in (0, inf) is pulled back to
# s = t/(1+t) in (0,1). Since (x-1)^2/(x+t) = (1-s)(x-1)^2/(x(1-s)+s), a rule
# for the pulled-back weight W(s) = nu'(t) dt/ds (1-s) gives pole weights
# w_j = v_j (1 + t_j).
#
# Monotone specs: the rule is for the mixing measure mu on s in (0,1).
# --------------------------------------------------------------------------

def _gauss_jacobi_unit(m, a_one_minus, b_s):
    """Gauss-Jacobi rule for ``int_0^1 g(s) (1-s)^a s^b ds``.

    Returns nodes and weights on (0, 1); weights integrate the weight exactly.
    """
    from scipy.special import roots_jacobi

    # the recurrence divides 0/0 at a + b = -1 for k = 1; scipy handles it
    with np.errstate(invalid="ignore", divide="ignore"):
        z, w = roots_jacobi(int(m), a_one_minus, b_s)
    s = 0.5 * (1.0 + z)
    w = w * 2.0 ** (-(a_one_minus + b_s + 1.0))
    return s, w


def _kraus_xlogx(m):
    # nu'(t) = t/(1+t)^2  ->  W(s) = s
    s, v = _gauss_jacobi_unit(m, 0.0, 1.0)
    return s, v


def _kraus_power(alpha):
    # f(x) = 1 - x^alpha: nu'(t) = sin(pi a)/pi * t^a/(1+t)^2
    # ->  W(s) = sin(pi a)/pi * s^a (1-s)^(1-a)
    def rule(m):
        s, v = _gauss_jacobi_unit(m, 1.0 - alpha, alpha)
        return s, v * math.sin(math.pi * alpha) / math.pi

    return rule


def _mu_beta(t):
    # mu for x^t: Beta(t, 1-t) density sin(pi t)/pi * s^(t-1) (1-s)^(-t)
    def rule(m):
        s, v = _gauss_jacobi_unit(m, -t, t - 1.0)
        return s, v / v.sum()

    return rule


def _mu_heinz(t):
    if t == 0.5:
        return _mu_beta(0.5)

    def rule(m):
        m1 = (m + 1) // 2
        m2 = m - m1
        s1, v1 = _mu_beta(t)(m1)
        s2, v2 = _mu_beta(1.0 - t)(max(m2, 1))
        if m2 == 0:
            s2, v2 = s2[:0], v2[:0]
            return s1, v1
        s = np.concatenate((s1, s2))
        v = np.concatenate((0.5 * v1, 0.5 * v2))
        order = np.argsort(s)
        return s[order], v[order]

    return rule


def _mu_logarithmic(m):
    # mu(ds) = dy/(y^2 + pi^2) with y = logit(s); y = pi tan(theta) makes it
    # uniform: dtheta/pi on (-pi/2, pi/2).
    from scipy.special import expit, roots_legendre

    z, w = roots_legendre(int(m))
    theta = 0.5 * math.pi * z
    s = expit(math.pi * np.tan(theta))
    v = 0.5 * w
    return s, v / v.sum()


def _power_mean_fn(p, t):
    def fn(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return ((1.0 - t) + t * x**p) ** (1.0 / p)

    return fn


def _mu_power_mean(p, t):
    """Positive rule for the mixing measure of ``((1-t) + t x^p)^(1/p)``.

    The density of mu in ``y = logit(s) = log(lam)`` is
    ``Im f(-e^y + i0) / (pi (1 + e^y))``. It decays exponentially in both
    directions; a sinh-mapped midpoint rule in ``y`` is used.
    """
    # decay rates of the density as y -> -inf and y -> +inf
    if p > 0:
        rate_lo, rate_hi = p, p
    else:
        rate_lo, rate_hi = 1.0 - p, -p
    rate = min(rate_lo, rate_hi)
    # the strip of analyticity around the real axis narrows as p -> 1
    strip = math.pi * min(1.0, abs(1.0 / p - 1.0)) if p != 0 else math.pi
    center = math.log((1.0 - t) / t) / p

    def density(y):
        lam = np.exp(y)
        with np.errstate(all="ignore"):
            zp = np.exp(p * (np.log(lam) + 1j * math.pi))
            val = np.exp(np.log((1.0 - t) + t * zp) / p)
        return val.imag / (math.pi * (1.0 + lam))

    def rule(m):
        m = int(m)
        span = 40.0 / rate
        zmax = math.asinh(span * rate)
        h = 2.0 * zmax / m
        zk = -zmax + h * (np.arange(m) + 0.5)
        y = center + np.sinh(zk) / rate
        jac = np.cosh(zk) / rate
        v = density(y) * jac * h
        keep = v > 0
        y, v = y[keep], v[keep]
        from scipy.special import expit

        return expit(y), v

    rule.strip = strip
    return rule


def _power_mean_atoms(p, t):
    if 0 < p < 1:
        return ((1.0 - t) ** (1.0 / p), t ** (1.0 / p))
    return (0.0, 0.0)


# --------------------------------------------------------------------------
# Factories
# --------------------------------------------------------------------------

def xlogx():
    """``f(x) = x log x`` (Umegaki relative entropy)."""
    return FunctionSpec("xlogx", "convex", {}, _xlogx, (-1.0, 1.0, 0.0), _kraus_xlogx, "x log x")


def kl_form():
    """``f(x) = x log x - x + 1`` (same divergence on states, no affine part)."""
    return FunctionSpec(
        "kl_form", "convex", {}, lambda x: _xlogx(x) - x + 1.0, (0.0, 0.0, 0.0),
        _kraus_xlogx, "x log x - x + 1",
    )


def chi_square():
    """``f(x) = (x - 1)^2``."""
    return FunctionSpec(
        "chi_square", "convex", {}, lambda x: (x - 1.0) ** 2, (1.0, -2.0, 1.0), None, "(x-1)^2"
    )


def power_alpha(alpha):
    """``f(x) = 1 - x^alpha`` for ``0 < alpha < 1``.

    ``x^alpha`` itself is operator concave; its negative, shifted so that
    ``f(1) = 0``, is operator convex and generates a Petz-type divergence.
    """
    alpha = float(alpha)
    if not 0 < alpha < 1:
        raise ParameterError(f"power_alpha requires 0 < alpha < 1, got {alpha}")
    return FunctionSpec(
        "power_alpha", "convex", {"alpha": alpha},
        lambda x: 1.0 - np.asarray(x, dtype=float) ** alpha,
        (alpha, -alpha, 0.0), _kraus_power(alpha), f"1 - x^{alpha:g}",
    )


def _check_t(t):
    t = float(t)
    if not 0 <= t <= 1:
        raise ParameterError(f"weight t must lie in [0, 1], got {t}")
    return t


def arithmetic(t=0.5):
    """Weighted arithmetic mean, ``f(x) = (1 - t) + t x``."""
    t = _check_t(t)
    return FunctionSpec(
        "arithmetic", "monotone", {"t": t}, lambda x: (1.0 - t) + t * x,
        (1.0 - t, t), None, f"arithmetic(t={t:g})",
    )


def harmonic(t=0.5):
    """Weighted harmonic mean, ``f(x) = x / ((1 - t) x + t)``."""
    t = _check_t(t)
    if t in (0.0, 1.0):
        return arithmetic(t)
    return FunctionSpec(
        "harmonic", "monotone", {"t": t}, lambda x: x / ((1.0 - t) * x + t),
        (0.0, 0.0), None, f"harmonic(t={t:g})",
    )


def geometric(t=0.5):
    """Weighted geometric mean, ``f(x) = x^t``."""
    t = _check_t(t)
    if t in (0.0, 1.0):
        return arithmetic(t)
    return FunctionSpec(
        "geometric", "monotone", {"t": t}, lambda x: np.asarray(x, dtype=float) ** t,
        (0.0, 0.0), _mu_beta(t), f"geometric(t={t:g})",
    )


def logarithmic():
    """Logarithmic mean, ``f(x) = (x - 1)/log x``."""
    return FunctionSpec(
        "logarithmic", "monotone", {}, logarithmic_mean_scalar, (0.0, 0.0),
        _mu_logarithmic, "logarithmic",
    )


def heinz(t=0.5):
    """Heinz mean, ``f(x) = (x^t + x^(1-t))/2``."""
    t = _check_t(t)
    if t in (0.0, 1.0):
        return arithmetic(0.5)
    return FunctionSpec(
        "heinz", "monotone", {"t": t},
        lambda x: 0.5 * (np.asarray(x, dtype=float) ** t + np.asarray(x, dtype=float) ** (1 - t)),
        (0.0, 0.0), _mu_heinz(t), f"heinz(t={t:g})",
    )


def power_mean(p, t=0.5):
    """Power mean ``f(x) = ((1 - t) + t x^p)^(1/p)`` for ``-1 <= p <= 1``.

    ``p = 1`` is the arithmetic mean, ``p = -1`` the harmonic mean and
    ``p -> 0`` the geometric mean; those limits dispatch to the dedicated specs.
    """
    p = float(p)
    t = _check_t(t)
    if not -1 <= p <= 1:
        raise ParameterError(f"power mean requires -1 <= p <= 1, got {p}")
    if abs(p) < 1e-12:
        return geometric(t)
    if p == 1.0:
        return arithmetic(t)
    if p == -1.0:
        return harmonic(t)
    if t in (0.0, 1.0):
        return arithmetic(t)
    return FunctionSpec(
        "power_mean", "monotone", {"p": p, "t": t}, _power_mean_fn(p, t),
        _power_mean_atoms(p, t), _mu_power_mean(p, t), f"power_mean(p={p:g},t={t:g})",
    )


def custom_convex(fn, a=0.0, b=0.0, c=0.0, measure=None, label="custom"):
    """User-supplied operator-convex function.

    Parameters
    ----------
    fn : callable
        Vectorized evaluator; must satisfy ``f(1) = 0``.
    a, b, c : float
        Affine and quadratic coefficients (``c >= 0``).
    measure : callable, optional
        ``measure(m) -> (s, v)``: positive rule for the pulled-back Kraus
        weight on ``s in (0, 1)`` (see module notes).
    """
    if c < 0:
        raise ParameterError("quadratic coefficient c must be >= 0")
    spec = FunctionSpec("custom", "convex", {}, fn, (float(a), float(b), float(c)), measure, label)
    spec.check_normalization()
    return spec


def custom_monotone(fn, alpha=0.0, beta=0.0, measure=None, label="custom"):
    """User-supplied operator-monotone function with mixing measure.

    Parameters
    ----------
    fn : callable
        Vectorized evaluator; must satisfy ``f(1) = 1``.
    alpha, beta : float
        Point masses of the mixing measure at ``s = 0`` and ``s = 1``.
    measure : callable, optional
        ``measure(m) -> (s, v)``: positive rule for the continuous part.
    """
    if alpha < 0 or beta < 0:
        raise ParameterError("alpha and beta must be nonnegative")
    spec = FunctionSpec("custom", "monotone", {}, fn, (float(alpha), float(beta)), measure, label)
    spec.check_normalization()
    return spec


_FACTORIES = {
    "xlogx": lambda **kw: xlogx(),
    "kl_form": lambda **kw: kl_form(),
    "chi_square": lambda **kw: chi_square(),
    "power_alpha": lambda alpha=0.5, **kw: power_alpha(alpha),
    "arithmetic": lambda t=0.5, **kw: arithmetic(t),
    "harmonic": lambda t=0.5, **kw: harmonic(t),
    "geometric": lambda t=0.5, **kw: geometric(t),
    "logarithmic": lambda **kw: logarithmic(),
    "heinz": lambda t=0.5, **kw: heinz(t),
    "power_mean": lambda p=0.5, t=0.5, **kw: power_mean(p, t),
}


def from_name(name, **params):
    """Build a built-in spec by tag name, ignoring ``None`` parameters."""
    key = name.replace("-", "_")
    if key not in _FACTORIES:
        raise CapabilityError(f"unknown function {name!r}; choose from {sorted(_FACTORIES)}")
    params = {k: v for k, v in params.items() if v is not None}
    return _FACTORIES[key](**params)
