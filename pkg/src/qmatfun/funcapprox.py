"""Scalar approximation machinery: Chebyshev polynomials and positive rationals.

Polynomials
    Chebyshev interpolants on an interval ``[lo, hi]`` with adaptively chosen
    degree, certified by a dense grid scan. Each carries the degree charged by
    the corresponding cost model (``cost_degree``), which can differ from the
    fitted degree.

Rationals
    ``convex_kraus``        ``a + b x + c x^2 + sum_k w_k (x-1)^2/(x+t_k)``
    ``monotone_stieltjes``  ``alpha + beta x + sum_k w_k x/(x+lam_k)``
    ``log_resolvent``       ``scale * sum_k omega_k (alpha_k - 1/(x+tau_k))``

All pole weights are positive. Grid certification uses the union of a uniform
grid and a Chebyshev-clustered grid so that interpolation error peaks near
the interval ends are resolved.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Chebyshev
from scipy import fft

from .errors import CapabilityError, ContractError, DomainError, ParameterError
from .functions import FunctionSpec

__all__ = [
    "Polynomial",
    "QuadratureRule",
    "RationalApprox",
    "chebyshev_fit",
    "log_poly",
    "xlogx_poly",
    "inverse_poly",
    "negative_power_poly",
    "positive_power_poly",
    "log_stieltjes",
    "log_stieltjes_rule",
    "log_resolvent",
    "kraus_rational",
    "monotone_stieltjes_rational",
    "kubo_ando_measure",
    "evaluate",
    "sup_error",
    "certification_grid",
]

MIN_GRID = 1000
MAX_DEGREE = 20000
ADMISSIBLE_TOL = 1e-9


# --------------------------------------------------------------------------
# grids
# --------------------------------------------------------------------------

def certification_grid(lo, hi, n=MIN_GRID, log_spaced=False):
    """Sorted union of a uniform grid and Chebyshev extrema on ``[lo, hi]``.

    With ``log_spaced=True`` (requires ``lo > 0``) a geometric grid is merged
    in as well, which matters for intervals spanning several decades.
    """
    n = max(int(n), 2)
    uni = np.linspace(lo, hi, n)
    k = np.arange(n)
    cheb = 0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(np.pi * k / (n - 1))
    parts = [uni, cheb]
    if log_spaced and lo > 0:
        parts.append(np.geomspace(lo, hi, n))
    g = np.unique(np.concatenate(parts))
    return np.clip(g, lo, hi)


def sup_error(r, f, interval, grid_size=MIN_GRID):
    """Maximum of ``|r(x) - f(x)|`` over a uniform grid of `interval`."""
    x = np.linspace(interval[0], interval[1], int(grid_size))
    return float(np.max(np.abs(evaluate(r, x) - np.asarray(f(x), dtype=float))))


def evaluate(r, x):
    """Evaluate a :class:`Polynomial` or :class:`RationalApprox` at `x`."""
    return r(x)


# --------------------------------------------------------------------------
# polynomials
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Polynomial:
    """Chebyshev series on ``[lo, hi]``.

    Attributes
    ----------
    series : numpy.polynomial.Chebyshev
        Series with ``domain = [lo, hi]``.
    lo, hi : float
        Approximation interval.
    target : callable or None
        Function being approximated (vectorized).
    certified_error : float
        Measured sup-error against `target` on the certification grid.
    cost_degree : int
        Degree charged by the query-cost model.
    label : str
    """

    series: Chebyshev
    lo: float
    hi: float
    target: Optional[Callable] = field(default=None, compare=False)
    certified_error: float = 0.0
    cost_degree: int = -1
    label: str = "p"

    def __call__(self, x):
        return self.series(np.asarray(x, dtype=float))

    @property
    def degree(self):
        return int(self.series.degree())

    @property
    def charged_degree(self):
        return self.cost_degree if self.cost_degree >= 0 else self.degree

    @property
    def coefficients(self):
        return np.asarray(self.series.coef)

    def grid(self, n=None):
        n = max(MIN_GRID, 8 * (self.degree + 1)) if n is None else n
        return certification_grid(self.lo, self.hi, n, log_spaced=self.lo > 0)

    def max_abs(self, lo=None, hi=None):
        """Grid maximum of ``|p|`` on ``[lo, hi]`` (defaults to the fit interval)."""
        lo = self.lo if lo is None else lo
        hi = self.hi if hi is None else hi
        x = certification_grid(lo, hi, max(MIN_GRID, 8 * (self.degree + 1)))
        return float(np.max(np.abs(self(x))))

    @property
    def qsvt_admissible(self):
        """``|p| <= 1 + 1e-9`` on the approximation interval (grid check)."""
        return self.max_abs() <= 1.0 + ADMISSIBLE_TOL

    def require_admissible(self):
        x = self.grid()
        v = np.abs(self(x))
        i = int(np.argmax(v))
        if v[i] > 1.0 + ADMISSIBLE_TOL:
            raise ContractError(
                f"polynomial {self.label} has |p({x[i]:.6g})| = {v[i]:.6g} > 1",
                x=float(x[i]), value=float(v[i]),
            )

    def lipschitz(self, lo=None, hi=None):
        """Grid maximum of ``|p'|`` on ``[lo, hi]``."""
        lo = self.lo if lo is None else lo
        hi = self.hi if hi is None else hi
        if self.degree < 1:
            return 0.0
        dp = self.series.deriv()
        x = certification_grid(lo, hi, max(MIN_GRID, 8 * (self.degree + 1)))
        return float(np.max(np.abs(dp(x))))

    def times_x(self, label=None):
        """Return the polynomial ``x p(x)`` (degree one larger)."""
        x = Chebyshev.identity(domain=[self.lo, self.hi])
        series = self.series * x
        tgt = None
        if self.target is not None:
            f = self.target
            tgt = lambda t: np.asarray(t, dtype=float) * f(t)  # noqa: E731
        p = Polynomial(series, self.lo, self.hi, tgt, 0.0,
                       self.cost_degree + 1 if self.cost_degree >= 0 else -1,
                       label or f"x*{self.label}")
        return p._certified()

    def _certified(self):
        if self.target is None:
            return self
        x = self.grid()
        err = float(np.max(np.abs(self(x) - self.target(x))))
        return Polynomial(self.series, self.lo, self.hi, self.target, err,
                          self.cost_degree, self.label)


def _cheb_coefficients(f, lo, hi, n):
    j = np.arange(n)
    xs = np.cos(np.pi * (j + 0.5) / n)
    vals = np.asarray(f(0.5 * (hi + lo) + 0.5 * (hi - lo) * xs), dtype=float)
    c = fft.dct(vals, type=2) / n
    c[0] *= 0.5
    return c


def chebyshev_fit(f, lo, hi, eps, *, label="p", cost_degree=-1, max_degree=MAX_DEGREE):
    """Chebyshev interpolant of `f` on ``[lo, hi]`` certified to `eps`.

    The degree is chosen adaptively: interpolate at a large number of
    Chebyshev points until the coefficient tail is negligible, truncate at the
    smallest degree whose discarded tail sums below ``eps/2``, then raise the
    degree until the grid sup-error is at most `eps`.

    Raises
    ------
    ParameterError
        If `eps` cannot be reached below `max_degree`.
    """
    if not hi > lo:
        raise ParameterError(f"empty interval [{lo}, {hi}]")
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    n = 64
    while True:
        c = _cheb_coefficients(f, lo, hi, n)
        tail = np.max(np.abs(c[int(0.9 * n):]))
        if tail < 1e-3 * eps or tail < 1e-16 * max(1.0, np.max(np.abs(c))) or n >= max_degree:
            break
        n *= 2
    suffix = np.cumsum(np.abs(c[::-1]))[::-1]  # suffix[k] = sum_{j>=k} |c_j|
    ok = np.nonzero(suffix <= 0.5 * eps)[0]
    d = int(ok[0]) - 1 if ok.size else n - 1
    d = max(d, 0)
    while True:
        p = Polynomial(Chebyshev(c[: d + 1], domain=[lo, hi]), lo, hi, f, 0.0,
                       cost_degree, label)._certified()
        if p.certified_error <= eps:
            return p
        if d >= n - 1:
            if n >= max_degree:
                raise ParameterError(
                    f"{label}: cannot reach eps={eps:.3e} below degree {max_degree} "
                    f"(best {p.certified_error:.3e})"
                )
            n *= 2
            c = _cheb_coefficients(f, lo, hi, n)
        d = min(int(math.ceil(1.25 * d)) + 1, n - 1)


def _check_beta_eps(beta, eps):
    if not 0 < beta <= 1:
        raise ParameterError(f"beta must lie in (0, 1], got {beta}")
    if not 0 < eps <= 0.5:
        raise ParameterError(f"eps must lie in (0, 1/2], got {eps}")


def _log_cost(beta, eps):
    return int(math.ceil((1.0 / beta) * math.log(1.0 / eps)))


@lru_cache(maxsize=512)
def log_poly(beta, eps):
    """Polynomial ``p`` with ``|p(x) - log(x)/(2 log beta)| <= eps`` on ``[beta, 1]``.

    Parameters
    ----------
    beta : float in (0, 1)
    eps : float in (0, 1/2]

    Returns
    -------
    Polynomial
        ``cost_degree = ceil((1/beta) log(1/eps))``.
    """
    _check_beta_eps(beta, eps)
    if beta == 1:
        raise ParameterError("beta = 1 gives a degenerate interval")
    scale = 1.0 / (2.0 * math.log(beta))
    target = lambda x: np.log(x) * scale  # noqa: E731
    return chebyshev_fit(target, beta, 1.0, eps, label="log/(2 log beta)",
                         cost_degree=_log_cost(beta, eps))


@lru_cache(maxsize=512)
def xlogx_poly(beta, eps):
    """Polynomial ``x P(x)`` approximating ``x log(x)/(2 log beta)`` on ``[beta, 1]``."""
    p = log_poly(beta, eps)
    return p.times_x(label="x log x/(2 log beta)")


@lru_cache(maxsize=512)
def inverse_poly(kappa, eps):
    """Polynomial approximating ``1/(kappa x)`` on ``[1/kappa, 1]``.

    ``cost_degree = ceil(kappa log(1/eps))``.
    """
    if not kappa >= 1:
        raise ParameterError(f"kappa must be >= 1, got {kappa}")
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    cost = int(math.ceil(kappa * math.log(1.0 / eps)))
    if kappa == 1:
        return Polynomial(Chebyshev([1.0], domain=[0.0, 1.0]), 0.0, 1.0,
                          lambda x: np.ones_like(np.asarray(x, dtype=float)), 0.0, cost, "1/x")
    target = lambda x: 1.0 / (kappa * np.asarray(x, dtype=float))  # noqa: E731
    return chebyshev_fit(target, 1.0 / kappa, 1.0, eps, label=f"1/({kappa:g}x)", cost_degree=cost)


@lru_cache(maxsize=512)
def negative_power_poly(c, kappa, eps, gamma=1.0):
    """Polynomial approximating ``x^(-c)/(2 kappa^c)`` on ``[1/kappa, 1]``.

    ``cost_degree = ceil(kappa (1 + c) log(gamma/eps))``.
    """
    if not 0 < c <= 1:
        raise ParameterError(f"exponent c must lie in (0, 1], got {c}")
    if not kappa >= 1:
        raise ParameterError(f"kappa must be >= 1, got {kappa}")
    cost = int(math.ceil(kappa * (1.0 + c) * max(math.log(max(gamma, 1.0) / eps), 1.0)))
    norm = 1.0 / (2.0 * kappa**c)
    target = lambda x: norm * np.asarray(x, dtype=float) ** (-c)  # noqa: E731
    if kappa == 1:
        return Polynomial(Chebyshev([0.5], domain=[0.0, 1.0]), 0.0, 1.0,
                          lambda x: 0.5 * np.ones_like(np.asarray(x, dtype=float)), 0.0, cost,
                          f"x^-{c:g}/2")
    return chebyshev_fit(target, 1.0 / kappa, 1.0, eps, label=f"x^-{c:g}/(2k^{c:g})",
                         cost_degree=cost)


@lru_cache(maxsize=512)
def positive_power_poly(c, kappa, eps):
    """Polynomial approximating ``x^c/2`` on ``[1/kappa, 1]``.

    ``cost_degree = ceil(kappa log(1/eps))``.
    """
    if not 0 < c < 1:
        raise ParameterError(f"exponent c must lie in (0, 1), got {c}")
    if not kappa >= 1:
        raise ParameterError(f"kappa must be >= 1, got {kappa}")
    cost = int(math.ceil(kappa * math.log(1.0 / eps)))
    target = lambda x: 0.5 * np.asarray(x, dtype=float) ** c  # noqa: E731
    if kappa == 1:
        return Polynomial(Chebyshev([0.5], domain=[0.0, 1.0]), 0.0, 1.0,
                          lambda x: 0.5 * np.ones_like(np.asarray(x, dtype=float)), 0.0, cost,
                          f"x^{c:g}/2")
    return chebyshev_fit(target, 1.0 / kappa, 1.0, eps, label=f"x^{c:g}/2", cost_degree=cost)


# --------------------------------------------------------------------------
# quadrature rules and rationals
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Positive quadrature rule.

    Attributes
    ----------
    nodes : ndarray
        Nonnegative nodes (``tau_k``, ``lam_k`` or mixing points ``s_j``).
    weights : ndarray
        Positive weights.
    interval : tuple of float
        Interval on which the derived approximation is certified.
    certified_error : float
        Measured grid sup-error of the derived approximation.
    theoretical_bound : float
        A-priori bound used by the cost model (NaN when unavailable).
    label : str
    """

    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple = (0.0, 1.0)
    certified_error: float = float("nan")
    theoretical_bound: float = float("nan")
    label: str = ""

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ParameterError("nodes and weights must be 1-D arrays of equal length")
        if np.any(weights <= 0):
            raise ParameterError(f"{self.label}: quadrature weights must be positive")
        if np.any(nodes < 0):
            raise ParameterError(f"{self.label}: quadrature nodes must be nonnegative")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def m(self):
        return int(self.nodes.size)

    def to_text(self):
        """Plain-text form: commented header, ``m``, then ``node weight`` lines."""
        lines = [
            f"# rule {self.label}",
            f"# interval {self.interval[0]:.17g} {self.interval[1]:.17g}",
            f"# certified_error {self.certified_error:.17g}",
            f"# theoretical_bound {self.theoretical_bound:.17g}",
            f"{self.m}",
        ]
        lines += [f"{x:.17g} {w:.17g}" for x, w in zip(self.nodes, self.weights)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        """Parse :meth:`to_text` output."""
        meta = {}
        body = []
        for ln in text.splitlines():
            ln = ln.strip()
            if not ln:
                continue
            if ln.startswith("#"):
                parts = ln[1:].split()
                if parts:
                    meta[parts[0]] = parts[1:]
                continue
            body.append(ln)
        m = int(body[0])
        data = np.array([[float(v) for v in ln.split()] for ln in body[1:]]).reshape(m, 2)
        interval = tuple(float(v) for v in meta.get("interval", ["0", "1"]))
        return cls(
            data[:, 0], data[:, 1], interval,
            float(meta.get("certified_error", ["nan"])[0]),
            float(meta.get("theoretical_bound", ["nan"])[0]),
            " ".join(meta.get("rule", [])),
        )


_KINDS = ("convex_kraus", "monotone_stieltjes", "log_resolvent")


@dataclass(frozen=True)
class RationalApprox:
    """Positive rational approximation.

    Attributes
    ----------
    kind : {"convex_kraus", "monotone_stieltjes", "log_resolvent"}
    poles : QuadratureRule
        Pole locations (``t_k``, ``lam_k`` or ``tau_k``) and positive weights.
        For ``log_resolvent`` these are the pre-rescaling weights ``omega_k``.
    a, b, c : float
        Affine/quadratic part (``alpha``, ``beta`` for monotone kinds).
    shifts : ndarray or None
        ``alpha_k = 1/(1 + tau_k)`` for ``log_resolvent``.
    scale : float
        Post-rescaling factor (``1/log beta`` for ``log_resolvent``).
    target : callable or None
        Function approximated; for ``log_resolvent`` this is
        ``log(x)/log(beta)``.
    certified_error : float
        Grid sup-error (for ``log_resolvent``: of ``x r(x)`` against
        ``x log(x)/log beta``).
    interval : tuple
    label : str
    """

    kind: str
    poles: QuadratureRule
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    shifts: Optional[np.ndarray] = None
    scale: float = 1.0
    target: Optional[Callable] = field(default=None, compare=False)
    certified_error: float = float("nan")
    interval: tuple = (0.0, 1.0)
    label: str = ""

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown rational kind {self.kind!r}")
        if self.kind == "convex_kraus" and self.c < 0:
            raise ParameterError("convex rational requires c >= 0")
        if self.kind == "monotone_stieltjes" and (self.a < 0 or self.b < 0):
            raise ParameterError("monotone rational requires alpha, beta >= 0")

    @property
    def m(self):
        return self.poles.m

    @property
    def nodes(self):
        return self.poles.nodes

    @property
    def weights(self):
        """Weights as used in evaluation (post-rescaling for ``log_resolvent``)."""
        return self.scale * self.poles.weights

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        t = self.poles.nodes
        if np.any(np.isclose(x[:, None], -t[None, :], rtol=0, atol=0)):
            raise DomainError("evaluation point coincides with a pole")
        w = self.poles.weights
        X = x[:, None]
        if self.kind == "convex_kraus":
            out = self.a + self.b * x + self.c * x**2 + ((X - 1.0) ** 2 / (X + t) * w).sum(axis=1)
        elif self.kind == "monotone_stieltjes":
            out = self.a + self.b * x + (X / (X + t) * w).sum(axis=1)
        else:
            out = self.scale * ((self.shifts - 1.0 / (X + t)) * w).sum(axis=1)
        return out[0] if scalar else out

    def to_text(self):
        head = (f"# kind {self.kind}\n# affine {self.a:.17g} {self.b:.17g} {self.c:.17g}\n"
                f"# scale {self.scale:.17g}\n")
        return head + self.poles.to_text()


def _log_grid(lo, hi, n=2000):
    return certification_grid(lo, hi, n, log_spaced=True)


def log_stieltjes_rule(beta, m):
    """Graded Gauss-Legendre rule for ``log x = int_0^inf [1/(1+t) - 1/(x+t)] dt``.

    With ``t = (1-u)/u`` the integrand becomes ``(x-1)/(1 - u(1-x))`` on
    ``u in (0, 1)``, whose only singularity sits at ``u = 1/(1-x)``, a distance
    about ``x`` beyond ``u = 1``. The unit interval is split at
    ``1 - 4^{-j}``, ``j = 1..P-1`` with ``P = max(1, ceil(log_4(1/beta)))``,
    and each panel receives an equal share of the `m` Gauss nodes.

    Returns
    -------
    tau, omega, alpha : ndarray
        Nodes ``tau_k``, positive weights ``omega_k = v_k/u_k^2`` and shifts
        ``alpha_k = 1/(1+tau_k)``.
    """
    from scipy.special import roots_legendre

    P = max(1, int(math.ceil(math.log(1.0 / beta) / math.log(4.0) - 1e-12)))
    if m < P:
        raise ParameterError(f"m={m} is smaller than the number of panels {P}")
    edges = np.concatenate(([0.0], 1.0 - 4.0 ** (-np.arange(1, P, dtype=float)), [1.0]))
    counts = np.full(P, m // P)
    counts[P - (m % P):] += 1 if m % P else 0
    us, vs = [], []
    for (a, b), q in zip(zip(edges[:-1], edges[1:]), counts):
        z, w = roots_legendre(int(q))
        us.append(0.5 * (b - a) * z + 0.5 * (a + b))
        vs.append(0.5 * (b - a) * w)
    u = np.concatenate(us)
    v = np.concatenate(vs)
    tau = (1.0 - u) / u
    omega = v / u**2
    # computed exactly as in evaluation so that the rule vanishes at x = 1
    alpha = 1.0 / (1.0 + tau)
    order = np.argsort(tau)
    return tau[order], omega[order], alpha[order]


def log_resolvent(beta, m, weighted=True):
    """Resolvent rule of size `m` for ``log(x)/log(beta)`` on ``[beta, 1]``.

    `certified_error` is ``sup |x (r(x) - log(x)/log beta)|`` when `weighted`
    (the quantity that matters for ``x log x``), else the plain sup-error.
    """
    tau, omega, alpha = log_stieltjes_rule(beta, m)
    scale = 1.0 / math.log(beta)
    target = lambda x: np.log(x) * scale  # noqa: E731
    grid = _log_grid(beta, 1.0)
    rule = QuadratureRule(tau, omega, (beta, 1.0), label=f"log-resolvent(beta={beta:g})")
    r = RationalApprox("log_resolvent", rule, shifts=alpha, scale=scale, target=target,
                       interval=(beta, 1.0), label="log x/log beta")
    w = grid if weighted else 1.0
    err = float(np.max(np.abs(w * (r(grid) - target(grid)))))
    rule = QuadratureRule(tau, omega, (beta, 1.0), err,
                          _log_resolvent_bound(beta, m), rule.label)
    return RationalApprox("log_resolvent", rule, shifts=alpha, scale=scale, target=target,
                          certified_error=err, interval=(beta, 1.0), label="log x/log beta")


_log_resolvent = log_resolvent


def _log_resolvent_bound(beta, m):
    # geometric Gauss rate per panel; a cost-model guide only
    P = max(1, int(math.ceil(math.log(1.0 / beta) / math.log(4.0) - 1e-12)))
    q = max(1, m // P)
    return float(4.0 * 5.0 ** (-q))


def log_stieltjes(beta, eps, max_m=4000, weighted=True):
    """Positive resolvent rule for ``log(x)/log(beta)`` on ``[beta, 1]``.

    Returns a ``log_resolvent`` :class:`RationalApprox` with
    ``sup |x r(x) - x log(x)/log(beta)| <= eps`` on the certification grid
    (without the factor ``x`` when `weighted` is false).
    The node count grows like ``log(1/beta) log(1/eps)``.
    """
    _check_beta_eps(beta, eps)
    if beta == 1:
        raise ParameterError("beta = 1 gives a degenerate interval")
    P = max(1, int(math.ceil(math.log(1.0 / beta) / math.log(4.0) - 1e-12)))
    q = 1
    while True:
        r = log_resolvent(beta, P * q, weighted)
        if r.certified_error <= eps:
            return r
        q += 1
        if P * q > max_m:
            raise ParameterError(f"log_stieltjes: eps={eps:g} not reached with m <= {max_m}")


def _kraus_from_rule(f, s, v, lo, hi):
    t = s / (1.0 - s)
    w = v * (1.0 + t)
    a, b, c = f.coeffs
    rule = QuadratureRule(t, w, (lo, hi), label=f"kraus[{f.describe()}]")
    return RationalApprox("convex_kraus", rule, a, b, c, target=f.fn, interval=(lo, hi),
                          label=f.label)


def _certify(r, lo, hi):
    g = _log_grid(lo, hi)
    err = float(np.max(np.abs(r(g) - r.target(g))))
    rule = QuadratureRule(r.poles.nodes, r.poles.weights, (lo, hi), err,
                          r.poles.theoretical_bound, r.poles.label)
    return RationalApprox(r.kind, rule, r.a, r.b, r.c, r.shifts, r.scale, r.target, err,
                          (lo, hi), r.label)


def _empty_rule(lo, hi, label):
    return QuadratureRule(np.zeros(0), np.zeros(0), (lo, hi), 0.0, 0.0, label)


def kraus_rational(f, delta, eps, upper=1.0, m=None, max_m=400):
    """Positive Kraus-type rational approximation of an operator-convex `f`.

    Parameters
    ----------
    f : FunctionSpec
        Convex spec with a built-in or custom Kraus measure.
    delta : float
        Lower end of the interval.
    eps : float
        Target sup-error on ``[delta, upper]``.
    upper : float, optional
        Upper end of the interval (default 1).
    m : int, optional
        Fixed number of poles (skips the adaptive search).

    Raises
    ------
    CapabilityError
        If `f` has no Kraus measure and is not purely quadratic.
    """
    if not isinstance(f, FunctionSpec) or not f.is_convex:
        raise CapabilityError("kraus_rational requires an operator-convex FunctionSpec")
    if not 0 < delta < upper:
        raise ParameterError(f"need 0 < delta < upper, got delta={delta}, upper={upper}")
    a, b, c = f.coeffs
    if f.measure is None:
        if f.tag == "custom" and not _is_quadratic(f, delta, upper):
            raise CapabilityError("custom convex spec needs a Kraus measure")
        r = RationalApprox("convex_kraus", _empty_rule(delta, upper, f.tag), a, b, c,
                           target=f.fn, interval=(delta, upper), label=f.label)
        return _certify(r, delta, upper)
    if m is not None:
        s, v = _quiet(f.measure, int(m))
        return _certify(_kraus_from_rule(f, s, v, delta, upper), delta, upper)
    for mm in range(1, max_m + 1):
        s, v = _quiet(f.measure, mm)
        r = _certify(_kraus_from_rule(f, s, v, delta, upper), delta, upper)
        if r.certified_error <= eps:
            return r
    raise ParameterError(f"kraus_rational: eps={eps:g} not reached with m <= {max_m}")


def _is_quadratic(f, lo, hi):
    a, b, c = f.coeffs
    x = np.linspace(lo, hi, 64)
    return np.max(np.abs(f(x) - (a + b * x + c * x**2))) < 1e-12


def _quiet(measure, m):
    with np.errstate(invalid="ignore", divide="ignore"):
        return measure(m)


def _mixing_rule(f, m, edge=1e-12):
    """Continuous part of the mixing measure, renormalized so total mass is 1.

    Returns ``(s, v, alpha, beta)``: nodes within `edge` of ``0`` or ``1``
    (which the logarithmic-type substitutions produce in floating point) are
    folded into the point masses ``alpha`` and ``beta``.
    """
    alpha, beta = f.coeffs
    s, v = _quiet(f.measure, m)
    keep = v > 0
    s, v = s[keep], v[keep]
    v = v * (1.0 - alpha - beta) / v.sum()
    low, high = s <= edge, s >= 1.0 - edge
    alpha = alpha + float(v[low].sum())
    beta = beta + float(v[high].sum())
    mid = ~(low | high)
    return s[mid], v[mid], alpha, beta


def monotone_stieltjes_rational(f, delta, eps, upper=1.0, m=None, max_m=400):
    """Positive Stieltjes rational ``alpha + beta x + sum w_k x/(x + lam_k)``.

    The poles derive from a positive rule ``(s_j, v_j)`` for the mixing
    measure: ``lam_j = s_j/(1-s_j)`` and ``w_j = v_j/(1-s_j)``. Weights are
    normalized so that ``r(1) = 1``.

    Parameters
    ----------
    f : FunctionSpec
        Operator-monotone spec.
    delta, upper : float
        Certification interval ``[delta, upper]``.
    eps : float
        Target sup-error.
    m : int, optional
        Fixed number of poles.
    """
    if not isinstance(f, FunctionSpec) or not f.is_monotone:
        raise CapabilityError("monotone_stieltjes_rational requires an operator-monotone spec")
    if not 0 < delta < upper:
        raise ParameterError(f"need 0 < delta < upper, got delta={delta}, upper={upper}")
    alpha, beta = f.coeffs
    label = f"stieltjes[{f.describe()}]"
    if f.tag == "harmonic":
        t = f.params["t"]
        lam = t / (1.0 - t)
        rule = QuadratureRule(np.array([lam]), np.array([1.0 / (1.0 - t)]), (delta, upper),
                              label=label)
        r = RationalApprox("monotone_stieltjes", rule, 0.0, 0.0, target=f.fn,
                           interval=(delta, upper), label=f.label)
        return _certify(r, delta, upper)
    if f.measure is None:
        if f.tag == "custom" and abs(alpha + beta - 1.0) > 1e-12:
            raise CapabilityError("custom monotone spec needs a mixing measure")
        r = RationalApprox("monotone_stieltjes", _empty_rule(delta, upper, label), alpha, beta,
                           target=f.fn, interval=(delta, upper), label=f.label)
        return _certify(r, delta, upper)

    def build(mm):
        s, v, a0, b0 = _mixing_rule(f, mm)
        lam = s / (1.0 - s)
        w = v / (1.0 - s)
        rule = QuadratureRule(lam, w, (delta, upper), label=label)
        r = RationalApprox("monotone_stieltjes", rule, a0, b0, target=f.fn,
                           interval=(delta, upper), label=f.label)
        return _certify(r, delta, upper)

    if m is not None:
        return build(int(m))
    for mm in range(1, max_m + 1):
        r = build(mm)
        if r.certified_error <= eps:
            return r
    raise ParameterError(f"monotone_stieltjes_rational: eps={eps:g} not reached with m <= {max_m}")


def kubo_ando_measure(f, m, interval=(0.1, 10.0)):
    """Probability rule ``(s_j, w_j)`` on ``[0, 1]`` for the mixing measure of `f`.

    ``f(x) ~ sum_j w_j x/((1-s_j) x + s_j)``; equivalently the scalar mean
    ``a sigma_f b ~ sum_j w_j ((1-s_j)/a + s_j/b)^(-1)``. Point masses at
    ``s = 0`` and ``s = 1`` are included as nodes. `certified_error` is the
    sup-error on `interval` (in the ratio variable ``x = b/a``).
    """
    if not isinstance(f, FunctionSpec) or not f.is_monotone:
        raise CapabilityError("kubo_ando_measure requires an operator-monotone spec")
    lo, hi = interval
    alpha, beta = f.coeffs
    nodes, weights = [], []
    if f.tag == "harmonic":
        nodes, weights = [f.params["t"]], [1.0]
    else:
        if f.measure is None and abs(alpha + beta - 1.0) > 1e-12:
            raise CapabilityError(f"no representing measure known for {f.label}")
        a0, b0 = alpha, beta
        if f.measure is not None:
            s, v, a0, b0 = _mixing_rule(f, int(m))
            nodes.extend(s.tolist())
            weights.extend(v.tolist())
        if a0 > 0:
            nodes.insert(0, 0.0)
            weights.insert(0, a0)
        if b0 > 0:
            nodes.append(1.0)
            weights.append(b0)
    s = np.asarray(nodes, dtype=float)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    g = _log_grid(lo, hi)
    approx = (g[:, None] / ((1.0 - s) * g[:, None] + s) * w).sum(axis=1)
    err = float(np.max(np.abs(approx - f(g))))
    return QuadratureRule(s, w, (lo, hi), err, label=f"mixture[{f.describe()}]")
