"""Closed-form cost predictions and their reconciliation with measured ledgers.

Every asymptotic cost expression is evaluated with unit constants. Logarithms
are floored at one (``L(x) = max(log x, 1)``) so that factors such as
``log kappa`` stay positive and monotone at small arguments.

The registry :data:`FORMULAS` maps identifiers to :class:`FormulaDef`
objects; :func:`evaluate` turns one into a :class:`CostFormula`. Because
only scalings are meaningful, :func:`reconcile` compares log-log slopes of
predicted and measured costs along a sweep of one input.
"""

from dataclasses import dataclass
import math
from typing import Callable

import numpy as np

from .errors import ParameterError

__all__ = [
    "FormulaDef",
    "CostFormula",
    "FORMULAS",
    "evaluate",
    "divergence_cost",
    "mean_cost",
    "scaling_exponents",
    "loglog_slope",
    "Reconciliation",
    "reconcile",
    "format_table",
]


def L(x):
    """``max(log x, 1)``."""
    return max(math.log(x), 1.0)


@dataclass(frozen=True)
class FormulaDef:
    """A named cost expression.

    Attributes
    ----------
    ident : str
    inputs : tuple of str
        Names of the arguments of `fn`.
    fn : callable
        Keyword-only evaluator.
    description : str
        What is being counted.
    """

    ident: str
    inputs: tuple
    fn: Callable
    description: str


def _c_state(T, N):
    # exact density block encoding: two uses of the preparation plus log N gates
    return 2.0 * T + math.log2(max(N, 2))


def _gamma_cost(C_sigma, C_rho, kappa_sigma, eps):
    return C_sigma * kappa_sigma * L(1 / eps) + C_rho


_DEFS = [
    FormulaDef(
        "divergence.route1.purification", ("kappa_sigma", "kappa_gamma", "eps", "N", "T"),
        lambda kappa_sigma, kappa_gamma, eps, N, T: (
            (2 * T + L(N)) * kappa_sigma**2 * kappa_gamma * L(kappa_sigma) * L(kappa_gamma)
            / eps * L(1 / eps) ** 2),
        "total circuit cost, direct polynomial route, purification access"),
    FormulaDef(
        "divergence.route2.purification", ("kappa_sigma", "kappa_gamma", "eps", "N", "T"),
        lambda kappa_sigma, kappa_gamma, eps, N, T: (
            (2 * T + L(N)) * kappa_sigma**2 * kappa_gamma**2 * L(kappa_sigma)
            * L(kappa_gamma) ** 3 / eps * L(1 / eps) ** 4),
        "total circuit cost, resolvent route, purification access"),
    FormulaDef(
        "divergence.route1.sample", ("kappa_sigma", "kappa_gamma", "eps", "N"),
        lambda kappa_sigma, kappa_gamma, eps, N: (
            L(N) * kappa_sigma * kappa_gamma / eps**2 * L(1 / eps) ** 3),
        "circuit cost per repetition, direct polynomial route, sample access"),
    FormulaDef(
        "divergence.route2.sample", ("kappa_sigma", "kappa_gamma", "eps", "N"),
        lambda kappa_sigma, kappa_gamma, eps, N: (
            L(N) * kappa_sigma * kappa_gamma**2 * L(kappa_gamma) ** 2 / eps**2
            * L(1 / eps) ** 5),
        "circuit cost per repetition, resolvent route, sample access"),
    FormulaDef(
        "divergence.sample.repetitions", ("kappa_sigma", "kappa_gamma", "eps"),
        lambda kappa_sigma, kappa_gamma, eps: (
            kappa_sigma**2 * L(4 * kappa_sigma) ** 2 * L(kappa_gamma) ** 2 / eps**2),
        "number of repetitions, sample access"),
    FormulaDef(
        "divergence.step2.gamma", ("C_sigma", "C_rho", "kappa_sigma", "eps"),
        lambda C_sigma, C_rho, kappa_sigma, eps: _gamma_cost(C_sigma, C_rho, kappa_sigma, eps),
        "block encoding of gamma from sigma^{-1/2} and two products"),
    FormulaDef(
        "divergence.step3.route1", ("C_sigma", "C_rho", "kappa_sigma", "kappa_gamma", "eps"),
        lambda C_sigma, C_rho, kappa_sigma, kappa_gamma, eps: (
            _gamma_cost(C_sigma, C_rho, kappa_sigma, eps) * kappa_gamma * L(1 / eps)),
        "gamma log gamma by one polynomial transform"),
    FormulaDef(
        "divergence.step3.route2.resolvent", ("C_sigma", "C_rho", "kappa_sigma", "kappa_tau",
                                              "eps"),
        lambda C_sigma, C_rho, kappa_sigma, kappa_tau, eps: (
            _gamma_cost(C_sigma, C_rho, kappa_sigma, eps) * kappa_tau * L(1 / eps)),
        "one shifted inverse (gamma + tau I)^{-1}"),
    FormulaDef(
        "divergence.step3.route2.resolvent_sum", ("C_sigma", "C_rho", "kappa_sigma",
                                                  "kappa_gamma", "m", "eps"),
        lambda C_sigma, C_rho, kappa_sigma, kappa_gamma, m, eps: (
            m * _gamma_cost(C_sigma, C_rho, kappa_sigma, eps) * kappa_gamma * L(1 / eps)),
        "sum of m shifted inverses"),
    FormulaDef(
        "divergence.step3.route2", ("C_sigma", "C_rho", "kappa_sigma", "kappa_gamma", "eps"),
        lambda C_sigma, C_rho, kappa_sigma, kappa_gamma, eps: (
            _gamma_cost(C_sigma, C_rho, kappa_sigma, eps) * kappa_gamma**2
            * L(kappa_gamma) ** 2 * L(1 / eps) ** 3),
        "gamma log gamma through resolvents, after amplification"),
    FormulaDef(
        "divergence.step4.purification", ("T_sigma", "T_g", "kappa_sigma", "kappa_gamma", "eps"),
        lambda T_sigma, T_g, kappa_sigma, kappa_gamma, eps: (
            (T_sigma + T_g) * kappa_sigma * L(kappa_sigma) * L(kappa_gamma) / eps),
        "trace estimation with rescaled accuracy, purification access"),
    FormulaDef(
        "divergence.step4.sample", ("C_sigma", "T_g"),
        lambda C_sigma, T_g: C_sigma + T_g,
        "trace estimation circuit, sample access (per repetition)"),
    FormulaDef(
        "means.theorem", ("C_A", "C_B", "delta", "eps"),
        lambda C_A, C_B, delta, eps: (
            (C_A / delta * L(1 / eps) + C_B) / delta**2 * L(L(1 / eps) / eps) ** 2),
        "Kubo-Ando mean, total circuit cost"),
    FormulaDef(
        "means.mixture.step1", ("C_A", "C_B", "delta", "eps"),
        lambda C_A, C_B, delta, eps: (C_A + C_B) / delta * L(1 / eps),
        "delta A^{-1} and delta B^{-1}"),
    FormulaDef(
        "means.mixture.step2", ("C_A", "C_B", "delta", "eps"),
        lambda C_A, C_B, delta, eps: (C_A + C_B) / delta * L(1 / eps),
        "convex combination of the inverses"),
    FormulaDef(
        "means.mixture.step3", ("C_A", "C_B", "delta", "eps"),
        lambda C_A, C_B, delta, eps: (C_A + C_B) / delta**2 * L(1 / eps) ** 2,
        "one weighted harmonic mean"),
    FormulaDef(
        "means.mixture.total", ("C_A", "C_B", "delta", "eps", "m"),
        lambda C_A, C_B, delta, eps, m: m * (C_A + C_B) / delta**2 * L(1 / eps) ** 2,
        "mixture of m weighted harmonic means"),
    FormulaDef(
        "means.stieltjes.step1", ("C_A", "C_B", "delta", "eps"),
        lambda C_A, C_B, delta, eps: C_A / delta * L(1 / eps) + C_B,
        "A^{+-1/2} and delta X"),
    FormulaDef(
        "means.stieltjes.step2", ("C_A", "C_B", "delta", "eps"),
        lambda C_A, C_B, delta, eps: C_A / delta * L(1 / eps) + C_B,
        "shifted operator delta (X + lam I)/2"),
    FormulaDef(
        "means.stieltjes.step3.pole", ("C_A", "C_B", "delta", "eps", "lam", "m"),
        lambda C_A, C_B, delta, eps, lam, m: (
            (C_A / delta * L(1 / eps) + C_B) * (lam + 1 / delta) / (lam + delta) * L(m / eps)),
        "one shifted inverse and product"),
    FormulaDef(
        "means.stieltjes.step3", ("C_A", "C_B", "delta", "eps", "m"),
        lambda C_A, C_B, delta, eps, m: (
            m * (C_A / delta * L(1 / eps) + C_B) / delta**2 * L(m / eps)),
        "all m poles"),
    FormulaDef(
        "means.stieltjes.total", ("C_A", "C_B", "delta", "eps", "m"),
        lambda C_A, C_B, delta, eps, m: (
            m * (C_A / delta * L(1 / eps) + C_B) / delta**2 * L(m / eps)),
        "assembly, amplification and dressing with A^{1/2}"),
]

FORMULAS = {d.ident: d for d in _DEFS}


@dataclass(frozen=True)
class CostFormula:
    """An evaluated cost expression.

    Attributes
    ----------
    ident : str
    inputs : dict
    value : float
        Prediction with unit constants.
    description : str
    exponents : dict
        Local log-log slopes with respect to each numeric input.
    """

    ident: str
    inputs: dict
    value: float
    description: str
    exponents: dict

    def __str__(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.inputs.items())
        return f"{self.ident}({args}) = {self.value:.6g}"


def _validate(inputs):
    for k, v in inputs.items():
        if k == "eps":
            if not 0 < v <= 0.5:
                raise ParameterError(f"eps must lie in (0, 1/2], got {v}")
        elif k == "delta":
            if not 0 < v <= 1:
                raise ParameterError(f"delta must lie in (0, 1], got {v}")
        elif k == "lam":
            if not v > 0:
                raise ParameterError(f"lam must be positive, got {v}")
        elif k in ("T", "T_sigma", "T_g", "C_sigma", "C_rho", "C_A", "C_B"):
            if not v >= 0:
                raise ParameterError(f"{k} must be nonnegative, got {v}")
        elif not v >= 1:
            raise ParameterError(f"{k} must be >= 1, got {v}")


def scaling_exponents(ident, inputs, h=1e-4):
    """Local slopes ``d log(cost)/d log(x)`` for every input ``x``."""
    d = FORMULAS[ident]
    base = math.log(d.fn(**inputs))
    out = {}
    for k, v in inputs.items():
        if v <= 0:
            continue
        bumped = dict(inputs)
        bumped[k] = v * math.exp(h)
        try:
            _validate({k: bumped[k]})
        except ParameterError:
            bumped[k] = v * math.exp(-h)
            out[k] = (base - math.log(d.fn(**bumped))) / h
            continue
        out[k] = (math.log(d.fn(**bumped)) - base) / h
    return out


def evaluate(ident, **inputs):
    """Evaluate registry entry `ident`.

    Raises
    ------
    ParameterError
        Unknown identifier, missing input or out-of-range value.
    """
    if ident not in FORMULAS:
        raise ParameterError(f"unknown formula {ident!r}")
    d = FORMULAS[ident]
    missing = [k for k in d.inputs if k not in inputs]
    if missing:
        raise ParameterError(f"{ident} needs inputs {missing}")
    args = {k: float(inputs[k]) for k in d.inputs}
    _validate(args)
    value = float(d.fn(**args))
    return CostFormula(ident, args, value, d.description, scaling_exponents(ident, args))


def divergence_cost(route, access, kappa_sigma, kappa_gamma, eps, N=2, T=1.0):
    """Theorem-level cost for estimating the ``x log x`` divergence.

    Parameters
    ----------
    route : {1, 2}
    access : {"purification", "sample", "sample_emulated"}
    """
    route = str(route).replace("route", "")
    if route not in ("1", "2"):
        raise ParameterError(f"route must be 1 or 2, got {route!r}")
    if access == "purification":
        return evaluate(f"divergence.route{route}.purification", kappa_sigma=kappa_sigma,
                        kappa_gamma=kappa_gamma, eps=eps, N=N, T=T)
    if access in ("sample", "sample_emulated"):
        return evaluate(f"divergence.route{route}.sample", kappa_sigma=kappa_sigma,
                        kappa_gamma=kappa_gamma, eps=eps, N=N)
    raise ParameterError(f"unknown access model {access!r}")


def mean_cost(C_A, C_B, delta, eps):
    """Theorem-level cost for a Kubo–Ando mean."""
    return evaluate("means.theorem", C_A=C_A, C_B=C_B, delta=delta, eps=eps)


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(y, dtype=float))
    if x.size < 2:
        raise ParameterError("need at least two points for a slope")
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class Reconciliation:
    """Predicted-vs-measured comparison along a one-parameter sweep."""

    ident: str
    variable: str
    points: tuple
    predicted: tuple
    measured: tuple
    predicted_slope: float
    measured_slope: float

    @property
    def slope_ratio(self):
        return self.measured_slope / self.predicted_slope

    def within(self, factor=4.0):
        r = self.slope_ratio
        return 1.0 / factor <= r <= factor

    def table(self):
        rows = [(f"{self.ident}", f"{self.variable}={p:g}", f"{a:.4g}", f"{b:.4g}",
                 f"{b / a:.4g}") for p, a, b in zip(self.points, self.predicted, self.measured)]
        rows.append((f"{self.ident}", f"slope[{self.variable}]", f"{self.predicted_slope:.4g}",
                     f"{self.measured_slope:.4g}", f"{self.slope_ratio:.4g}"))
        return format_table(("formula", "inputs", "predicted", "measured", "ratio"), rows)


def reconcile(ident, variable, points, measured, transform=None, **fixed):
    """Compare the slope of formula `ident` in `variable` with measurements.

    Parameters
    ----------
    points : sequence of float
        Values of `variable` in the sweep.
    measured : sequence of float
        Measured costs (e.g. query totals) at those points.
    transform : callable, optional
        Maps a sweep point to the value passed to the formula (for example
        ``lambda d: d`` when sweeping ``1/delta`` but the formula takes
        ``delta``). The slope is always taken against `points`.
    """
    transform = transform or (lambda v: v)
    pred = [FORMULAS[ident].fn(**{**fixed, variable: transform(p)}) for p in points]
    return Reconciliation(ident, variable, tuple(points), tuple(pred), tuple(measured),
                          loglog_slope(points, pred), loglog_slope(points, measured))


def format_table(header, rows):
    """Plain fixed-width table."""
    rows = [tuple(str(c) for c in r) for r in rows]
    widths = [max(len(str(h)), *(len(r[i]) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(header)]
    line = "  ".join(f"{h:<{w}}" for h, w in zip(header, widths))
    out = [line, "  ".join("-" * w for w in widths)]
    out += ["  ".join(f"{c:<{w}}" for c, w in zip(r, widths)) for r in rows]
    return "\n".join(out) + "\n"
