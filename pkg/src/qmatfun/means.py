"""Kubo–Ando operator means: oracles and block-encoding pipelines.

For positive definite ``A``, ``B`` and an operator-monotone ``f`` with
``f(1) = 1``

.. math:: A \\sigma_f B = A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}.

Two pipelines are provided, both for inputs with spectra in ``[delta, 1]``:

``harmonic_mixture_mean``
    ``A sigma_f B = sum_j w_j A !_{s_j} B`` from a positive rule for the
    mixing measure. Each weighted harmonic mean is obtained by inverting
    ``A`` and ``B``, combining the inverses by LCU and inverting once more.

``stieltjes_mean``
    ``f(X) ~ a + b X + sum_k w_k X (X + lam_k)^{-1}`` on
    ``X = A^{-1/2} B A^{-1/2}`` (spectrum in ``[delta, 1/delta]``), assembled
    by LCU, rescaled by amplification and dressed with ``A^{1/2}`` on both
    sides.
"""

from dataclasses import dataclass, field

import numpy as np

from . import functions as F
from .blockenc import (
    dilate,
    identity_encoding,
    linear_combination,
    product,
    renormalized,
)
from .errors import CapabilityError, ParameterError
from .funcapprox import kubo_ando_measure, monotone_stieltjes_rational
from .matcore import (
    apply_spectral_function,
    check_hermitian,
    check_psd,
    check_spectrum_window,
    hermitian_eig,
    opnorm,
    psd_inv_sqrt,
    psd_sqrt,
)
from .qsvt import amplify, invert, power_neg, power_pos, retarget

__all__ = [
    "MEAN_METHODS",
    "MeanReport",
    "oracle_mean",
    "spectral_geometric_mean",
    "harmonic_mixture_mean",
    "stieltjes_mean",
    "compute_mean",
]

MEAN_METHODS = ("oracle", "harmonic_mixture", "stieltjes")
AMPLIFY_MARGIN = 0.45


def _spec(f, **params):
    if isinstance(f, str):
        return F.from_name(f, **params)
    return f


def _pd(M, name):
    M = check_psd(M, name=name)
    w = hermitian_eig(M).eigenvalues
    if w[0] <= 0:
        raise ParameterError(f"{name} must be positive definite (lambda_min = {w[0]:.3e})")
    return M


def oracle_mean(A, B, f):
    """Exact ``A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}``.

    The harmonic and arithmetic families use their direct formulas; every
    other spec is evaluated spectrally through its scalar function.

    Examples
    --------
    >>> import numpy as np
    >>> A = np.diag([0.64, 0.25]); B = np.diag([0.25, 0.64])
    >>> np.round(np.diag(oracle_mean(A, B, "geometric")), 12)
    array([0.4, 0.4])
    """
    f = _spec(f)
    if not f.is_monotone:
        raise CapabilityError(f"{f.label} is not an operator-monotone generator")
    A = _pd(A, "A")
    B = _pd(B, "B")
    if f.tag == "arithmetic":
        t = f.params["t"]
        return (1.0 - t) * A + t * B
    if f.tag == "harmonic":
        t = f.params["t"]
        M = (1.0 - t) * np.linalg.inv(A) + t * np.linalg.inv(B)
        out = np.linalg.inv(0.5 * (M + M.conj().T))
        return 0.5 * (out + out.conj().T)
    Ah = psd_sqrt(A)
    Ai = psd_inv_sqrt(A)
    X = Ai @ B @ Ai
    X = 0.5 * (X + X.conj().T)
    fX = apply_spectral_function(X, f.fn, tol=1e-9)
    out = Ah @ fX @ Ah
    return 0.5 * (out + out.conj().T)


def spectral_geometric_mean(A, B, t=0.5):
    """Weighted spectral geometric mean ``(A^{-1} # B)^t A (A^{-1} # B)^t``.

    Not a Kubo–Ando mean; provided as an oracle only.
    """
    A = _pd(A, "A")
    B = _pd(B, "B")
    G = oracle_mean(np.linalg.inv(A), B, F.geometric(0.5))
    Gt = apply_spectral_function(G, lambda x: x**t)
    out = Gt @ A @ Gt
    return 0.5 * (out + out.conj().T)


@dataclass(frozen=True, eq=False)
class MeanReport:
    """Result of a mean computation.

    Attributes
    ----------
    result : ndarray
    oracle : ndarray or None
    method : str
    spec : FunctionSpec
    delta, eps : float
    error : float
        ``||result - oracle||_2`` (NaN without an oracle).
    ledger_bound : float
        Error bound from the encoding ledger and the approximation error.
    encoding : BlockEncoding or None
    scale : float
        ``result = scale * extract(encoding)``.
    m : int
        Number of quadrature nodes or poles.
    approx_error : float
        Certified scalar error of the rule or rational.
    """

    result: np.ndarray
    oracle: object
    method: str
    spec: object
    delta: float
    eps: float
    error: float
    ledger_bound: float
    encoding: object = None
    scale: float = 1.0
    m: int = 0
    approx_error: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def queries(self):
        return None if self.encoding is None else self.encoding.queries

    def as_kv(self):
        """Deterministic ``key=value`` lines (17 significant digits)."""
        items = [
            ("kind", "mean"),
            ("f", self.spec.label),
            ("method", self.method),
            ("delta", f"{self.delta:.17g}"),
            ("eps", f"{self.eps:.17g}"),
            ("error", f"{self.error:.17g}"),
            ("ledger_bound", f"{self.ledger_bound:.17g}"),
            ("scale", f"{self.scale:.17g}"),
            ("m", str(self.m)),
            ("approx_error", f"{self.approx_error:.17g}"),
        ]
        if self.encoding is not None:
            items += [("alpha", f"{self.encoding.alpha:.17g}"),
                      ("ancillas", str(self.encoding.ancillas)),
                      ("queries_total", str(self.encoding.queries.total))]
            items += [(f"queries.{k}", str(v)) for k, v in self.encoding.queries.tallies]
        for k in sorted(self.details):
            v = self.details[k]
            items.append((f"detail.{k}", f"{v:.17g}" if isinstance(v, float) else str(v)))
        R = self.result
        for i in range(R.shape[0]):
            for j in range(R.shape[1]):
                z = R[i, j]
                items.append((f"result[{i},{j}]", f"{z.real:.17g} {z.imag:.17g}"))
        return "\n".join(f"{k}={v}" for k, v in items) + "\n"

    def as_table(self):
        rows = [("f", self.spec.label), ("method", self.method), ("delta", f"{self.delta:g}"),
                ("eps", f"{self.eps:.3e}"), ("m", str(self.m)),
                ("||result - oracle||", f"{self.error:.3e}"),
                ("ledger bound", f"{self.ledger_bound:.3e}")]
        if self.encoding is not None:
            rows.append(("queries", str(self.encoding.queries.total)))
        w = max(len(r[0]) for r in rows)
        return "\n".join(f"{k:<{w}}  {v}" for k, v in rows) + "\n"


def _check_inputs(A, B, delta):
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    A = check_hermitian(A, name="A")
    B = check_hermitian(B, name="B")
    if A.shape != B.shape:
        raise ParameterError("A and B must have the same shape")
    check_spectrum_window(A, delta, 1.0, slack=1e-12, name="A")
    check_spectrum_window(B, delta, 1.0, slack=1e-12, name="B")
    return A, B


def _oracle_or_none(A, B, f):
    try:
        return oracle_mean(A, B, f)
    except (CapabilityError, ParameterError):
        return None


def _report(method, f, A, B, delta, eps, enc, scale, m, approx, details):
    result = scale * enc.extract()
    result = 0.5 * (result + result.conj().T)
    oracle = _oracle_or_none(A, B, f)
    err = float("nan") if oracle is None else opnorm(result - oracle)
    bound = scale * enc.eps
    return MeanReport(result, oracle, method, f, float(delta), float(eps), err, bound, enc,
                      scale, m, approx, details)


def _ledger_loop(build, eps, scale, start):
    eps_int = start
    for _ in range(8):
        enc, extra = build(eps_int)
        bound = scale * enc.eps
        if bound <= eps:
            break
        eps_int *= min(0.25, 0.5 * eps / bound)
        if eps_int < 1e-14:
            break
    return enc, extra, eps_int


def harmonic_mixture_mean(A, B, f, delta, eps=1e-4, m=None):
    """Mean through a mixture of weighted harmonic means.

    Parameters
    ----------
    A, B : ndarray
        Positive definite, spectra in ``[delta, 1]``.
    f : FunctionSpec or str
        Operator-monotone spec with a mixing measure.
    delta : float
    eps : float
        Target operator-norm accuracy.
    m : int, optional
        Number of quadrature nodes; chosen adaptively when omitted.

    Returns
    -------
    MeanReport
    """
    f = _spec(f)
    if not f.is_monotone:
        raise CapabilityError(f"{f.label} is not an operator-monotone generator")
    A, B = _check_inputs(A, B, delta)
    interval = (delta, 1.0 / delta)
    if m is None:
        mm = 1
        while True:
            rule = kubo_ando_measure(f, mm, interval)
            if rule.certified_error <= 0.5 * eps or mm >= 512:
                break
            mm *= 2
    else:
        rule = kubo_ando_measure(f, int(m), interval)
    kappa = 1.0 / delta

    def build(eps_int):
        enc_A = dilate(A, "U_A", label="A")
        enc_B = dilate(B, "U_B", label="B")
        inv_A = inv_B = None
        parts = []
        for s in rule.nodes:
            if s == 0.0:
                parts.append(enc_A)
                continue
            if s == 1.0:
                parts.append(enc_B)
                continue
            if inv_A is None:
                # extracts are delta A^{-1} and delta B^{-1}, spectra in [delta, 1]
                inv_A = invert(enc_A, kappa, eps_int, label="delta A^-1")
                inv_B = invert(enc_B, kappa, eps_int, label="delta B^-1")
            M = linear_combination([inv_A, inv_B], [1.0 - s, s], label=f"M[s={s:.4g}]")
            parts.append(invert(M, kappa, eps_int, label=f"A !_{s:.4g} B"))
        enc = linear_combination(parts, rule.weights, label="harmonic_mixture")
        enc = retarget(enc, _oracle_or_none(A, B, f), rule.certified_error,
                       label=f"A sigma B [{f.describe()}]")
        return enc, None

    enc, _, eps_int = _ledger_loop(build, eps, 1.0, 0.05 * eps * delta**2)
    return _report("harmonic_mixture", f, A, B, delta, eps, enc, 1.0, rule.m,
                   rule.certified_error, {"eps_internal": eps_int})


def stieltjes_mean(A, B, f, delta, eps=1e-4, m=None):
    """Mean through a positive Stieltjes rational of ``X = A^{-1/2} B A^{-1/2}``.

    Steps: ``Xb = (delta/4) X`` from the negative square root of ``A`` and
    two products; per pole, ``(delta + lam)(X + lam)^{-1}`` by shifting and
    inverting, then ``Xb`` times it; an LCU assembles ``r(X)``; amplification
    rescales it to ``(delta/2) r(X)``; finally ``A^{1/2}/2`` is applied on both
    sides, so ``result = (8/delta) extract``.

    Parameters
    ----------
    A, B : ndarray
        Positive definite, spectra in ``[delta, 1]``.
    f : FunctionSpec or str
    delta, eps : float
    m : int, optional
        Fixed pole count (otherwise the rational is certified to ``eps/2``).
    """
    f = _spec(f)
    if not f.is_monotone:
        raise CapabilityError(f"{f.label} is not an operator-monotone generator")
    A, B = _check_inputs(A, B, delta)
    r = monotone_stieltjes_rational(f, delta, 0.5 * eps, upper=1.0 / delta, m=m)
    theta = 0.5 * delta
    scale = 4.0 / theta
    kappa = 1.0 / delta
    q = 0.25 * delta

    def build(eps_int):
        enc_A = dilate(A, "U_A", label="A")
        enc_B = dilate(B, "U_B", label="B")
        Aneg = power_neg(enc_A, 0.5, kappa, eps_int, label="A^-1/2")
        Xb = product(product(Aneg, enc_B, label="A^-1/2 B"), Aneg, label="(delta/4) X")
        ident = identity_encoding(A.shape[0], as_qubits=False)
        parts, weights = [], []
        if r.a:
            parts.append(ident)
            weights.append(r.a)
        if r.b:
            parts.append(Xb)
            weights.append(r.b / q)
        for lam, w in zip(r.poles.nodes, r.poles.weights):
            sh = linear_combination([Xb, ident], [0.5, 0.5 * q * lam], label=f"shift[lam={lam:.4g}]")
            kappa_k = (1.0 + q * lam) / (q * (delta + lam))
            inv = invert(renormalized(sh), kappa_k, eps_int, label=f"inv[lam={lam:.4g}]")
            parts.append(product(Xb, inv, label=f"F[lam={lam:.4g}]"))
            # extract = q (delta + lam) X (X + lam)^{-1}
            weights.append(w / (q * (delta + lam)))
        L = linear_combination(parts, weights, label="stieltjes_rational")
        if L.alpha * theta > 1.0:
            core = amplify(renormalized(L), L.alpha * theta, AMPLIFY_MARGIN, eps_int,
                           label="rescale r(X)")
        else:
            core = linear_combination([L], [theta], label="rescale r(X)")
        Ahalf = power_pos(enc_A, 0.5, eps_int, kappa=kappa, label="A^1/2/2")
        enc = product(product(Ahalf, core), Ahalf, label="dress")
        oracle = _oracle_or_none(A, B, f)
        tgt = None if oracle is None else oracle / scale
        enc = retarget(enc, tgt, r.certified_error / scale,
                       label=f"A sigma B/{scale:g} [{f.describe()}]")
        return enc, None

    enc, _, eps_int = _ledger_loop(build, 0.5 * eps, scale, 0.01 * eps * delta**2)
    return _report("stieltjes", f, A, B, delta, eps, enc, scale, r.m, r.certified_error,
                   {"eps_internal": eps_int, "rational_error": r.certified_error})


def compute_mean(A, B, f, method="oracle", delta=None, eps=1e-4, m=None):
    """Dispatch by method name (``oracle``, ``harmonic_mixture``/``harmonic-mixture``, ``stieltjes``)."""
    f = _spec(f)
    key = method.replace("-", "_")
    if key == "oracle":
        res = oracle_mean(A, B, f)
        return MeanReport(res, res, "oracle", f, float(delta or 0.0), float(eps), 0.0, 0.0)
    if delta is None:
        lo = min(hermitian_eig(A).eigenvalues[0], hermitian_eig(B).eigenvalues[0])
        delta = float(lo)
    if key == "harmonic_mixture":
        return harmonic_mixture_mean(A, B, f, delta, eps, m)
    if key == "stieltjes":
        return stieltjes_mean(A, B, f, delta, eps, m)
    raise ParameterError(f"unknown method {method!r}; choose from {MEAN_METHODS}")
