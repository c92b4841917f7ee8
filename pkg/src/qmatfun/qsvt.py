"""Polynomial transforms of block-encoded Hermitian matrices.

Every transform here acts on the normalized block ``B = A/alpha`` of its
input and returns a ``(1, a + 1, eps)`` encoding. The transform itself is
realized spectrally (eigendecompose ``B``, map eigenvalues, re-dilate), while
the query count is charged as for a degree-``d`` singular value
transformation: ``d`` uses of the input circuit and ``d`` of its adjoint,
with ``d`` taken from the cost model of each primitive.

Error propagation is first order: ``eps_out = Lip(p) eps_in/alpha + eps_fit``
where ``Lip(p)`` is the grid maximum of ``|p'|`` on the approximation window
widened by the input error.
"""

import math

import numpy as np

from .blockenc import (
    ROUNDOFF,
    BlockEncoding,
    TransformRecord,
    _make,
)
from .errors import ParameterError, WindowError
from .funcapprox import (
    Polynomial,
    inverse_poly,
    negative_power_poly,
    positive_power_poly,
)
from .matcore import apply_spectral_function, hermitian_eig, opnorm

__all__ = [
    "apply_polynomial",
    "invert",
    "power_neg",
    "power_pos",
    "amplify",
    "retarget",
    "block_spectrum",
]

WINDOW_SLACK = 1e-9
# floating-point allowance per unit of polynomial degree (Clenshaw evaluation)
DEGREE_ROUNDOFF = 1e-15


def _hermitian_part(be):
    B = be.block
    H = 0.5 * (B + B.conj().T)
    return H, opnorm(B - H)


def block_spectrum(be):
    """Eigenvalues of the Hermitian part of the normalized block."""
    H, _ = _hermitian_part(be)
    return hermitian_eig(H, tol=np.inf).eigenvalues


def apply_polynomial(be, p, *, target_fn=None, label=None, kind="qsvt"):
    """Apply a bounded polynomial to the normalized block of `be`.

    Parameters
    ----------
    be : BlockEncoding
        Encoding of a Hermitian ``A`` (non-Hermitian parts are charged to the
        input error).
    p : Polynomial
        Must satisfy ``|p| <= 1`` on its interval.
    target_fn : callable, optional
        Exact scalar function ``p`` approximates; defaults to ``p.target``.
        Used to build the attached target ``f(A_target/alpha)``.

    Returns
    -------
    BlockEncoding
        ``(1, a + 1, Lip eps_in/alpha + eps_fit)`` encoding of ``p(A/alpha)``.

    Raises
    ------
    ContractError
        If `p` is not bounded by one on its interval.
    WindowError
        If the block spectrum leaves the polynomial's interval.
    """
    if not isinstance(p, Polynomial):
        raise ParameterError("apply_polynomial expects a Polynomial")
    p.require_admissible()
    H, skew = _hermitian_part(be)
    eps_in = be.eps / be.alpha + skew
    dec = hermitian_eig(H, tol=np.inf)
    w = dec.eigenvalues
    slack = eps_in + WINDOW_SLACK
    if w[0] < p.lo - slack or w[-1] > p.hi + slack:
        raise WindowError(
            f"block spectrum [{w[0]:.6g}, {w[-1]:.6g}] leaves the window "
            f"[{p.lo:.6g}, {p.hi:.6g}] of {p.label}",
            lo=p.lo, hi=p.hi, observed=(float(w[0]), float(w[-1])),
        )
    values = np.clip(p(w), -1.0, 1.0)
    block = dec.reconstruct(values)
    lip = p.lipschitz(p.lo - slack, p.hi + slack) if eps_in > 0 else 0.0
    f = target_fn or p.target or p
    target = None
    if be.target is not None:
        T = be.target / be.alpha
        tdec = hermitian_eig(T, tol=1e-9)
        tw = tdec.eigenvalues
        if tw[0] < p.lo - slack or tw[-1] > p.hi + slack:
            raise WindowError(
                f"target spectrum [{tw[0]:.6g}, {tw[-1]:.6g}] leaves the window "
                f"[{p.lo:.6g}, {p.hi:.6g}] of {p.label}",
                lo=p.lo, hi=p.hi, observed=(float(tw[0]), float(tw[-1])),
            )
        target = apply_spectral_function(tdec, f)
    eps = lip * eps_in + p.certified_error + ROUNDOFF + DEGREE_ROUNDOFF * max(1, p.degree)
    d = p.charged_degree
    rec = TransformRecord(kind, p.degree, d, p.certified_error, lip, p.label)
    return _make(block, 1.0, be.ancillas + 1, eps, be.queries.qsvt(d),
                 label or f"{kind}[{p.label}]", (be,), target, rec)


def _split(eps):
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    return 0.5 * eps


def invert(be, kappa, eps, label=None):
    """Encoding of ``B^{-1}/kappa`` for a normalized block ``B`` with spectrum in ``[1/kappa, 1]``.

    Charged degree ``ceil(kappa log(1/eps))``.

    Raises
    ------
    WindowError
        If the block spectrum falls below ``1/kappa``.
    """
    if not kappa >= 1:
        raise ParameterError(f"kappa must be >= 1, got {kappa}")
    p = inverse_poly(kappa, _split(eps))
    p = Polynomial(p.series, p.lo, p.hi, p.target, p.certified_error,
                   int(math.ceil(kappa * math.log(1.0 / eps))), p.label)
    f = lambda x: 1.0 / (kappa * np.asarray(x, dtype=float))  # noqa: E731
    if kappa == 1:
        w = block_spectrum(be)
        if abs(w[0] - 1) > 1e-9 + be.eps or abs(w[-1] - 1) > 1e-9 + be.eps:
            raise WindowError("kappa = 1 requires the block to be the identity",
                              lo=1.0, hi=1.0, observed=(float(w[0]), float(w[-1])))
    return apply_polynomial(be, p, target_fn=f, label=label or f"invert[kappa={kappa:.4g}]",
                            kind="invert")


def power_neg(be, c, kappa, eps, label=None):
    """Encoding of ``B^{-c}/(2 kappa^c)`` for a block with spectrum in ``[1/kappa, 1]``.

    Charged degree ``ceil(kappa (1 + c) log(alpha/eps))``.
    """
    p = negative_power_poly(c, kappa, _split(eps), gamma=be.alpha)
    norm = 1.0 / (2.0 * kappa**c)
    f = lambda x: norm * np.asarray(x, dtype=float) ** (-c)  # noqa: E731
    return apply_polynomial(be, p, target_fn=f,
                            label=label or f"power_neg[c={c:g},kappa={kappa:.4g}]",
                            kind="power_neg")


def power_pos(be, c, eps, kappa=None, label=None):
    """Encoding of ``B^c/2`` for a positive block ``B``.

    Parameters
    ----------
    kappa : float, optional
        Window ``[1/kappa, 1]``; estimated from the block spectrum if omitted.

    Charged degree ``ceil(kappa log(1/eps))``.
    """
    if kappa is None:
        w = block_spectrum(be)
        if w[0] <= 0:
            raise WindowError("power_pos needs a positive definite block",
                              observed=(float(w[0]), float(w[-1])))
        kappa = max(1.0, 1.0 / w[0])
    p = positive_power_poly(c, kappa, _split(eps))
    f = lambda x: 0.5 * np.asarray(x, dtype=float) ** c  # noqa: E731
    return apply_polynomial(be, p, target_fn=f,
                            label=label or f"power_pos[c={c:g},kappa={kappa:.4g}]",
                            kind="power_pos")


def amplify(be, gamma_factor, delta, eps, label=None):
    """Uniform singular-value amplification by `gamma_factor`.

    The normalized block ``B`` must satisfy ``||B|| <= (1 - delta)/gamma``;
    the result encodes ``gamma_factor * A`` with the same subnormalization.
    The realized amplification is exact; the ledger carries the relative
    error `eps` of the polynomial implementation, and the cost
    ``m = ceil((gamma/delta) log(gamma/eps))`` uses of the circuit and its
    adjoint.

    Raises
    ------
    WindowError
        If a singular value exceeds ``(1 - delta)/gamma``.
    """
    g = float(gamma_factor)
    if not g >= 1:
        raise ParameterError(f"amplification factor must be >= 1, got {g}")
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    smax = opnorm(be.block)
    bound = (1.0 - delta) / g
    if smax > bound * (1 + 1e-12):
        raise WindowError(
            f"largest singular value {smax:.6g} exceeds the amplification window {bound:.6g}",
            lo=0.0, hi=bound, observed=(0.0, smax),
        )
    m = int(math.ceil((g / delta) * max(math.log(g / eps), 1.0)))
    out_eps = g * be.eps + eps * g * be.alpha * smax + ROUNDOFF * g * be.alpha
    tgt = None if be.target is None else g * be.target
    rec = TransformRecord("amplify", m, m, eps, g, f"gamma={g:.6g}")
    return _make(g * be.block, be.alpha, be.ancillas + 1, out_eps, be.queries.qsvt(m),
                 label or f"amplify[gamma={g:.4g}]", (be,), tgt, rec)


def retarget(be, target, extra_eps, label=None, note=""):
    """Re-attach a new intended target, adding the scalar approximation error to the ledger.

    Used when a composite implements a quadrature or polynomial surrogate of
    a matrix function: the ledger grows by the certified distance between the
    surrogate and the exact function.
    """
    return BlockEncoding(be.unitary, be.dim, be.alpha, be.ancillas, be.eps + float(extra_eps),
                         be.queries, label or be.label, (be,),
                         None if target is None else np.asarray(target), be.record, note)
