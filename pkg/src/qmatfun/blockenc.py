"""Block encodings with an explicit (alpha, a, eps) ledger and query counts.

A :class:`BlockEncoding` stores a dense unitary ``U`` of size ``2N x 2N``
whose top-left ``N x N`` block ``B`` satisfies ``||alpha B - A|| <= eps`` for
the encoded matrix ``A``. The ancilla count ``a`` is tracked logically: it is
what the corresponding circuit composition would use, while the stored
unitary is always the minimal one-qubit dilation of the block. Composition
rebuilds that dilation instead of tensoring circuits, so object sizes stay at
``2N`` regardless of depth.

Every encoding may carry the exact matrix it is meant to represent
(``target``); ``measured_error`` compares it against the extracted block and
must never exceed the ledger ``eps``.
"""

from collections import Counter
from dataclasses import dataclass, field
import math
from typing import Optional

import numpy as np
from scipy import linalg

from .errors import DimensionError, NormError, ParameterError
from .matcore import as_square, check_density, hermitian_eig, opnorm

__all__ = [
    "QueryCount",
    "TransformRecord",
    "BlockEncoding",
    "ROUNDOFF",
    "dilate",
    "encode_density",
    "purification_unitary",
    "purification_circuit",
    "identity_encoding",
    "extract_block",
    "product",
    "linear_combination",
    "scale_down",
    "renormalized",
]

# Per-operation floating-point allowance added to every ledger entry.
ROUNDOFF = 1e-13
NORM_TOL = 1e-12
UNITARY_TOL = 1e-10

ADJOINT_MARK = "†"


def _adjoint_name(name):
    return name[:-1] if name.endswith(ADJOINT_MARK) else name + ADJOINT_MARK


@dataclass(frozen=True)
class QueryCount:
    """Nonnegative tallies of primitive oracle uses.

    Keys are primitive names such as ``"U_rho"``; the adjoint of a primitive
    carries a trailing dagger (``"U_rho†"``).
    """

    tallies: tuple = ()

    @classmethod
    def of(cls, mapping=None, **kw):
        c = Counter(dict(mapping or {}))
        c.update(kw)
        for k, v in c.items():
            if int(v) != v or v < 0:
                raise ParameterError(f"query tally for {k!r} must be a nonnegative integer")
        return cls(tuple(sorted((k, int(v)) for k, v in c.items() if v)))

    def as_dict(self):
        return dict(self.tallies)

    def __getitem__(self, key):
        return self.as_dict().get(key, 0)

    def __add__(self, other):
        c = Counter(self.as_dict())
        c.update(other.as_dict())
        return QueryCount.of(c)

    def scaled(self, k):
        """Tallies multiplied by the nonnegative integer `k`."""
        return QueryCount.of({n: int(k) * v for n, v in self.tallies})

    def adjoint(self):
        """Tallies of the adjoint circuit (each primitive replaced by its adjoint)."""
        return QueryCount.of({_adjoint_name(n): v for n, v in self.tallies})

    def qsvt(self, d):
        """Cost of a degree-`d` transform: ``d`` uses of the circuit and ``d`` of its adjoint."""
        return self.scaled(d) + self.adjoint().scaled(d)

    @property
    def total(self):
        return sum(v for _, v in self.tallies)

    def cost(self, weights=None):
        """Weighted surrogate gate cost ``sum_k weights[k] * tally[k]`` (default weight 1).

        Adjoint tallies use the weight of their primitive unless listed separately.
        """
        weights = weights or {}
        total = 0.0
        for n, v in self.tallies:
            w = weights.get(n, weights.get(n.rstrip(ADJOINT_MARK), 1.0))
            total += w * v
        return total

    def primitive_totals(self):
        """Tallies with each primitive merged with its adjoint."""
        c = Counter()
        for n, v in self.tallies:
            c[n.rstrip(ADJOINT_MARK)] += v
        return dict(c)

    def __str__(self):
        if not self.tallies:
            return "{}"
        return "{" + ", ".join(f"{k}:{v}" for k, v in self.tallies) + "}"


@dataclass(frozen=True)
class TransformRecord:
    """Bookkeeping for a polynomial transform or amplification.

    Attributes
    ----------
    kind : str
    degree : int
        Degree actually used for the spectral realization.
    charged_degree : int
        Degree charged by the cost model (queries = d uses + d adjoint uses).
    approximation_error : float
        Certified scalar approximation error.
    lipschitz : float
        Grid Lipschitz constant used to propagate input error.
    """

    kind: str
    degree: int
    charged_degree: int
    approximation_error: float
    lipschitz: float = 0.0
    note: str = ""


@dataclass(frozen=True, eq=False)
class BlockEncoding:
    """Dense block encoding with ledger.

    Attributes
    ----------
    unitary : ndarray, shape (2N, 2N)
    dim : int
        System dimension ``N``.
    alpha : float
        Subnormalization.
    ancillas : int
        Logical ancilla-qubit count.
    eps : float
        Ledger error bound.
    queries : QueryCount
    label : str
    children : tuple of BlockEncoding
        Provenance (inputs of the constructing operation).
    target : ndarray or None
        Exact matrix the encoding is meant to represent.
    record : TransformRecord or None
    """

    unitary: np.ndarray
    dim: int
    alpha: float
    ancillas: int
    eps: float
    queries: QueryCount
    label: str
    children: tuple = ()
    target: Optional[np.ndarray] = None
    record: Optional[TransformRecord] = None
    note: str = field(default="")

    @property
    def block(self):
        """Top-left ``N x N`` block of the unitary (no alpha)."""
        return self.unitary[: self.dim, : self.dim]

    @property
    def system_qubits(self):
        return int(math.ceil(math.log2(self.dim))) if self.dim > 1 else 0

    def extract(self):
        return self.alpha * self.block

    def measured_error(self):
        """``||extract - target||_2`` (NaN when no target is attached)."""
        if self.target is None:
            return float("nan")
        return opnorm(self.extract() - self.target)

    def unitarity_defect(self):
        U = self.unitary
        return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))

    def sound(self):
        """True when the measured error is within the ledger."""
        if self.target is None:
            return True
        return self.measured_error() <= self.eps

    def walk(self):
        """Yield all nodes of the provenance tree (pre-order)."""
        yield self
        for ch in self.children:
            yield from ch.walk()

    def explain(self, depth=0, max_depth=None):
        """Text rendering of the provenance tree with per-node ledgers."""
        pad = "  " * depth
        extra = ""
        if self.record is not None:
            extra = f" d={self.record.degree} charged={self.record.charged_degree}"
        line = (f"{pad}{self.label}: alpha={self.alpha:.6g} a={self.ancillas} "
                f"eps={self.eps:.3e} queries={self.queries}{extra}")
        lines = [line]
        if max_depth is None or depth < max_depth:
            for ch in self.children:
                lines.append(ch.explain(depth + 1, max_depth))
        return "\n".join(lines)


# --------------------------------------------------------------------------
# construction helpers
# --------------------------------------------------------------------------

def _dilation(A):
    """Unitary ``[[A, W C W^H], [V C V^H, -A^H]]`` with ``A = W S V^H``, ``C = sqrt(1-S^2)``."""
    W, s, Vh = linalg.svd(A)
    s = np.clip(s, 0.0, 1.0)
    c = np.sqrt(np.clip(1.0 - s * s, 0.0, None))
    V = Vh.conj().T
    top_right = (W * c) @ W.conj().T
    bottom_left = (V * c) @ Vh
    A_exact = (W * s) @ Vh
    return np.block([[A_exact, top_right], [bottom_left, -A_exact.conj().T]])


def _make(block, alpha, ancillas, eps, queries, label, children=(), target=None, record=None,
          note=""):
    block = np.asarray(block, dtype=complex)
    nrm = opnorm(block)
    if nrm > 1.0 + 1e-9:
        raise NormError(nrm)
    U = _dilation(block)
    N = block.shape[0]
    # clamping can move the block by at most (nrm - 1)
    clamp = max(0.0, nrm - 1.0) * alpha
    return BlockEncoding(U, N, float(alpha), int(ancillas), float(eps + clamp), queries, label,
                         tuple(children), target, record, note)


def _roundoff(alpha):
    return ROUNDOFF * max(1.0, float(alpha))


def extract_block(be):
    """Return ``alpha`` times the top-left system block."""
    return be.extract()


def dilate(A, name="U_A", label=None):
    """Exact ``(1, 1, 0)`` block encoding of a contraction via unitary dilation.

    Parameters
    ----------
    A : array_like
        Square matrix with ``||A||_2 <= 1``.
    name : str or None
        Primitive name recorded in the query count (``None`` for free leaves).

    Raises
    ------
    NormError
        If ``||A||_2 > 1 + 1e-12``.
    """
    A = as_square(A)
    nrm = opnorm(A)
    if nrm > 1.0 + NORM_TOL:
        raise NormError(nrm)
    q = QueryCount.of({name: 1}) if name else QueryCount()
    return _make(A, 1.0, 1, _roundoff(1.0), q, label or f"dilate[{name or 'A'}]", target=A.copy())


def purification_unitary(rho):
    """Unitary ``U_rho`` on ``C^N (x) C^N`` preparing a purification of `rho`.

    Its first column is ``|psi> = sum_i sqrt(lam_i) |v_i>|i>``; the remaining
    columns complete it to an orthonormal basis.
    """
    dec = hermitian_eig(rho)
    lam = np.clip(dec.eigenvalues, 0.0, None)
    N = dec.dim
    psi = (dec.eigenvectors * np.sqrt(lam)).reshape(N * N)
    psi /= np.linalg.norm(psi)
    M = np.eye(N * N, dtype=complex)
    M[:, 0] = psi
    Q, _ = np.linalg.qr(M)
    c = np.vdot(Q[:, 0], psi)
    Q[:, 0] *= c / abs(c)
    return Q


def purification_circuit(rho):
    """Explicit ``(U^H (x) I_S) SWAP_{A1,S} (U (x) I_S)`` on registers ``A1 A2 S``.

    Its top-left ``N x N`` block (ancillas ``A1 A2`` in ``|0>``) equals `rho`.
    """
    N = rho.shape[0]
    U = purification_unitary(rho)
    I = np.eye(N)
    UI = np.kron(U, I)
    # SWAP of A1 and S as a permutation of the basis |a1, a2, s>
    idx = np.arange(N**3).reshape(N, N, N)
    perm = np.transpose(idx, (2, 1, 0)).reshape(N**3)
    S = np.eye(N**3)[perm]
    return UI.conj().T @ S @ UI


def encode_density(rho, name="rho", literal_max_dim=8):
    """Exact block encoding of a density matrix from its purification.

    One use of ``U_name`` and one of its adjoint are recorded. For dimensions
    up to `literal_max_dim` the block is obtained from the explicit circuit
    ``(U^H (x) I) SWAP (U (x) I)`` on three registers; beyond that the
    partial-trace identity it implements is used directly.

    Raises
    ------
    ValidationError
        If `rho` is not a valid density matrix.
    """
    rho = check_density(rho)
    N = rho.shape[0]
    block = purification_circuit(rho)[:N, :N] if N <= literal_max_dim else rho
    n = int(math.ceil(math.log2(N))) if N > 1 else 1
    prim = f"U_{name}"
    q = QueryCount.of({prim: 1, prim + ADJOINT_MARK: 1})
    return _make(block, 1.0, 2 * n, _roundoff(1.0), q, f"density[{name}]", target=rho.copy())


def identity_encoding(n_or_dim, as_qubits=True):
    """Exact ``(1, 1, 0)`` encoding of the identity.

    Parameters
    ----------
    n_or_dim : int
        Number of system qubits (default) or the dimension when
        ``as_qubits=False``.
    """
    N = 2 ** int(n_or_dim) if as_qubits else int(n_or_dim)
    if N < 1:
        raise ParameterError("dimension must be >= 1")
    I = np.eye(N, dtype=complex)
    U = np.block([[I, np.zeros_like(I)], [np.zeros_like(I), -I]])
    return BlockEncoding(U, N, 1.0, 1, 0.0, QueryCount(), "identity", (), I.copy())


def _check_dims(encs):
    dims = {e.dim for e in encs}
    if len(dims) != 1:
        raise DimensionError(f"mismatched system dimensions {sorted(dims)}")


def _target_or_none(*ts):
    return None if any(t is None for t in ts) else ts


def product(u, v, label=None):
    """Block encoding of ``A B`` from encodings of ``A`` and ``B``.

    Ledger ``(alpha_u alpha_v, a_u + a_v, alpha_u eps_v + alpha_v eps_u)``;
    one use of each input.
    """
    _check_dims([u, v])
    alpha = u.alpha * v.alpha
    eps = u.alpha * v.eps + v.alpha * u.eps + u.eps * v.eps + _roundoff(alpha)
    tgt = None if u.target is None or v.target is None else u.target @ v.target
    return _make(u.block @ v.block, alpha, u.ancillas + v.ancillas, eps, u.queries + v.queries,
                 label or "product", (u, v), tgt)


def linear_combination(encodings, gamma, label=None):
    """Block encoding of ``sum_j gamma_j A_j``.

    The subnormalization is ``sum_j |gamma_j| alpha_j`` and the ledger error
    ``||gamma||_1 max_j eps_j``. Each input is used once; the ancilla count
    grows by ``ceil(log2 m)``.
    """
    encodings = list(encodings)
    if not encodings:
        raise ParameterError("linear_combination needs at least one encoding")
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (len(encodings),):
        raise ParameterError("one weight per encoding is required")
    _check_dims(encodings)
    l1 = float(np.sum(np.abs(gamma)))
    if l1 == 0:
        raise ParameterError("weights must not all vanish")
    alphas = np.array([e.alpha for e in encodings])
    alpha = float(np.sum(np.abs(gamma) * alphas))
    block = sum(g * e.alpha * e.block for g, e in zip(gamma, encodings)) / alpha
    eps = l1 * max(e.eps for e in encodings) + _roundoff(alpha) * len(encodings)
    queries = QueryCount()
    for e in encodings:
        queries = queries + e.queries
    m = len(encodings)
    anc = max(e.ancillas for e in encodings) + (int(math.ceil(math.log2(m))) if m > 1 else 0)
    tgt = None
    if all(e.target is not None for e in encodings):
        tgt = sum(g * e.target for g, e in zip(gamma, encodings))
    return _make(block, alpha, anc, eps, queries, label or f"lcu[{m}]", tuple(encodings), tgt)


def scale_down(be, p, label=None):
    """Block encoding of ``A/p`` (``p > 1``) using one extra ancilla rotation.

    The subnormalization becomes ``alpha/p``; queries are unchanged.
    """
    if not p > 1:
        raise ParameterError(f"scale factor must exceed 1, got {p}")
    tgt = None if be.target is None else be.target / p
    return BlockEncoding(be.unitary, be.dim, be.alpha / p, be.ancillas + 1,
                         be.eps / p + _roundoff(be.alpha / p), be.queries,
                         label or f"scale[1/{p:.6g}]", (be,), tgt)


def renormalized(be, label=None):
    """View an ``(alpha, a, eps)`` encoding of ``A`` as a ``(1, a, eps/alpha)`` encoding of ``A/alpha``."""
    tgt = None if be.target is None else be.target / be.alpha
    return BlockEncoding(be.unitary, be.dim, 1.0, be.ancillas, be.eps / be.alpha + ROUNDOFF,
                         be.queries, label or "renormalize", (be,), tgt)
