"""Dense Hermitian linear algebra and exact spectral oracles.

Matrices are plain complex :class:`numpy.ndarray` objects; the functions in
this module validate the structural properties (Hermiticity, positivity,
unit trace) that downstream pipelines rely on.

Random fixtures use :func:`numpy.random.default_rng` (PCG64) seeded with the
integer supplied by the caller, so that every fixture is reproducible.
"""

from dataclasses import dataclass
import io
import os

import numpy as np
from scipy import linalg

from .errors import (
    DimensionError,
    DomainError,
    NotHermitianError,
    ParameterError,
    SingularMatrixError,
    ValidationError,
)

HERMITIAN_TOL = 1e-12
PSD_FLOOR = 1e-10
INVERSE_FLOOR = 1e-8
TRACE_TOL = 1e-10

__all__ = [
    "HERMITIAN_TOL",
    "PSD_FLOOR",
    "INVERSE_FLOOR",
    "SpectralDecomposition",
    "as_square",
    "asymmetry",
    "check_hermitian",
    "check_psd",
    "check_density",
    "check_spectrum_window",
    "hermitian_eig",
    "apply_spectral_function",
    "condition_number",
    "lambda_min",
    "opnorm",
    "psd_sqrt",
    "psd_inv_sqrt",
    "random_unitary",
    "random_hermitian",
    "random_density",
    "random_psd",
    "partial_trace",
    "format_matrix",
    "parse_matrix",
    "write_matrix",
    "read_matrix",
]


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigen-decomposition ``M = V diag(w) V^H`` of a Hermitian matrix.

    Attributes
    ----------
    eigenvalues : ndarray, shape (n,)
        Real eigenvalues in ascending order.
    eigenvectors : ndarray, shape (n, n)
        Unitary matrix whose columns are the eigenvectors.
    asymmetry : float
        Relative asymmetry of the input before symmetrization.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    asymmetry: float = 0.0

    def reconstruct(self, values=None):
        """Return ``V diag(values) V^H`` (defaults to the eigenvalues)."""
        w = self.eigenvalues if values is None else np.asarray(values)
        V = self.eigenvectors
        return (V * w) @ V.conj().T

    @property
    def dim(self):
        return self.eigenvalues.shape[0]


def as_square(M, name="matrix"):
    """Return `M` as a complex 2-D square array."""
    A = np.asarray(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    return A


def asymmetry(M):
    """Largest entry of ``|M - M^H|`` relative to ``max|M|``."""
    A = np.asarray(M)
    scale = np.max(np.abs(A))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(A - A.conj().T)) / scale)


def check_hermitian(M, tol=HERMITIAN_TOL, name="matrix"):
    """Validate Hermiticity and return the symmetrized matrix ``(M + M^H)/2``.

    Raises
    ------
    NotHermitianError
        If the relative asymmetry exceeds `tol`.
    """
    A = as_square(M, name)
    asym = asymmetry(A)
    if asym > tol:
        raise NotHermitianError(asym, tol)
    return 0.5 * (A + A.conj().T)


def hermitian_eig(M, tol=HERMITIAN_TOL):
    """Eigen-decomposition of a Hermitian matrix.

    Parameters
    ----------
    M : array_like
        Hermitian matrix (validated against `tol`, then symmetrized).

    Returns
    -------
    SpectralDecomposition
    """
    A = as_square(M)
    asym = asymmetry(A)
    if asym > tol:
        raise NotHermitianError(asym, tol)
    w, V = linalg.eigh(0.5 * (A + A.conj().T))
    return SpectralDecomposition(w, V, asym)


def apply_spectral_function(M, f, tol=HERMITIAN_TOL):
    """Evaluate ``f(M) = V diag(f(w)) V^H`` for Hermitian `M`.

    Parameters
    ----------
    M : array_like
        Hermitian matrix.
    f : callable
        Vectorized real scalar function.

    Raises
    ------
    DomainError
        If `f` is not finite at one of the eigenvalues.
    """
    dec = M if isinstance(M, SpectralDecomposition) else hermitian_eig(M, tol)
    w = dec.eigenvalues
    with np.errstate(all="ignore"):
        fw = np.asarray(f(w), dtype=float)
    fw = np.broadcast_to(fw, w.shape)
    bad = ~np.isfinite(fw)
    if np.any(bad):
        lam = float(w[np.argmax(bad)])
        raise DomainError(f"function is undefined at eigenvalue {lam:.17g}", value=lam)
    return dec.reconstruct(fw)


def lambda_min(M):
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(hermitian_eig(M).eigenvalues[0])


def opnorm(M):
    """Spectral (operator 2-) norm."""
    A = np.asarray(M)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def condition_number(M, floor=INVERSE_FLOOR):
    """Spectral condition number ``lambda_max / lambda_min`` of a positive matrix.

    Raises
    ------
    SingularMatrixError
        If ``lambda_min <= floor``.
    """
    w = hermitian_eig(M).eigenvalues
    if w[0] <= floor:
        raise SingularMatrixError(w[0], floor)
    return float(w[-1] / w[0])


def check_psd(M, floor=PSD_FLOOR, name="matrix"):
    """Validate that `M` is Hermitian positive semidefinite; return it symmetrized."""
    A = check_hermitian(M, name=name)
    w = linalg.eigvalsh(A)
    if w[0] < -floor:
        raise ValidationError(f"{name} is not positive semidefinite: lambda_min={w[0]:.3e}")
    return A


def check_density(M, require_invertible=False, name="density matrix"):
    """Validate a density matrix (PSD, unit trace); return it symmetrized.

    Parameters
    ----------
    require_invertible : bool
        Also reject ``lambda_min <= 1e-8``.
    """
    A = check_psd(M, name=name)
    tr = np.trace(A).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(f"{name} has trace {tr:.15g}, expected 1")
    if require_invertible:
        w0 = linalg.eigvalsh(A)[0]
        if w0 <= INVERSE_FLOOR:
            raise SingularMatrixError(w0, INVERSE_FLOOR)
    return A


def check_spectrum_window(M, lo, hi, slack=PSD_FLOOR, name="matrix"):
    """Check that the spectrum of Hermitian `M` lies in ``[lo, hi]`` (with slack).

    Returns the symmetrized matrix.
    """
    from .errors import WindowError

    A = check_hermitian(M, name=name)
    w = linalg.eigvalsh(A)
    if w[0] < lo - slack or w[-1] > hi + slack:
        raise WindowError(
            f"spectrum of {name} [{w[0]:.6g}, {w[-1]:.6g}] is outside [{lo:.6g}, {hi:.6g}]",
            lo=lo,
            hi=hi,
            observed=(float(w[0]), float(w[-1])),
        )
    return A


def psd_sqrt(M):
    """Principal square root of a PSD matrix (tiny negative eigenvalues clamped)."""
    return apply_spectral_function(M, lambda x: np.sqrt(np.clip(x, 0.0, None)))


def psd_inv_sqrt(M, floor=INVERSE_FLOOR):
    """Inverse principal square root of a positive definite matrix."""
    dec = hermitian_eig(M)
    if dec.eigenvalues[0] <= floor:
        raise SingularMatrixError(dec.eigenvalues[0], floor)
    return dec.reconstruct(dec.eigenvalues ** -0.5)


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_unitary(dim, seed=None):
    """Haar-random unitary via QR of a complex Ginibre matrix (phase-corrected)."""
    rng = _rng(seed)
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def random_hermitian(dim, seed=None, scale=1.0):
    """Random Hermitian matrix from the Gaussian unitary ensemble."""
    rng = _rng(seed)
    Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (Z + Z.conj().T)


def random_density(dim, kappa_target, seed=None):
    """Random full-rank density matrix with prescribed condition number.

    The spectrum is log-uniform between ``1/kappa_target`` and 1 with both
    extremes attained, rotated by a Haar unitary and normalized to unit trace.
    ``kappa_target == 1`` returns exactly ``I/dim``.

    Parameters
    ----------
    dim : int
    kappa_target : float
        Desired ``lambda_max / lambda_min`` (>= 1).
    seed : int or Generator, optional
    """
    if dim < 1:
        raise ParameterError(f"dim must be >= 1, got {dim}")
    if not kappa_target >= 1:
        raise ParameterError(f"kappa_target must be >= 1, got {kappa_target}")
    if kappa_target == 1 or dim == 1:
        return np.eye(dim, dtype=complex) / dim
    rng = _rng(seed)
    logs = np.concatenate(([0.0, -np.log(kappa_target)],
                           -np.log(kappa_target) * rng.uniform(size=dim - 2)))
    w = np.exp(logs)
    U = random_unitary(dim, rng)
    rho = (U * w) @ U.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_psd(dim, delta, seed=None):
    """Random positive definite matrix with spectrum uniform in ``(delta, 1)``."""
    if dim < 1:
        raise ParameterError(f"dim must be >= 1, got {dim}")
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    rng = _rng(seed)
    w = rng.uniform(delta, 1.0, size=dim)
    U = random_unitary(dim, rng)
    M = (U * w) @ U.conj().T
    return 0.5 * (M + M.conj().T)


def partial_trace(M, dims, keep):
    """Partial trace of a matrix on a tensor-product space.

    Parameters
    ----------
    M : ndarray, shape (prod(dims), prod(dims))
    dims : sequence of int
        Local dimensions of the factors.
    keep : int or sequence of int
        Indices of the factors to keep, in order.
    """
    dims = list(dims)
    keep = sorted([keep] if np.isscalar(keep) else keep)
    n = len(dims)
    if int(np.prod(dims)) != np.shape(M)[0]:
        raise DimensionError(f"dims {dims} do not match matrix of size {np.shape(M)[0]}")
    T = np.asarray(M).reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # trace out from the highest index down so axis numbers stay valid
    for count, i in enumerate(sorted(traced, reverse=True)):
        m = n - count
        T = np.trace(T, axis1=i, axis2=i + m)
    d = int(np.prod([dims[i] for i in keep])) if keep else 1
    return T.reshape(d, d)


# --------------------------------------------------------------------------
# Matrix text format
# --------------------------------------------------------------------------

def format_matrix(M, comment=None):
    """Serialize a matrix to the text format.

    Line 1 is ``rows cols``; then one ``re im`` line per entry in row-major
    order, printed with 17 significant digits so that parsing recovers every
    double exactly. Optional `comment` lines are emitted with a ``#`` prefix.
    """
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {A.shape}")
    buf = io.StringIO()
    if comment:
        for line in str(comment).splitlines():
            buf.write(f"# {line}\n")
    buf.write(f"{A.shape[0]} {A.shape[1]}\n")
    for z in A.ravel():
        buf.write(f"{z.real:.17g} {z.imag:.17g}\n")
    return buf.getvalue()


def parse_matrix(text):
    """Parse the text format produced by :func:`format_matrix`.

    Raises
    ------
    ValidationError
        On malformed headers, wrong entry counts or unparsable numbers.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValidationError("empty matrix file")
    try:
        rows, cols = (int(tok) for tok in lines[0].split())
    except ValueError as exc:
        raise ValidationError(f"bad matrix header {lines[0]!r}") from exc
    if rows < 1 or cols < 1:
        raise ValidationError(f"bad matrix shape {rows}x{cols}")
    body = lines[1:]
    if len(body) != rows * cols:
        raise ValidationError(f"expected {rows * cols} entries, found {len(body)}")
    out = np.empty(rows * cols, dtype=complex)
    for k, ln in enumerate(body):
        parts = ln.split()
        if len(parts) != 2:
            raise ValidationError(f"entry {k}: expected 're im', got {ln!r}")
        try:
            out[k] = complex(float(parts[0]), float(parts[1]))
        except ValueError as exc:
            raise ValidationError(f"entry {k}: cannot parse {ln!r}") from exc
    return out.reshape(rows, cols)


def write_matrix(path, M, comment=None):
    """Write `M` to `path` in the matrix text format."""
    with open(os.fspath(path), "w", encoding="ascii") as fh:
        fh.write(format_matrix(M, comment))


def read_matrix(path):
    """Read a matrix from `path` (text format)."""
    with open(os.fspath(path), encoding="ascii") as fh:
        return parse_matrix(fh.read())
