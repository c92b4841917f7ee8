"""Dense simulation of block-encoding pipelines for matrix functions.

Covers the maximal quantum f-divergence ``Tr[sigma^{1/2} f(sigma^{-1/2} rho
sigma^{-1/2}) sigma^{1/2}]`` and Kubo–Ando operator means, with an explicit
error/ancilla/query ledger attached to every block encoding.

Modules
-------
matcore      validation, spectral calculus, random fixtures, matrix text format
functions    operator-convex and operator-monotone generators with measures
funcapprox   certified polynomial, quadrature and rational approximations
blockenc     block encodings and their composition rules
qsvt         polynomial transforms of block-encoded Hermitian matrices
divergence   divergence oracles and pipelines
means        operator-mean oracles and pipelines
resources    cost formulas and reconciliation with measured query counts
cli          ``qmatfun`` command-line entry point
"""

from .blockenc import BlockEncoding, QueryCount
from .divergence import (
    DivergenceReport,
    build_gamma,
    estimate_divergence,
    general_convex,
    oracle_divergence,
    xlogx_route1,
    xlogx_route2,
)
from .errors import QMatFunError
from .functions import FunctionSpec, from_name
from .means import MeanReport, harmonic_mixture_mean, oracle_mean, stieltjes_mean

__version__ = "0.1.0"

__all__ = [
    "BlockEncoding",
    "QueryCount",
    "DivergenceReport",
    "MeanReport",
    "FunctionSpec",
    "QMatFunError",
    "build_gamma",
    "estimate_divergence",
    "general_convex",
    "oracle_divergence",
    "xlogx_route1",
    "xlogx_route2",
    "from_name",
    "oracle_mean",
    "harmonic_mixture_mean",
    "stieltjes_mean",
]
