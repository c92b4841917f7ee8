"""Invariant suites run by ``qmatfun validate``, plus seeded generators.

Each suite is a function returning a list of :class:`Check` records; a suite
passes when every check passes. Seeds are fixed so that repeated runs are
identical.
"""

from dataclasses import dataclass
import importlib.resources
import math
import os

import numpy as np

from . import blockenc as be
from . import divergence as dv
from . import funcapprox as fa
from . import functions as F
from . import means as mn
from . import resources as rs
from .matcore import (
    format_matrix,
    hermitian_eig,
    opnorm,
    parse_matrix,
    partial_trace,
    random_density,
    random_hermitian,
    random_psd,
    random_unitary,
    read_matrix,
)
from .qsvt import amplify, block_spectrum, invert, power_neg, power_pos

__all__ = [
    "Check",
    "SUITES",
    "run_suites",
    "fixture_dir",
    "load_fixtures",
    "random_composition_tree",
    "random_channel",
    "ledger_violations",
    "random_state_pair",
]

KL_FIXTURE = 0.75 * math.log(1.5) + 0.25 * math.log(0.5)
CHI_FIXTURE = 0.25


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self):
        return f"  [{'ok' if self.ok else 'FAIL'}] {self.name}" + (f": {self.detail}" if self.detail else "")


def fixture_dir():
    """Directory of the packaged fixture matrices."""
    return os.fspath(importlib.resources.files("qmatfun") / "fixtures")


def load_fixtures(directory=None):
    """Read the commuting pair and the geometric-mean pair."""
    d = directory or fixture_dir()
    names = ("commuting_rho", "commuting_sigma", "geometric_A", "geometric_B")
    return {n: read_matrix(os.path.join(d, n + ".mat")) for n in names}


# --------------------------------------------------------------------------
# seeded generators

def random_state_pair(dim, kappa_sigma, seed, kappa_rho=None):
    """Seeded ``(rho, sigma)`` with ``cond(sigma) = kappa_sigma``."""
    rng = np.random.default_rng(seed)
    s1, s2 = (int(x) for x in rng.integers(0, 2**31, size=2))
    sigma = random_density(dim, kappa_sigma, seed=s1)
    rho = random_density(dim, kappa_rho or kappa_sigma, seed=s2)
    return rho, sigma


def random_channel(dims, keep, seed):
    """Partial trace after a seeded unitary: ``rho -> Tr_rest[U rho U^H]``."""
    U = random_unitary(int(np.prod(dims)), seed=seed)

    def channel(rho):
        return partial_trace(U @ rho @ U.conj().T, dims, keep)

    return channel


def _leaf(rng, dim, psd):
    kind = rng.integers(3)
    if psd or kind == 0:
        if rng.random() < 0.5:
            rho = random_density(dim, float(rng.uniform(1.5, 6.0)), seed=int(rng.integers(2**31)))
            return be.encode_density(rho, f"rho{int(rng.integers(100))}")
        A = random_psd(dim, float(rng.uniform(0.1, 0.6)), seed=int(rng.integers(2**31)))
        return be.dilate(A / opnorm(A), "U_P")
    if kind == 1:
        H = random_hermitian(dim, seed=int(rng.integers(2**31)))
        return be.dilate(H / (1.2 * opnorm(H)), "U_H")
    M = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return be.dilate(M / (1.1 * opnorm(M)), "U_M")


def _positive_window(enc):
    """Smallest eigenvalue of the normalized block and of the normalized target."""
    w = block_spectrum(enc)[0]
    if enc.target is not None:
        T = enc.target / enc.alpha
        w = min(w, hermitian_eig(0.5 * (T + T.conj().T), tol=np.inf).eigenvalues[0])
    return w


def _psd_tree(rng, dim, depth, eps):
    if depth <= 0 or rng.random() < 0.3:
        return _leaf(rng, dim, psd=True)
    op = rng.integers(6)
    if op == 0:
        k = int(rng.integers(2, 4))
        kids = [_psd_tree(rng, dim, depth - 1, eps) for _ in range(k)]
        return be.linear_combination(kids, rng.uniform(0.1, 1.0, size=k))
    if op == 1:
        a = _psd_tree(rng, dim, depth - 1, eps)
        b = _psd_tree(rng, dim, depth - 1, eps)
        return be.product(be.product(a, b), a, label="sandwich")
    child = be.renormalized(_psd_tree(rng, dim, depth - 1, eps))
    lo = _positive_window(child)
    if not lo > 2e-3:
        return child
    kappa = 1.0 / (0.95 * lo)
    if op == 2:
        return invert(child, kappa, eps)
    if op == 3:
        return power_neg(child, float(rng.choice([0.25, 0.5, 1.0])), kappa, eps)
    if op == 4:
        return power_pos(child, float(rng.choice([0.25, 0.5])), eps, kappa=kappa)
    nrm = opnorm(child.block)
    g = 0.8 / nrm
    if g <= 1.0:
        return child
    return amplify(child, float(min(g, 4.0)), 0.2, eps)


def random_composition_tree(seed, max_depth=6, dim=4, eps=1e-6):
    """Seeded composition of dilate, density, product, LCU, scale, powers, invert, amplify."""
    rng = np.random.default_rng(seed)

    def node(depth):
        if depth <= 0 or rng.random() < 0.2:
            return _leaf(rng, dim, psd=False)
        op = rng.integers(4)
        if op == 0:
            return be.product(node(depth - 1), node(depth - 1))
        if op == 1:
            k = int(rng.integers(2, 4))
            return be.linear_combination([node(depth - 1) for _ in range(k)],
                                         rng.uniform(-1.0, 1.0, size=k))
        if op == 2:
            return be.scale_down(node(depth - 1), float(rng.uniform(1.2, 4.0)))
        return _psd_tree(rng, dim, depth - 1, eps)

    return node(max_depth)


def ledger_violations(tree):
    """Nodes whose measured error exceeds the ledger."""
    bad = []
    seen = set()
    for n in tree.walk():
        if id(n) in seen:
            continue
        seen.add(id(n))
        if n.target is not None and not n.sound():
            bad.append(n)
    return bad


# --------------------------------------------------------------------------
# suites

def suite_matcore():
    out = []
    rng = np.random.default_rng(11)
    exact = True
    for k in range(5):
        M = rng.standard_normal((3, 3)) * 10.0 ** rng.integers(-8, 8) + 1j * rng.standard_normal((3, 3))
        exact &= np.array_equal(parse_matrix(format_matrix(M)), M)
    out.append(Check("matrix text round-trip is bit-exact", bool(exact)))
    rho = random_density(8, 5.0, seed=3)
    w = hermitian_eig(rho).eigenvalues
    out.append(Check("random_density hits the requested condition number",
                     abs(w[-1] / w[0] - 5.0) < 1e-8, f"{w[-1] / w[0]:.12g}"))
    a, b = random_density(2, 2.0, seed=1), random_density(4, 3.0, seed=2)
    pt = partial_trace(np.kron(a, b), (2, 4), keep=0)
    out.append(Check("partial trace of a product state", opnorm(pt - a) < 1e-12))
    return out


def suite_funcapprox():
    out = []
    p = fa.log_poly(1 / 16, 1e-6)
    out.append(Check("log polynomial at beta=1/16 certified to 1e-6", p.certified_error <= 1e-6,
                     f"degree {p.degree}, error {p.certified_error:.2e}"))
    r = fa.log_stieltjes(1 / 16, 1e-6)
    out.append(Check("log resolvent quadrature at beta=1/16 certified to 1e-6",
                     r.certified_error <= 1e-6, f"m {r.m}, error {r.certified_error:.2e}"))
    errs = [fa.log_resolvent(1 / 16, m).certified_error for m in (4, 8, 16, 32)]
    ratios = [b / a for a, b in zip(errs, errs[1:])]
    out.append(Check("quadrature error halves (at least) per doubling of m",
                     all(q <= 0.5 for q in ratios), ", ".join(f"{q:.2e}" for q in ratios)))
    k = fa.kraus_rational(F.xlogx(), 0.1, 1e-6, upper=2.0)
    out.append(Check("Kraus rational for x log x certified", k.certified_error <= 1e-6,
                     f"m {k.m}"))
    return out


def suite_blockenc():
    out = []
    rho = random_density(4, 4.0, seed=5)
    C = be.purification_circuit(rho)
    unit = opnorm(C.conj().T @ C - np.eye(C.shape[0]))
    out.append(Check("purification circuit is unitary with block rho",
                     unit < 1e-10 and opnorm(C[:4, :4] - rho) < 1e-12))
    bad = sum(len(ledger_violations(random_composition_tree(s, 4))) for s in range(10))
    out.append(Check("ledger soundness on 10 composition trees", bad == 0, f"{bad} violations"))
    return out


def suite_divergence():
    out = []
    fx = load_fixtures()
    rho, sigma = fx["commuting_rho"], fx["commuting_sigma"]
    val = dv.oracle_divergence(rho, sigma, "xlogx")
    out.append(Check("KL fixture oracle", abs(val - KL_FIXTURE) < 1e-12, f"{val:.12g}"))
    val = dv.oracle_divergence(rho, sigma, "chi_square")
    out.append(Check("chi-square fixture oracle", abs(val - CHI_FIXTURE) < 1e-12, f"{val:.12g}"))
    rep = dv.xlogx_route1(rho, sigma, 1e-3)
    out.append(Check("route 1 on the fixture", rep.within_tolerance, f"|err| {rep.error:.2e}"))
    out.append(Check("normalization trail replays bit-exactly",
                     rep.replay_trail() == rep.estimate))
    worst = 0.0
    for s in range(10):
        r, sg = random_state_pair(4, 4.0, seed=s)
        d = dv.oracle_divergence(r, sg, "xlogx")
        ch = random_channel((2, 2), 0, seed=100 + s)
        dd = dv.oracle_divergence(ch(r), ch(sg), "xlogx")
        worst = max(worst, dd - d, -d)
    out.append(Check("nonnegativity and data processing (10 trials)", worst <= 1e-9,
                     f"worst slack {worst:.2e}"))
    return out


def suite_means():
    out = []
    fx = load_fixtures()
    A, B = fx["geometric_A"], fx["geometric_B"]
    G = mn.oracle_mean(A, B, "geometric")
    out.append(Check("geometric fixture oracle", opnorm(G - np.diag([0.4, 0.4])) < 1e-12))
    rep = mn.stieltjes_mean(A, B, "geometric", 0.25, 1e-5)
    out.append(Check("Stieltjes pipeline on the fixture", rep.error <= 1e-4,
                     f"{rep.error:.2e}"))
    A8 = random_psd(4, 0.2, seed=1)
    worst = 0.0
    for tag in ("arithmetic", "harmonic", "geometric", "logarithmic", "heinz", "power_mean"):
        worst = max(worst, opnorm(mn.oracle_mean(A8, A8, tag) - A8))
    out.append(Check("idempotency of all tabled means (oracle)", worst < 1e-10, f"{worst:.1e}"))
    B8 = random_psd(4, 0.2, seed=2)
    Gm = mn.oracle_mean(A8, B8, "geometric")
    ric = opnorm(Gm @ np.linalg.inv(A8) @ Gm - B8)
    out.append(Check("Riccati identity for the geometric mean", ric < 1e-8, f"{ric:.1e}"))
    return out


def suite_resources():
    out = []
    ok = True
    for ident, d in rs.FORMULAS.items():
        args = {k: 2.0 for k in d.inputs}
        args.update({k: v for k, v in (("eps", 1e-3), ("delta", 0.1)) if k in d.inputs})
        try:
            ok &= rs.evaluate(ident, **args).value > 0
        except Exception:  # pragma: no cover - reported below
            ok = False
    out.append(Check(f"all {len(rs.FORMULAS)} formulas evaluate", bool(ok)))
    kw = dict(C_sigma=2.0, C_rho=2.0, kappa_sigma=4.0, eps=1e-3)
    a = rs.evaluate("divergence.step3.route1", kappa_gamma=8.0, **kw).value
    b = rs.evaluate("divergence.step3.route1", kappa_gamma=16.0, **kw).value
    out.append(Check("route 1 cost doubles with kappa_gamma", b / a == 2.0, f"{b / a:.12g}"))
    r1 = rs.evaluate("divergence.sample.repetitions", kappa_sigma=4, kappa_gamma=8, eps=1e-3).value
    r2 = rs.evaluate("divergence.sample.repetitions", kappa_sigma=4, kappa_gamma=8, eps=5e-4).value
    out.append(Check("repetitions quadruple when eps halves", abs(r2 / r1 - 4) < 1e-12))
    return out


def suite_fixtures(directory=None):
    out = []
    try:
        fx = load_fixtures(directory)
    except Exception as exc:
        return [Check("fixtures readable", False, str(exc))]
    out.append(Check("fixtures readable", True))
    try:
        kl = dv.oracle_divergence(fx["commuting_rho"], fx["commuting_sigma"], "xlogx")
        out.append(Check("commuting fixture gives the KL value", abs(kl - KL_FIXTURE) < 1e-12,
                         f"{kl:.12g}"))
        G = mn.oracle_mean(fx["geometric_A"], fx["geometric_B"], "geometric")
        out.append(Check("geometric fixture gives diag(0.4, 0.4)",
                         opnorm(G - np.diag([0.4, 0.4])) < 1e-12))
    except Exception as exc:
        out.append(Check("fixtures valid", False, str(exc)))
    return out


SUITES = {
    "matcore": suite_matcore,
    "funcapprox": suite_funcapprox,
    "blockenc": suite_blockenc,
    "divergence": suite_divergence,
    "means": suite_means,
    "resources": suite_resources,
    "fixtures": suite_fixtures,
}


def run_suites(names=None, fixtures=None):
    """Run the named suites (all by default); returns ``{suite: [Check, ...]}``."""
    names = list(names or SUITES)
    results = {}
    for n in names:
        if n not in SUITES:
            raise KeyError(n)
        fn = SUITES[n]
        try:
            results[n] = fn(fixtures) if n == "fixtures" else fn()
        except Exception as exc:
            results[n] = [Check("suite raised", False, f"{type(exc).__name__}: {exc}")]
    return results
