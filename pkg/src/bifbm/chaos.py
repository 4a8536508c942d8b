"""Wiener chaos expansion of the local time and its truncated norms.

Hermite polynomials use the normalisation ``H_n = He_n / n!``, i.e.
``H_n(x) = ((-1)^n / n!) e^{x^2/2} d^n/dx^n e^{-x^2/2}``, with generating
function ``sum_n H_n(x) y^n = exp(xy - y^2/2)``.

The local time at ``x`` of component ``i`` expands with coefficients

    beta_n(s) = p_{sbar^2}(x) / sbar^n * H_n(x / sbar),   sbar = prod_j s_j^{H_ij K_ij},

and the second moment of a product of chaos terms follows from the
isometry ``E[I_n(f) I_n(g)] = n! <f, g>``. Hence

    ||L(x, t)||_2^2 = sum_m sum_{n_1+...+n_d=m} int int prod_i n_i! beta_{n_i}(u) beta_{n_i}(v) R_i(u, v)^{n_i} du dv.

At ``x = 0`` the single-component series sums to ``p p (1 - rho^2)^{-1/2}``,
the bivariate normal density at the origin, which is the independent
oracle used by ``second_moment_oracle``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Optional

import numpy as np
from scipy import integrate, special

from .covariance import BifBmParams, SheetParams, q_function, _kernel
from .errors import ParameterError, QuadratureError

__all__ = [
    "hermite",
    "hermite_log",
    "gaussian_kernel",
    "chaos_coefficient",
    "compositions",
    "TruncatedNorm",
    "local_time_l2_truncated",
    "watanabe_norm_truncated",
    "q_decay_check",
    "second_moment_oracle",
    "zeroth_term_oracle",
    "tail_exponent",
    "ENVELOPE_BETA",
]

# exponent beta in the coefficient bound (n v 1)^{-(8 beta - 1)/6}
ENVELOPE_BETA = 0.49
LOG_SWITCH = 300
# quadrature nodes processed per block, and the total allowed
CHUNK = 1 << 15
MAX_QUAD_POINTS = 50_000_000


def hermite_log(n: int, x):
    """``(sign, log|H_n(x)|)`` by the recurrence with per-step rescaling."""
    if n < 0:
        raise ParameterError("n must be >= 0")
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    logscale = np.zeros_like(x)
    for j in range(n):
        nxt = (x * cur - prev) / (j + 1)
        prev, cur = cur, nxt
        big = np.maximum(np.abs(cur), np.abs(prev))
        big = np.where(big > 0, big, 1.0)
        prev = prev / big
        cur = cur / big
        logscale = logscale + np.log(big)
    with np.errstate(divide="ignore"):
        return np.sign(cur), np.log(np.abs(cur)) + logscale


def hermite(n: int, x):
    """``H_n(x) = He_n(x) / n!`` via ``(n+1) H_{n+1} = x H_n - H_{n-1}``."""
    if int(n) != n or n < 0:
        raise ParameterError("n must be a nonnegative integer")
    n = int(n)
    x = np.asarray(x, dtype=float)
    if n > LOG_SWITCH:
        sign, logabs = hermite_log(n, x)
        out = sign * np.exp(logabs)
    else:
        prev = np.zeros_like(x)
        out = np.ones_like(x)
        for j in range(n):
            prev, out = out, (x * out - prev) / (j + 1)
    return float(out) if out.ndim == 0 else out


def gaussian_kernel(sigma2: float, x, d: Optional[int] = None) -> float:
    """``prod_i (2 pi sigma2)^{-1/2} exp(-x_i^2 / (2 sigma2))``."""
    if not sigma2 > 0:
        raise ParameterError("variance must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if d is not None and x.size == 1 and d > 1:
        x = np.repeat(x, d)
    if d is not None and x.size != d:
        raise ParameterError(f"x has {x.size} coordinates, expected d={d}")
    return float(np.prod(np.exp(-(x**2) / (2 * sigma2)) / np.sqrt(2 * np.pi * sigma2)))


def _sbar(s, p: SheetParams, i: int):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if s.shape[-1] != p.n_params:
        raise ParameterError(f"s must have {p.n_params} coordinates")
    return np.prod(s ** p.hk[i], axis=-1)


def chaos_coefficient(x: float, n: int, s, p: SheetParams, i: int = 0) -> float:
    """``beta_n(s) = p_{sbar^2}(x) / sbar^n H_n(x / sbar)`` for component ``i``."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s <= 0):
        raise ParameterError("chaos coefficients need all s_j > 0")
    sb = float(_sbar(s, p, i))
    return gaussian_kernel(sb * sb, x) / sb**n * hermite(n, x / sb)


def compositions(m: int, d: int):
    """All ``(n_1, ..., n_d)`` with sum ``m``, in colexicographic order."""
    if d == 1:
        yield (m,)
        return
    # colex: compare from the last coordinate; the last one ascends slowest
    for last in range(m + 1):
        for head in compositions(m - last, d - 1):
            yield head + (last,)


# ------------------------------------------------------------ quadrature

@lru_cache(maxsize=32)
def _gl(order: int):
    return np.polynomial.legendre.leggauss(order)


def _graded_rule(lo: float, hi: float, order: int, grade_lo: int, grade_hi: int):
    """Composite Gauss-Legendre on [lo, hi] with dyadic grading at either end."""
    w = hi - lo
    edges = [lo, hi, 0.5 * (lo + hi)]
    edges += [lo + w * 2.0**-k for k in range(1, grade_lo + 1)]
    edges += [hi - w * 2.0**-k for k in range(1, grade_hi + 1)]
    edges = np.unique(np.asarray(edges))
    xg, wg = _gl(order)
    a, b = edges[:-1], edges[1:]
    nodes = (0.5 * (b - a)[:, None] * (xg + 1) + a[:, None]).ravel()
    weights = (0.5 * (b - a)[:, None] * wg).ravel()
    return nodes, weights


def _axis_rules(t_j: float, quad_n: int, grade: int):
    a, wa = _graded_rule(0.0, t_j, quad_n, grade, 0)
    z, wz = _graded_rule(0.0, 1.0, quad_n, grade, grade)
    return a, wa, z, wz


def _normalised_hermite_fn(y, nmax):
    """``g_n(y) = He_n(y) / sqrt(n!) * exp(-y^2 / 4)`` for n = 0..nmax (stable)."""
    g = np.empty((nmax + 1,) + y.shape)
    g[0] = np.exp(-0.25 * y * y)
    if nmax >= 1:
        g[1] = y * g[0]
    for n in range(1, nmax):
        g[n + 1] = (y * g[n] - np.sqrt(n) * g[n - 1]) / np.sqrt(n + 1)
    return g


@dataclass(frozen=True)
class TruncatedNorm:
    """Partial sum through total chaos order ``order_cap``.

    ``terms[m]`` is the order-``m`` contribution (already weighted for
    Watanabe norms); ``table`` lists ``(m, composition, term, partial_sum)``
    rows in the order they were summed.
    """

    value: float
    order_cap: int
    tail_estimate: float
    terms: np.ndarray = field(repr=False)
    table: list = field(default_factory=list, repr=False, compare=False)
    exponent: float = float("nan")
    diverges: bool = False
    alpha: float = 0.0

    def table_rows(self):
        return [
            {"m": m, "composition": [int(n) for n in c], "term": float(v), "partial_sum": float(s)}
            for (m, c, v, s) in self.table
        ]


def tail_exponent(p: SheetParams) -> float:
    """Exponent ``e`` of the per-order envelope ``c m^e`` of the chaos series."""
    b = ENVELOPE_BETA
    return float(-np.sum(1.0 / (2 * p.hstar * p.kstar)) + p.d * (1 - (8 * b - 1) / 6) - 1)


def _check_convergence(p: SheetParams):
    lhs = float(np.sum(1.0 / (p.hstar * p.kstar)))
    if not lhs > p.d:
        raise ParameterError(
            f"local time is not in L2: sum_j 1/(H*_j K*_j) = {lhs:g} <= d = {p.d}"
        )


def _as_sheet(p) -> SheetParams:
    if isinstance(p, BifBmParams):
        return SheetParams.isotropic(p.h, p.k, p.d)
    return p


def _component_orders(xi, U, V, p: SheetParams, i: int, M: int) -> np.ndarray:
    """Rows ``n = 0..M`` of ``n! beta_n(u) beta_n(v) R_i(u, v)^n`` at the nodes."""
    hk = p.hk[i]
    su = np.prod(U**hk, axis=1)
    sv = np.prod(V**hk, axis=1)
    r = np.ones(U.shape[0])
    for j in range(U.shape[1]):
        r *= _kernel(U[:, j], V[:, j], p.hbar[i, j], p.kbar[i, j])
    rho = r / (su * sv)
    yu, yv = xi / su, xi / sv
    gu = _normalised_hermite_fn(yu, M)
    gv = _normalised_hermite_fn(yv, M)
    out = gu * gv
    out *= np.exp(-0.25 * (yu * yu + yv * yv)) / (2 * np.pi * su * sv)
    power = np.ones_like(rho)
    for n in range(1, M + 1):
        power *= rho
        out[n] *= power
    return out


def _composition_terms(x, t, p: SheetParams, M: int, quad_n: int, grade: int):
    """Integrals of ``prod_i n_i! beta beta R^{n_i}`` for every composition."""
    N, d = p.n_params, p.d
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size == 1 and d > 1:
        x = np.repeat(x, d)
    if x.size != d:
        raise ParameterError(f"x must have d={d} coordinates")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.size == 1 and N > 1:
        t = np.repeat(t, N)
    if t.size != N or np.any(t <= 0):
        raise ParameterError(f"t must have N={N} positive coordinates")
    if N > 2:
        raise ParameterError("exact truncated norm is implemented for N <= 2")
    rules = [_axis_rules(float(t[j]), quad_n, grade) for j in range(N)]

    # region sigma_j = 0: (u_j, v_j) = (a, z a); sigma_j = 1: (z a, a).
    # sigma and its complement are mirror images under u <-> v, so only
    # regions with sigma_0 = 0 are integrated and doubled.
    regions = [s for s in product((0, 1), repeat=N) if s[0] == 0]
    comps = {m: list(compositions(m, d)) for m in range(M + 1)}
    totals = {(m, c): 0.0 for m in comps for c in comps[m]}
    sizes = [rules[j][0].size * rules[j][2].size for j in range(N)]
    if len(regions) * int(np.prod(sizes)) > MAX_QUAD_POINTS:
        raise QuadratureError(
            f"{len(regions) * int(np.prod(sizes))} quadrature points exceed {MAX_QUAD_POINTS}; "
            "lower quad_n or grade"
        )
    axis = []
    for j in range(N):
        a, wa, z, wz = rules[j]
        A, Z = np.meshgrid(a, z, indexing="ij")
        axis.append((A.ravel(), (Z * A).ravel(), (np.outer(wa, wz) * A).ravel()))
    total_pts = int(np.prod(sizes))
    for sigma in regions:
        for start in range(0, total_pts, CHUNK):
            idx = np.unravel_index(np.arange(start, min(start + CHUNK, total_pts)), sizes)
            U = np.empty((idx[0].size, N))
            V = np.empty_like(U)
            W = np.full(idx[0].size, 2.0)
            for j in range(N):
                big, small, w = (arr[idx[j]] for arr in axis[j])
                U[:, j], V[:, j] = (big, small) if sigma[j] == 0 else (small, big)
                W *= w
            per_comp = [_component_orders(x[i], U, V, p, i, M) for i in range(d)]
            for m, cl in comps.items():
                for c in cl:
                    integrand = W.copy()
                    for i, n_i in enumerate(c):
                        integrand *= per_comp[i][n_i]
                    totals[(m, c)] += float(np.sum(integrand))
    if not all(np.isfinite(v) for v in totals.values()):
        raise QuadratureError("non-finite chaos term; increase quad_n or grading")
    return comps, totals


def _tail(terms, M, e, alpha, even_only):
    nz = np.flatnonzero(terms)
    if nz.size == 0:
        return 0.0
    last = int(nz[-1])
    if last == 0:
        return 0.0
    if e + alpha >= -1:
        return float("inf")
    c = terms[last] / ((1 + last) ** alpha * last**e)
    s = -(e + alpha)
    if even_only:
        start = last + 2
        # sum over m = start, start + 2, ... of m^{e+alpha}
        return float(c * 2.0 ** (e + alpha) * special.zeta(s, start / 2.0))
    return float(c * special.zeta(s, last + 1))


def local_time_l2_truncated(
    x,
    t,
    p,
    M: int,
    quad_n: int = 16,
    grade: int = 40,
    alpha: float = 0.0,
) -> TruncatedNorm:
    """``sum_{m <= M} (1 + m)^alpha * (order-m chaos contribution)`` of ``||L(x, t)||^2``.

    ``quad_n`` is the Gauss-Legendre order per panel; panels are graded
    dyadically (``grade`` levels) toward ``u = 0`` and toward ``z = 0, 1``
    in the fold ``v = z u``. ``tail_estimate`` sums the envelope
    ``c m^e`` (``e`` from ``tail_exponent``) beyond the last nonzero term.
    """
    p = _as_sheet(p)
    _check_convergence(p)
    if M < 0:
        raise ParameterError("order cap M must be >= 0")
    comps, totals = _composition_terms(x, t, p, int(M), int(quad_n), int(grade))
    weights = (1.0 + np.arange(M + 1)) ** alpha
    terms = np.zeros(M + 1)
    table, running = [], 0.0
    for m in range(M + 1):
        for c in comps[m]:
            v = weights[m] * totals[(m, c)]
            terms[m] += v
            running += v
            table.append((m, c, v, running))
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    e = tail_exponent(p)
    tail = _tail(terms, M, e, alpha, bool(np.all(xv == 0)))
    return TruncatedNorm(float(np.sum(terms)), int(M), tail, terms, table, e, not np.isfinite(tail), alpha)


def watanabe_bound(p) -> float:
    """Largest admissible ``alpha``: ``sum_j 1/(2 H*_j K*_j) - d/2``."""
    p = _as_sheet(p)
    return float(np.sum(1.0 / (2 * p.hstar * p.kstar)) - p.d / 2)


def watanabe_norm_truncated(x, t, p, alpha: float, M: int, quad_n: int = 16, grade: int = 40):
    """Truncated ``sum_m (1 + m)^alpha ||J_m L(x, t)||^2``.

    ``alpha`` beyond ``watanabe_bound(p)`` triggers a warning and sets
    ``diverges``; the computation still runs.
    """
    if alpha < 0:
        raise ParameterError("alpha must be >= 0")
    out = local_time_l2_truncated(x, t, p, M, quad_n, grade, alpha)
    bound = watanabe_bound(p)
    if alpha >= bound:
        warnings.warn(f"alpha={alpha:g} is not below the admissible bound {bound:g}")
        object.__setattr__(out, "diverges", True)
    return out


def q_decay_check(h: float, k: float, delta: float = 0.1, n_values=None, z_grid=None) -> float:
    """Largest ``c`` with ``Q(z)^n <= exp(-c n (1 - z)^{2H})`` on the grid.

    The bound is linear in ``n`` on the log scale, so the constant is
    ``min_z -log Q(z) / (1 - z)^{2H}`` whatever the ``n_values``.
    """
    if not 0 < delta < 0.5:
        raise ParameterError("delta must lie in (0, 0.5)")
    if z_grid is None:
        z_grid = np.linspace(1 - delta, 1, 1002)[1:-1]
    z = np.asarray(z_grid, dtype=float)
    if np.any((z <= 1 - delta) | (z >= 1)):
        raise ParameterError("z_grid must lie inside (1 - delta, 1)")
    q = q_function(z, h, k)
    c_z = -np.log(q) / (1 - z) ** (2 * h)
    if n_values is not None:
        n = np.asarray(n_values, dtype=float)
        lhs = np.outer(n, np.log(q))
        rhs = -np.outer(n, (1 - z) ** (2 * h)) * c_z.min()
        assert np.all(lhs <= rhs + 1e-12 * np.abs(rhs))
    return float(c_z.min())


# ------------------------------------------------------------ oracles

def zeroth_term_oracle(x: float, t: float, p: BifBmParams) -> float:
    """``(int_0^t p_{u^2HK}(x) du)^2`` by adaptive 1-D quadrature."""

    def f(u):
        v = u ** (2 * p.hk)
        return np.exp(-x * x / (2 * v)) / np.sqrt(2 * np.pi * v)

    val, err = integrate.quad(f, 0.0, t, limit=200, epsabs=0, epsrel=1e-13)
    return float(val * val)


def second_moment_oracle(x: float, t: float, p: BifBmParams, epsrel: float = 1e-9) -> float:
    """``E L(x, [0, t])^2 = int int phi_2((x, x); Sigma(u, v)) du dv`` by
    nested adaptive quadrature of the exact bivariate normal density
    (no chaos expansion involved). Uses symmetry to integrate ``v < u``."""

    def dens(v, u):
        a = u ** (2 * p.hk)
        b = v ** (2 * p.hk)
        c = float(_kernel(u, v, p.h, p.k))
        det = a * b - c * c
        if det <= 0:
            return 0.0
        q = x * x * (a + b - 2 * c) / det
        return np.exp(-0.5 * q) / (2 * np.pi * np.sqrt(det))

    def inner(u):
        return integrate.quad(dens, 0.0, u, args=(u,), limit=200, epsabs=0, epsrel=epsrel)[0]

    val = integrate.quad(inner, 0.0, t, limit=200, epsabs=0, epsrel=epsrel)[0]
    return float(2.0 * val)
