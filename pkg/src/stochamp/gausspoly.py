"""Exact algebra for phase-space functions of the form polynomial x Gaussian.

A :class:`GaussPolyState` over ``m`` modes is the function

    f(v) = sum_e c_e * prod_i v_i**e_i * exp(-(v - mean)^T A (v - mean))

with variables ordered ``(x1, p1, ..., xm, pm)``.  Products, linear changes
of variables and (partial) integrals all stay inside this family, so the
whole amplifier pipeline can be propagated without any grid or truncation.

Units are fixed to hbar = kappa = 1 throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

HBAR = 1.0
KAPPA = 1.0

# relative pruning threshold applied after multiply/substitute
PRUNE_REL = 1e-14

Monomial = tuple[int, ...]
Poly = dict[Monomial, float]


class GaussPolyError(ValueError):
    """Raised for malformed states or invalid operations on them."""


# ---------------------------------------------------------------------------
# sparse polynomial helpers
# ---------------------------------------------------------------------------


def _prune(poly: Mapping[Monomial, float], rel: float = PRUNE_REL) -> Poly:
    if not poly:
        return {}
    top = max(abs(c) for c in poly.values())
    if top == 0.0:
        return {}
    cut = rel * top
    return {e: c for e, c in poly.items() if abs(c) > cut}


def _prune_matrix(A: np.ndarray, rel: float = PRUNE_REL) -> np.ndarray:
    top = np.max(np.abs(A), initial=0.0)
    return np.where(np.abs(A) > rel * top, A, 0.0)


def poly_add(a: Mapping[Monomial, float], b: Mapping[Monomial, float], scale: float = 1.0) -> Poly:
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0.0) + scale * c
    return out


def poly_mul(a: Mapping[Monomial, float], b: Mapping[Monomial, float]) -> Poly:
    out: Poly = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(i + j for i, j in zip(ea, eb))
            out[e] = out.get(e, 0.0) + ca * cb
    return out


def poly_degree(poly: Mapping[Monomial, float]) -> int:
    return max((sum(e) for e in poly), default=0)


def _affine_substitute(
    poly: Mapping[Monomial, float], L: np.ndarray, shift: np.ndarray | None = None
) -> Poly:
    """Rewrite ``poly(u)`` with ``u = L @ w + shift`` as a polynomial in ``w``."""
    n_old, n_new = L.shape
    if shift is None:
        shift = np.zeros(n_old)
    zero = (0,) * n_new
    forms: list[Poly] = []
    for i in range(n_old):
        form: Poly = {}
        for j in range(n_new):
            if L[i, j] != 0.0:
                e = [0] * n_new
                e[j] = 1
                form[tuple(e)] = float(L[i, j])
        if shift[i] != 0.0:
            form[zero] = float(shift[i])
        forms.append(form)

    # powers[i][k] = forms[i] ** k, built lazily
    powers: list[list[Poly]] = [[{zero: 1.0}] for _ in range(n_old)]

    def power(i: int, k: int) -> Poly:
        cache = powers[i]
        while len(cache) <= k:
            cache.append(poly_mul(cache[-1], forms[i]))
        return cache[k]

    out: Poly = {}
    for e, c in poly.items():
        term: Poly = {zero: c}
        for i, k in enumerate(e):
            if k:
                term = poly_mul(term, power(i, k))
        for ee, cc in term.items():
            out[ee] = out.get(ee, 0.0) + cc
    return out


# ---------------------------------------------------------------------------
# Gaussian moments
# ---------------------------------------------------------------------------


def _moments_1d(mu: float, var: float, kmax: int) -> list[float]:
    m = [1.0, mu]
    for k in range(2, kmax + 1):
        m.append(mu * m[k - 1] + (k - 1) * var * m[k - 2])
    return m[: kmax + 1]


class _MomentTable:
    """Raw moments E[prod v_i^e_i] for v ~ N(mean, cov)."""

    def __init__(self, mean: np.ndarray, cov: np.ndarray, max_degree: Iterable[int]):
        self.mean = mean
        self.cov = cov
        self.n = len(mean)
        off = cov - np.diag(np.diag(cov))
        self.diagonal = not np.any(np.abs(off) > 1e-15 * np.max(np.abs(cov)))
        if self.diagonal:
            self.tables = [
                _moments_1d(float(mean[i]), float(cov[i, i]), k)
                for i, k in enumerate(max_degree)
            ]
        self._memo: dict[Monomial, float] = {(0,) * self.n: 1.0}

    def __call__(self, e: Monomial) -> float:
        if self.diagonal:
            val = 1.0
            for i, k in enumerate(e):
                if k:
                    val *= self.tables[i][k]
            return val
        return self._general(e)

    def _general(self, e: Monomial) -> float:
        # E[v_i v^f] = mu_i E[v^f] + sum_j cov_ij f_j E[v^(f - 1_j)]
        memo = self._memo
        if e in memo:
            return memo[e]
        i = next(k for k, x in enumerate(e) if x)
        f = list(e)
        f[i] -= 1
        val = self.mean[i] * self._general(tuple(f)) if self.mean[i] != 0.0 else 0.0
        for j, fj in enumerate(f):
            if fj and self.cov[i, j] != 0.0:
                g = list(f)
                g[j] -= 1
                val += self.cov[i, j] * fj * self._general(tuple(g))
        memo[e] = float(val)
        return memo[e]


def _gaussian_weight(A: np.ndarray) -> float:
    """int exp(-y^T A y) dy."""
    n = A.shape[0]
    return math.sqrt(math.pi**n / np.linalg.det(A))


def _check_pd(A: np.ndarray) -> None:
    if A.size and np.linalg.eigvalsh(A).min() <= 0.0:
        raise GaussPolyError("precision matrix is not positive definite")


# ---------------------------------------------------------------------------
# the state type
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaussPolyState:
    """Polynomial times Gaussian envelope over ``2 * modes`` quadratures.

    The envelope is ``exp(-(v - mean)^T precision (v - mean))``.  The
    precision may be only semidefinite for intermediate factors (e.g. a
    state embedded into a larger space), but every integral requires it to
    be positive definite.
    """

    modes: int
    poly: Mapping[Monomial, float]
    mean: np.ndarray
    precision: np.ndarray

    def __post_init__(self) -> None:
        n = 2 * self.modes
        if self.modes < 1:
            raise GaussPolyError("need at least one mode")
        mean = np.array(self.mean, dtype=float).reshape(-1)
        prec = np.array(self.precision, dtype=float)
        if mean.shape != (n,) or prec.shape != (n, n):
            raise GaussPolyError(f"mean/precision shape does not match {self.modes} modes")
        if np.max(np.abs(prec - prec.T), initial=0.0) > 1e-12:
            raise GaussPolyError("precision matrix must be symmetric")
        for e in self.poly:
            if len(e) != n:
                raise GaussPolyError(f"monomial {e} has wrong arity for {n} variables")
        mean.setflags(write=False)
        prec = 0.5 * (prec + prec.T)
        prec.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "precision", prec)
        object.__setattr__(self, "poly", dict(self.poly))

    @property
    def nvars(self) -> int:
        return 2 * self.modes

    @property
    def degree(self) -> int:
        return poly_degree(self.poly)

    def scaled(self, factor: float) -> "GaussPolyState":
        return GaussPolyState(
            self.modes, {e: factor * c for e, c in self.poly.items()}, self.mean, self.precision
        )

    def __repr__(self) -> str:
        return (
            f"GaussPolyState(modes={self.modes}, terms={len(self.poly)}, "
            f"degree={self.degree}, mean={np.round(self.mean, 6).tolist()})"
        )


def constant(modes: int, value: float = 1.0) -> GaussPolyState:
    """The constant function ``value`` (zero precision)."""
    n = 2 * modes
    return GaussPolyState(modes, {(0,) * n: value}, np.zeros(n), np.zeros((n, n)))


def tensor(a: GaussPolyState, b: GaussPolyState) -> GaussPolyState:
    """Product state a(v_a) * b(v_b) over the concatenated variables."""
    na, nb = a.nvars, b.nvars
    poly: Poly = {}
    for ea, ca in a.poly.items():
        for eb, cb in b.poly.items():
            poly[ea + eb] = poly.get(ea + eb, 0.0) + ca * cb
    prec = np.zeros((na + nb, na + nb))
    prec[:na, :na] = a.precision
    prec[na:, na:] = b.precision
    return GaussPolyState(a.modes + b.modes, _prune(poly), np.concatenate([a.mean, b.mean]), prec)


def multiply(a: GaussPolyState, b: GaussPolyState) -> GaussPolyState:
    """Pointwise product; the two envelopes are merged by completing the square."""
    if a.modes != b.modes:
        raise GaussPolyError(f"mode mismatch: {a.modes} vs {b.modes}")
    A, B = a.precision, b.precision
    C = A + B
    h = A @ a.mean + B @ b.mean
    mu = np.linalg.lstsq(C, h, rcond=None)[0] if C.any() else np.zeros(a.nvars)
    log_const = float(mu @ C @ mu - a.mean @ A @ a.mean - b.mean @ B @ b.mean)
    poly = poly_mul(a.poly, b.poly)
    if log_const != 0.0:
        k = math.exp(log_const)
        poly = {e: k * c for e, c in poly.items()}
    return GaussPolyState(a.modes, _prune(poly), mu, _prune_matrix(C))


def substitute_linear(s: GaussPolyState, L: np.ndarray) -> GaussPolyState:
    """Return the state ``v -> s(L v)``."""
    L = np.asarray(L, dtype=float)
    n = s.nvars
    if L.shape != (n, n):
        raise GaussPolyError(f"expected a {n}x{n} matrix, got {L.shape}")
    if abs(np.linalg.det(L)) < 1e-12:
        raise GaussPolyError("substitution matrix is singular")
    poly = _affine_substitute(s.poly, L)
    mean = np.linalg.solve(L, s.mean)
    prec = _prune_matrix(L.T @ s.precision @ L)
    return GaussPolyState(s.modes, _prune(poly), mean, prec)


def moment(s: GaussPolyState, exponents: Monomial) -> float:
    """``int prod v_i**e_i * s(v) dv`` over all variables."""
    exponents = tuple(exponents)
    if len(exponents) != s.nvars:
        raise GaussPolyError("exponent tuple has the wrong length")
    _check_pd(s.precision)
    cov = 0.5 * np.linalg.inv(s.precision)
    maxdeg = [0] * s.nvars
    for e in s.poly:
        for i, k in enumerate(e):
            maxdeg[i] = max(maxdeg[i], k + exponents[i])
    table = _MomentTable(s.mean, cov, maxdeg)
    total = 0.0
    for e, c in s.poly.items():
        total += c * table(tuple(i + j for i, j in zip(e, exponents)))
    return total * _gaussian_weight(s.precision)


def integrate_all(s: GaussPolyState) -> float:
    return moment(s, (0,) * s.nvars)


def _mode_indices(modes: Iterable[int]) -> list[int]:
    idx = []
    for m in sorted(modes):
        idx += [2 * (m - 1), 2 * (m - 1) + 1]
    return idx


def integrate_modes(s: GaussPolyState, keep: Iterable[int]) -> GaussPolyState:
    """Integrate out every mode not in ``keep`` (modes are numbered from 1).

    The quadratic form is block-decomposed; completing the square in the
    integrated block leaves the Schur complement as the new precision.
    """
    keep = sorted(set(keep))
    if not keep or len(keep) >= s.modes or keep[0] < 1 or keep[-1] > s.modes:
        raise GaussPolyError(f"keep must be a strict non-empty subset of 1..{s.modes}")
    k = _mode_indices(keep)
    d = [i for i in range(s.nvars) if i not in k]
    A = s.precision
    Akk, Akd, Add = A[np.ix_(k, k)], A[np.ix_(k, d)], A[np.ix_(d, d)]
    _check_pd(Add)
    M = np.linalg.solve(Add, Akd.T)  # Add^-1 Adk
    mu_k, mu_d = s.mean[k], s.mean[d]
    nk, nd = len(k), len(d)

    # v_k = w_k ; v_d = z + mu_d + M mu_k - M w_k   with new variables (w_k, z)
    L = np.zeros((s.nvars, nk + nd))
    shift = np.zeros(s.nvars)
    for a, i in enumerate(k):
        L[i, a] = 1.0
    for b, i in enumerate(d):
        L[i, nk + b] = 1.0
        L[i, :nk] = -M[b]
        shift[i] = mu_d[b] + M[b] @ mu_k
    poly = _affine_substitute(s.poly, L, shift)

    cov_d = 0.5 * np.linalg.inv(Add)
    maxdeg = [0] * nd
    for e in poly:
        for b in range(nd):
            maxdeg[b] = max(maxdeg[b], e[nk + b])
    table = _MomentTable(np.zeros(nd), cov_d, maxdeg)
    weight = _gaussian_weight(Add)
    reduced: Poly = {}
    for e, c in poly.items():
        m = table(e[nk:])
        if m != 0.0:
            reduced[e[:nk]] = reduced.get(e[:nk], 0.0) + c * m * weight
    schur = Akk - Akd @ M
    return GaussPolyState(len(keep), _prune(reduced), mu_k, schur)


def evaluate(s: GaussPolyState, v) -> np.ndarray | float:
    """Pointwise value; ``v`` may carry leading batch dimensions."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1:] != (s.nvars,):
        raise GaussPolyError(f"expected points with {s.nvars} coordinates, got shape {v.shape}")
    y = v - s.mean
    quad = np.einsum("...i,ij,...j->...", y, s.precision, y)
    out = _poly_values(s.poly, v) * np.exp(-quad)
    return float(out) if out.ndim == 0 else out


def _poly_values(poly: Mapping[Monomial, float], v: np.ndarray) -> np.ndarray:
    val = np.zeros(v.shape[:-1])
    for e, c in poly.items():
        term = np.full(v.shape[:-1], c)
        for i, k in enumerate(e):
            if k:
                term = term * v[..., i] ** k
        val = val + term
    return val


def integrate_product(a: GaussPolyState, b: GaussPolyState) -> float:
    """``int a(v) b(v) dv`` without forming the product polynomial.

    The product is a polynomial of known degree times one Gaussian, so tensor
    Gauss-Hermite quadrature with enough nodes is exact.  Evaluating the two
    factors at the nodes avoids the cancellation that moments of a
    high-degree product suffer from.
    """
    if a.nvars != b.nvars:
        raise GaussPolyError("integrate_product needs equal variable counts")
    A = a.precision + b.precision
    _check_pd(A)
    rhs = a.precision @ a.mean + b.precision @ b.mean
    m = np.linalg.solve(A, rhs)
    c = float(a.mean @ a.precision @ a.mean + b.mean @ b.precision @ b.mean - m @ A @ m)
    U = np.linalg.cholesky(A).T  # A = U^T U
    nodes, weights = np.polynomial.hermite.hermgauss((a.degree + b.degree) // 2 + 1)
    n = a.nvars
    Y = np.stack(np.meshgrid(*([nodes] * n), indexing="ij"), axis=-1).reshape(-1, n)
    w = np.prod(np.stack(np.meshgrid(*([weights] * n), indexing="ij"), axis=-1).reshape(-1, n), axis=1)
    V = m + np.linalg.solve(U, Y.T).T
    total = float(np.sum(w * _poly_values(a.poly, V) * _poly_values(b.poly, V)))
    return total * math.exp(-c) / float(np.prod(np.diag(U)))


def coefficients_close(a: GaussPolyState, b: GaussPolyState, atol: float = 1e-10) -> bool:
    """Coefficient-wise comparison of two states sharing an envelope."""
    if a.modes != b.modes:
        return False
    if not (np.allclose(a.mean, b.mean, atol=atol) and np.allclose(a.precision, b.precision, atol=atol)):
        return False
    keys = set(a.poly) | set(b.poly)
    return all(abs(a.poly.get(e, 0.0) - b.poly.get(e, 0.0)) <= atol for e in keys)
