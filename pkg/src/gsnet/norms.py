"""Norms on the coefficient space and the induced comass / mass pair.

The coefficient space R^m carries the one-parameter family of norms

    psi_alpha(h) = (sum_j |h_j|^(1/alpha))^alpha     for alpha in (0, 1],
    psi_0(h)     = max_j |h_j|                        for alpha = 0,

i.e. the l_p norm with p = 1/alpha (p = inf at alpha = 0).  For a sum of
distinct basis vectors e_I this gives psi_alpha(e_I) = |I|^alpha, the
per-length cost of moving |I| unit masses down a shared pipe.

A vector-valued covector is an m x d real matrix whose rows are classical
covectors; its comass is sup{psi*(W tau) : |tau|_2 <= 1}.  The pre-dual
mass norm on m x d matrices is NP-hard-looking in general, so
``mass_norm_bounds`` returns a certified interval instead: the upper bound
ranges over decompositions v = sum_I e_I (x) r_I grouping equal rows, the
lower bound over explicit dual forms of certified comass at most one.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

_SIGN_ENUM_CAP = 20  # 2^(m-1) sign vectors; refuse beyond this


@dataclass(frozen=True)
class AlphaNorm:
    """The norm psi_alpha on a coefficient space of dimension ``coeff_dim``."""

    alpha: float
    coeff_dim: int

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.coeff_dim < 1:
            raise ValueError("coeff_dim must be a positive integer")

    def _check(self, h: np.ndarray) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        if h.shape[-1] != self.coeff_dim:
            raise ValueError(
                f"vector has dimension {h.shape[-1]}, expected {self.coeff_dim}"
            )
        return h

    def psi(self, h) -> np.ndarray | float:
        """psi_alpha of ``h``; broadcasts over leading axes."""
        a = np.abs(self._check(h))
        out = _lp(a, np.inf if self.alpha == 0.0 else 1.0 / self.alpha)
        return float(out) if out.ndim == 0 else out

    def psi_dual(self, w) -> np.ndarray | float:
        """Dual norm psi* = l_q with q = 1/(1 - alpha); broadcasts."""
        a = np.abs(self._check(w))
        out = _lp(a, np.inf if self.alpha == 1.0 else 1.0 / (1.0 - self.alpha))
        return float(out) if out.ndim == 0 else out


def _lp(a: np.ndarray, p: float) -> np.ndarray:
    """l_p norm over the last axis of nonnegative ``a``, scaled for stability."""
    if np.isinf(p):
        return a.max(axis=-1)
    if p == 1.0:
        return a.sum(axis=-1)
    m = a.max(axis=-1, keepdims=True)
    safe = np.where(m > 0.0, m, 1.0)
    s = ((a / safe) ** p).sum(axis=-1) ** (1.0 / p)
    return np.where(m[..., 0] > 0.0, s * safe[..., 0], 0.0)


def _as_matrix(omega, norm: AlphaNorm) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if w.ndim != 2:
        raise ValueError("expected an (m, d) matrix of covector rows")
    if w.shape[0] != norm.coeff_dim:
        raise ValueError(
            f"matrix has {w.shape[0]} rows, expected coeff_dim = {norm.coeff_dim}"
        )
    if not np.isfinite(w).all():
        raise ValueError("matrix entries must be finite")
    return w


def _sign_vectors(m: int) -> np.ndarray:
    """All sign vectors in {-1, +1}^m with first entry +1 (norm symmetry)."""
    if m > _SIGN_ENUM_CAP:
        raise ValueError(f"sign enumeration refused for m = {m} > {_SIGN_ENUM_CAP}")
    k = np.arange(2 ** (m - 1))[:, None]
    bits = (k >> np.arange(m - 1)) & 1
    return np.hstack([np.ones((len(k), 1)), 1.0 - 2.0 * bits])


def comass_is_exact(norm: AlphaNorm) -> bool:
    """True when a closed-form comass is available (alpha in {0, 1/2, 1})."""
    return norm.alpha in (0.0, 0.5, 1.0)


def comass(
    omega,
    norm: AlphaNorm,
    *,
    method: str = "auto",
    restarts: int = 32,
    iterations: int = 500,
    seed: int = 0,
) -> float:
    """Comass sup{psi*(W tau) : |tau|_2 <= 1} of the covector matrix ``omega``.

    Closed forms are used for alpha in {0, 1/2, 1} (sign enumeration,
    spectral norm, max row norm).  For other alpha, projected gradient
    ascent on the unit sphere with random restarts returns the best value
    found, a certified lower bound of the true comass; use
    ``comass_is_exact`` to tell the cases apart.
    """
    w = _as_matrix(omega, norm)
    if not w.any():
        return 0.0
    if method == "auto" and comass_is_exact(norm):
        if norm.alpha == 0.5:
            return float(np.linalg.svd(w, compute_uv=False)[0])
        if norm.alpha == 1.0:
            return float(np.linalg.norm(w, axis=1).max())
        combos = _sign_vectors(w.shape[0]) @ w
        return float(np.linalg.norm(combos, axis=1).max())
    if method not in ("auto", "ascent"):
        raise ValueError(f"unknown comass method {method!r}")
    return _comass_ascent(w, norm, restarts, iterations, seed)


def _dual_gradient(v: np.ndarray, norm: AlphaNorm) -> np.ndarray:
    """A (sub)gradient of psi* at v (any member of the subdifferential)."""
    nv = norm.psi_dual(v)
    if nv == 0.0:
        return np.zeros_like(v)
    if norm.alpha == 1.0:  # q = inf
        g = np.zeros_like(v)
        k = int(np.argmax(np.abs(v)))
        g[k] = np.sign(v[k])
        return g
    q = 1.0 if norm.alpha == 0.0 else 1.0 / (1.0 - norm.alpha)
    if q == 1.0:
        return np.sign(v)
    return np.sign(v) * (np.abs(v) / nv) ** (q - 1.0)


def _comass_ascent(
    w: np.ndarray, norm: AlphaNorm, restarts: int, iterations: int, seed: int
) -> float:
    rng = np.random.default_rng(seed)
    m, d = w.shape
    starts = [v / np.linalg.norm(v) for v in w if np.linalg.norm(v) > 0]
    _, _, vt = np.linalg.svd(w)
    starts.append(vt[0])
    while len(starts) < restarts:
        v = rng.standard_normal(d)
        starts.append(v / np.linalg.norm(v))
    best = 0.0
    for tau in starts:
        tau = np.array(tau, dtype=float)
        f = float(norm.psi_dual(w @ tau))
        step = 0.5
        for _ in range(iterations):
            grad = w.T @ _dual_gradient(w @ tau, norm)
            cand = tau + step * grad
            nc = np.linalg.norm(cand)
            if nc == 0.0:
                break
            cand /= nc
            fc = float(norm.psi_dual(w @ cand))
            if fc > f:
                tau, f = cand, fc
                step = min(step * 1.5, 10.0)
            else:
                step *= 0.5
                if step < 1e-14:
                    break
        best = max(best, f)
    return best


def comass_upper(omega, norm: AlphaNorm) -> float:
    """A certified upper bound of the comass, valid for every alpha.

    Uses the exact value when available, otherwise the cheapest of the
    l_q <= l_1, l_q <= m^(1/q-1/2) l_2 and l_q <= m^(1/q) l_inf embeddings
    applied to the exactly computable alpha in {0, 1/2, 1} comasses.
    """
    w = _as_matrix(omega, norm)
    if not w.any():
        return 0.0
    if comass_is_exact(norm):
        return comass(w, norm)
    m = w.shape[0]
    q = 1.0 / (1.0 - norm.alpha)
    if m <= _SIGN_ENUM_CAP:
        c0 = float(np.linalg.norm(_sign_vectors(m) @ w, axis=1).max())
    else:
        c0 = float(np.linalg.norm(w, axis=1).sum())
    sigma = float(np.linalg.svd(w, compute_uv=False)[0])
    maxrow = float(np.linalg.norm(w, axis=1).max())
    return min(
        c0,
        sigma * m ** max(0.0, 1.0 / q - 0.5),
        maxrow * m ** (1.0 / q),
    )


class Bounds(NamedTuple):
    lo: float
    hi: float


def row_groups(v: np.ndarray, tol: float = 1e-9) -> list[list[int]]:
    """Indices of rows grouped by relative closeness within ``tol``.

    Rows i, l belong together when |r_i - r_l| / max(|r_i|, |r_l|, 1e-30)
    is at most tol; closeness is closed transitively (union-find).
    """
    m = v.shape[0]
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    norms = np.linalg.norm(v, axis=1)
    for i in range(m):
        for l in range(i + 1, m):
            denom = max(norms[i], norms[l], 1e-30)
            if np.linalg.norm(v[i] - v[l]) / denom <= tol:
                parent[find(l)] = find(i)
    groups: dict[int, list[int]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


@lru_cache(maxsize=None)
def index_partitions(m: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All set partitions of {0, ..., m-1}, each as a tuple of sorted blocks."""
    if m == 0:
        return ((),)
    result = []
    for rest in index_partitions(m - 1):
        last = m - 1
        result.append(rest + ((last,),))
        for k in range(len(rest)):
            grown = rest[:k] + (rest[k] + (last,),) + rest[k + 1 :]
            result.append(grown)
    return tuple(result)


def basis_sum(indices, coeff_dim: int) -> np.ndarray:
    """The multiplicity vector e_I = sum of basis vectors over ``indices``."""
    e = np.zeros(coeff_dim)
    e[list(indices)] = 1.0
    return e


def mass_norm_bounds(v, norm: AlphaNorm, tol: float = 1e-9) -> Bounds:
    """Certified interval [lo, hi] around the mass norm of the matrix ``v``.

    hi minimizes sum_I psi(e_I) |r_I| over partitions grouping rows that are
    equal within ``tol`` (the decomposition family used by the grouped
    energy density); by subadditivity of psi on disjoint index sets the
    minimum is attained by the maximal grouping.  lo is the best dual
    pairing <w, v> over candidate forms scaled to certified comass <= 1.
    """
    v = _as_matrix(v, norm)
    if not v.any():
        return Bounds(0.0, 0.0)
    hi = 0.0
    for group in row_groups(v, tol):
        r = float(np.linalg.norm(v[group], axis=1).max())
        if r > 0.0:
            hi += float(norm.psi(basis_sum(group, norm.coeff_dim))) * r
    lo = 0.0
    u, _, vt = np.linalg.svd(v, full_matrices=False)
    rownorms = np.linalg.norm(v, axis=1, keepdims=True)
    candidates = [v, u @ vt, np.where(rownorms > 0.0, v / np.where(rownorms > 0, rownorms, 1.0), 0.0)]
    for cand in candidates:
        cb = comass_upper(cand, norm)
        if cb > 0.0:
            lo = max(lo, float(np.tensordot(cand, v)) / cb)
    return Bounds(min(lo, hi), hi)
