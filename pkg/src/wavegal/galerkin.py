"""Galerkin assembly and solve for the 1D elliptic interface problem.

Weak form: find u in the discrete space with
    int a u' v' = int f v - g_gamma v(gamma)   for all basis v,
where a and f may jump at the interface point gamma.  Quadrature is a
composite 10-node Gauss rule on each basis function's own cells, split
at gamma, so no quadrature cell straddles the coefficient jump.  Entry
(i, j) is integrated on the cells of the *finer* of the two functions;
dyadic nestedness guarantees the coarser function is a single
polynomial on every such cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .basis import EnrichedBasis
from .piecewise import gauss_rule

__all__ = [
    "InterfaceProblem",
    "ExactSolution",
    "LinearSystem",
    "DiscreteSolution",
    "SolverError",
    "assemble_stiffness",
    "assemble_load",
    "assemble",
    "solve",
    "condition_number",
    "evaluate_solution",
    "export_matrix_market",
]

QUAD_NODES = 10
CG_RTOL = 1e-12
DENSE_CUTOFF = 2000


class SolverError(RuntimeError):
    """Raised when an iterative solve or eigenvalue estimate fails."""


@dataclass(frozen=True)
class ExactSolution:
    """Closed forms for u and u' on the two subdomains."""

    u_minus: Callable
    u_plus: Callable
    du_minus: Callable
    du_plus: Callable


def _piecewise_call(fm: Callable, fp: Callable, gamma: float, x: np.ndarray) -> np.ndarray:
    """Evaluate fm on x < gamma and fp on x >= gamma without mixing domains."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    neg = x < gamma
    if neg.any():
        out[neg] = fm(x[neg])
    if (~neg).any():
        out[~neg] = fp(x[~neg])
    return out


@dataclass(frozen=True)
class InterfaceProblem:
    """Data of -(a u')' = f - g_gamma * delta_gamma on (0,1), u(0)=u(1)=0."""

    gamma: float
    a_minus: Callable
    a_plus: Callable
    f_minus: Callable
    f_plus: Callable
    g_gamma: float = 0.0
    exact: ExactSolution | None = None
    name: str = ""

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"interface point {self.gamma} must lie in (0, 1)")
        # positivity spot check on a dense grid per subdomain
        xm = np.linspace(0.0, self.gamma, 513)[:-1]
        xp = np.linspace(self.gamma, 1.0, 513)[1:]
        am = np.asarray(self.a_minus(xm), dtype=float)
        ap = np.asarray(self.a_plus(xp), dtype=float)
        lo = min(am.min() if am.ndim else float(am), ap.min() if ap.ndim else float(ap))
        if not lo > 0.0:
            raise ValueError(f"diffusion coefficient not positive (min sample {lo})")

    def a(self, x):
        return _piecewise_call(self.a_minus, self.a_plus, self.gamma, x)

    def f(self, x):
        return _piecewise_call(self.f_minus, self.f_plus, self.gamma, x)

    def u(self, x):
        if self.exact is None:
            raise ValueError("problem has no exact solution")
        return _piecewise_call(self.exact.u_minus, self.exact.u_plus, self.gamma, x)

    def du(self, x):
        if self.exact is None:
            raise ValueError("problem has no exact solution")
        return _piecewise_call(self.exact.du_minus, self.exact.du_plus, self.gamma, x)


@dataclass
class LinearSystem:
    A: scipy.sparse.csr_matrix
    b: np.ndarray
    basis: EnrichedBasis


@dataclass
class DiscreteSolution:
    coefficients: np.ndarray
    basis: EnrichedBasis

    def __post_init__(self):
        if len(self.coefficients) != len(self.basis):
            raise ValueError("coefficient count does not match basis size")


class _Cache:
    """Per-basis-function quadrature data on its own cells (split at gamma)."""

    __slots__ = ("x", "w", "vals", "dvals", "a_vals", "f_vals", "deriv")

    def __init__(self, bf, problem):
        breaks = [float(b) for b in bf.primal.breakpoints]
        g = problem.gamma if problem is not None else None
        if g is not None and breaks[0] < g < breaks[-1] and g not in breaks:
            import bisect

            breaks.insert(bisect.bisect_left(breaks, g), g)
        breaks = np.asarray(breaks)
        xs, ws = gauss_rule(QUAD_NODES)
        lo, h = breaks[:-1], np.diff(breaks)
        self.x = (lo[:, None] + h[:, None] * xs[None, :]).ravel()
        self.w = (h[:, None] * ws[None, :]).ravel()
        self.deriv = bf.primal.derivative()
        self.vals = bf.primal.evaluate_array(self.x)
        self.dvals = self.deriv.evaluate_array(self.x)
        if problem is not None:
            self.a_vals = problem.a(self.x)
            self.f_vals = problem.f(self.x)


def _resolution(bf) -> int:
    """Cell-grid fineness: wavelets at level j live on the level j+1 grid."""
    return bf.j + (1 if bf.kind.startswith("wavelet") else 0)


def _overlap_pairs(basis):
    lo = np.array([float(bf.support.lo) for bf in basis])
    hi = np.array([float(bf.support.hi) for bf in basis])
    inter = (lo[:, None] < hi[None, :]) & (lo[None, :] < hi[:, None])
    ii, jj = np.nonzero(np.triu(inter))
    return ii, jj, lo, hi


def assemble_stiffness(basis: EnrichedBasis, problem: InterfaceProblem) -> scipy.sparse.csr_matrix:
    """Stiffness matrix A[i,j] = int a eta_i' eta_j', split at the interface."""
    n = len(basis)
    caches = [_Cache(bf, problem) for bf in basis]
    res = [_resolution(bf) for bf in basis]
    ii, jj, lo, hi = _overlap_pairs(basis)
    rows, cols, data = [], [], []
    for i, j in zip(ii, jj):
        own, other = (i, j) if res[i] >= res[j] else (j, i)
        c = caches[own]
        if i == j:
            v = float(np.dot(c.w, c.a_vals * c.dvals * c.dvals))
        else:
            a_ = max(lo[i], lo[j])
            b_ = min(hi[i], hi[j])
            s = np.searchsorted(c.x, [a_, b_])
            sl = slice(s[0], s[1])
            od = caches[other].deriv.evaluate_array(c.x[sl])
            v = float(np.dot(c.w[sl], c.a_vals[sl] * c.dvals[sl] * od))
        rows.append(i)
        cols.append(j)
        data.append(v)
        if i != j:
            rows.append(j)
            cols.append(i)
            data.append(v)
    A = scipy.sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    return A


def assemble_load(basis: EnrichedBasis, problem: InterfaceProblem) -> np.ndarray:
    """Load vector b[i] = int f eta_i - g_gamma eta_i(gamma)."""
    b = np.zeros(len(basis))
    for i, bf in enumerate(basis):
        c = _Cache(bf, problem)
        b[i] = float(np.dot(c.w, c.f_vals * c.vals))
        if problem.g_gamma != 0.0 and bf.support.contains(problem.gamma):
            b[i] -= problem.g_gamma * bf.primal(problem.gamma)
    return b


def assemble(basis: EnrichedBasis, problem: InterfaceProblem) -> LinearSystem:
    return LinearSystem(assemble_stiffness(basis, problem), assemble_load(basis, problem), basis)


def _cg_jacobi(A, b, rtol=CG_RTOL):
    """Conjugate gradients on the Jacobi-scaled system, hand-rolled so the
    iteration and its stopping rule are fully deterministic."""
    n = len(b)
    d = A.diagonal()
    if np.any(d <= 0):
        raise SolverError("non-positive diagonal entry; matrix is not SPD")
    s = 1.0 / np.sqrt(d)
    As = scipy.sparse.diags(s) @ A @ scipy.sparse.diags(s)
    bs = s * b
    bnorm = np.linalg.norm(bs)
    if bnorm == 0.0:
        return np.zeros(n)
    y = np.zeros(n)
    r = bs.copy()
    p = r.copy()
    rs = float(r @ r)
    maxiter = 50 * n
    for _ in range(maxiter):
        if np.sqrt(rs) <= rtol * bnorm:
            return s * y
        Ap = As @ p
        alpha = rs / float(p @ Ap)
        y += alpha * p
        r -= alpha * Ap
        rs_new = float(r @ r)
        p = r + (rs_new / rs) * p
        rs = rs_new
    if np.sqrt(rs) <= rtol * bnorm:
        return s * y
    raise SolverError(
        f"CG did not converge in {maxiter} iterations "
        f"(relative residual {np.sqrt(rs) / bnorm:.3e})"
    )


def solve(system: LinearSystem, method: str = "auto") -> DiscreteSolution:
    """Solve A c = b.  method: 'auto', 'cholesky', 'cg', or 'dense'."""
    A, b = system.A, system.b
    n = len(b)
    if method == "auto":
        method = "cholesky" if n < DENSE_CUTOFF else "cg"
    if method == "cholesky":
        try:
            cf = scipy.linalg.cho_factor(A.toarray())
        except scipy.linalg.LinAlgError as e:
            raise SolverError(f"Cholesky factorization failed: {e}") from e
        c = scipy.linalg.cho_solve(cf, b)
    elif method == "dense":
        c = np.linalg.solve(A.toarray(), b)
    elif method == "cg":
        c = _cg_jacobi(A, b)
    else:
        raise ValueError(f"unknown solve method {method!r}")
    return DiscreteSolution(np.asarray(c, dtype=float), system.basis)


def condition_number(A, tol: float = 1e-4) -> float:
    """kappa = lambda_max / lambda_min of an SPD matrix.

    Small matrices use a direct symmetric eigensolve; larger ones use
    Lanczos with a deterministic start vector (largest eigenvalue
    directly, smallest via shift-invert at zero).
    """
    n = A.shape[0]
    if n <= 3:
        w = np.linalg.eigvalsh(np.asarray(A.todense() if scipy.sparse.issparse(A) else A))
        return float(w[-1] / w[0])
    As = scipy.sparse.csc_matrix(A)
    v0 = np.ones(n) / np.sqrt(n)
    try:
        lmax = scipy.sparse.linalg.eigsh(
            As, k=1, which="LA", tol=tol, v0=v0, return_eigenvectors=False
        )[0]
        lmin = scipy.sparse.linalg.eigsh(
            As, k=1, sigma=0.0, which="LM", tol=tol, v0=v0, return_eigenvectors=False
        )[0]
    except Exception as e:  # scipy raises several unrelated types here
        raise SolverError(f"eigenvalue estimation failed: {e}") from e
    if lmin <= 0 or not np.isfinite(lmin) or not np.isfinite(lmax):
        raise SolverError(f"bad extreme eigenvalues ({lmin}, {lmax})")
    return float(lmax / lmin)


def evaluate_solution(sol: DiscreteSolution, grid) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise values and derivative values of u_J = sum c_i eta_i."""
    x = np.asarray(grid, dtype=float)
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise ValueError("evaluation grid must lie in [0, 1]")
    order = np.argsort(x, kind="stable")
    xs = x[order]
    vals = np.zeros_like(xs)
    dvals = np.zeros_like(xs)
    for c, bf in zip(sol.coefficients, sol.basis):
        if c == 0.0:
            continue
        a_, b_ = float(bf.support.lo), float(bf.support.hi)
        i0 = np.searchsorted(xs, a_, side="left")
        i1 = np.searchsorted(xs, b_, side="right")
        if i0 == i1:
            continue
        pts = xs[i0:i1]
        vals[i0:i1] += c * bf.primal.evaluate_array(pts)
        dvals[i0:i1] += c * bf.primal.derivative().evaluate_array(pts)
    out_v = np.empty_like(vals)
    out_d = np.empty_like(dvals)
    out_v[order] = vals
    out_d[order] = dvals
    return out_v, out_d


def export_matrix_market(obj, path) -> None:
    """Write a matrix (symmetric coordinate format) or vector to disk."""
    if scipy.sparse.issparse(obj):
        scipy.io.mmwrite(path, obj.tocoo(), symmetry="symmetric")
    else:
        arr = np.asarray(obj)
        scipy.io.mmwrite(path, scipy.sparse.coo_matrix(arr.reshape(-1, 1)))
