"""Matrix-free Krylov solvers on arbitrarily shaped numpy fields."""

import logging
from typing import Callable, NamedTuple

import numpy as np
from scipy.sparse.linalg import LinearOperator as _ScipyOperator
from scipy.sparse.linalg import gmres as _scipy_gmres

from .exceptions import (BreakdownError, ConfigurationError, ConvergenceError, DimensionError,
                         SPDViolationError)

log = logging.getLogger(__name__)

_TINY = 1e-300


class LinearOperator:
    """A linear map from fields of ``shape`` to fields of the same shape."""

    def __init__(self, apply: Callable[[np.ndarray], np.ndarray], shape, name="operator"):
        self._apply = apply
        self.shape = tuple(shape)
        self.name = name

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != self.shape:
            raise DimensionError(f"{self.name}: expected shape {self.shape}, got {x.shape}")
        return self._apply(x)

    @property
    def size(self):
        return int(np.prod(self.shape))

    def to_dense(self):
        """Assemble the matrix column by column (small problems and tests only)."""
        n = self.size
        M = np.empty((n, n))
        e = np.zeros(n)
        for j in range(n):
            e[j] = 1.0
            M[:, j] = self(e.reshape(self.shape)).ravel()
            e[j] = 0.0
        return M


class SolveResult(NamedTuple):
    x: np.ndarray
    iterations: int
    residual: float


def inner(x, y, deterministic=False):
    """Euclidean inner product; ``deterministic`` forces a fixed pairwise order."""
    if deterministic:
        return float(np.add.reduce((x * y).ravel()))
    return float(np.vdot(x, y))


def _norm(x, deterministic):
    return np.sqrt(inner(x, x, deterministic))


def cg_solve(L, b, x0=None, rel_tol=1e-10, max_iter=None, deterministic=False,
             preconditioner=None):
    """Conjugate gradients for a symmetric positive definite operator.

    Stops when ``||b - L x|| <= rel_tol ||b||``.  Raises
    :class:`SPDViolationError` on non-positive curvature and
    :class:`ConvergenceError` after ``max_iter`` iterations.
    """
    b = np.asarray(b, dtype=float)
    bnorm = _norm(b, deterministic)
    if bnorm < _TINY:
        return SolveResult(np.zeros_like(b), 0, 0.0)
    max_iter = max_iter or 10 * b.size
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - L(x) if x0 is not None else b.copy()
    z = preconditioner(r) if preconditioner else r
    p = z.copy()
    rz = inner(r, z, deterministic)
    res = _norm(r, deterministic) / bnorm
    if res <= rel_tol:
        return SolveResult(x, 0, res)
    for it in range(1, max_iter + 1):
        Ap = L(p)
        pAp = inner(p, Ap, deterministic)
        if not pAp > 0.0:
            raise SPDViolationError("non-positive curvature in CG", it, res)
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        res = _norm(r, deterministic) / bnorm
        if res <= rel_tol:
            return SolveResult(x, it, res)
        z = preconditioner(r) if preconditioner else r
        rz_new = inner(r, z, deterministic)
        p *= rz_new / rz
        p += z
        rz = rz_new
    raise ConvergenceError("CG did not converge", max_iter, res)


def bicgstab_solve(L, b, x0=None, rel_tol=1e-10, max_iter=None, deterministic=False):
    """Stabilised bi-conjugate gradients for general non-singular operators."""
    b = np.asarray(b, dtype=float)
    bnorm = _norm(b, deterministic)
    if bnorm < _TINY:
        return SolveResult(np.zeros_like(b), 0, 0.0)
    max_iter = max_iter or 10 * b.size
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - L(x) if x0 is not None else b.copy()
    res = _norm(r, deterministic) / bnorm
    if res <= rel_tol:
        return SolveResult(x, 0, res)
    r_hat = r.copy()
    rho_old = alpha = omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    for it in range(1, max_iter + 1):
        rho = inner(r_hat, r, deterministic)
        if abs(rho) < 1e-30 * bnorm**2:
            raise BreakdownError("BiCGSTAB: rho vanished", it, res)
        beta = (rho / rho_old) * (alpha / omega)
        p = r + beta * (p - omega * v)
        v = L(p)
        denom = inner(r_hat, v, deterministic)
        if abs(denom) < 1e-30 * bnorm**2:
            raise BreakdownError("BiCGSTAB: <r_hat, v> vanished", it, res)
        alpha = rho / denom
        s = r - alpha * v
        snorm = _norm(s, deterministic) / bnorm
        if snorm <= rel_tol:
            x += alpha * p
            return SolveResult(x, it, snorm)
        t = L(s)
        tt = inner(t, t, deterministic)
        if tt < _TINY:
            raise BreakdownError("BiCGSTAB: L s vanished", it, res)
        omega = inner(t, s, deterministic) / tt
        x += alpha * p + omega * s
        r = s - omega * t
        res = _norm(r, deterministic) / bnorm
        if res <= rel_tol:
            return SolveResult(x, it, res)
        if omega == 0.0:
            raise BreakdownError("BiCGSTAB: omega vanished", it, res)
        rho_old = rho
    raise ConvergenceError("BiCGSTAB did not converge", max_iter, res)


def gmres_solve(L, b, x0=None, rel_tol=1e-10, max_iter=None, restart=40):
    """Restarted GMRES (scipy) used as a fallback after BiCGSTAB breakdown."""
    b = np.asarray(b, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm < _TINY:
        return SolveResult(np.zeros_like(b), 0, 0.0)
    n = b.size
    op = _ScipyOperator((n, n), matvec=lambda y: L(y.reshape(b.shape)).ravel(), dtype=float)
    counter = {"n": 0}

    def _count(_):
        counter["n"] += 1

    x, info = _scipy_gmres(op, b.ravel(), x0=None if x0 is None else np.ravel(x0),
                           rtol=rel_tol, atol=0.0, restart=restart,
                           maxiter=max(1, (max_iter or 10 * n) // restart),
                           callback=_count, callback_type="pr_norm")
    x = x.reshape(b.shape)
    res = np.linalg.norm(b - L(x)) / bnorm
    if info != 0 and res > rel_tol:
        raise ConvergenceError("GMRES did not converge", counter["n"], res)
    return SolveResult(x, counter["n"], res)


def solve_general(L, b, x0=None, rel_tol=1e-10, max_iter=None, deterministic=False):
    """BiCGSTAB with a restarted-GMRES fallback on breakdown or stagnation."""
    try:
        return bicgstab_solve(L, b, x0, rel_tol, max_iter, deterministic)
    except (BreakdownError, ConvergenceError) as exc:
        log.info("falling back to GMRES after: %s", exc)
        return gmres_solve(L, b, x0, rel_tol, max_iter)


def symmetry_defect(L, n_probes=3, seed=0):
    """Largest relative |<Lx, y> - <x, Ly>| over random probe pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_probes):
        x = rng.standard_normal(L.shape)
        y = rng.standard_normal(L.shape)
        Lx, Ly = L(x), L(y)
        a, c = np.vdot(Lx, y), np.vdot(x, Ly)
        scale = max(np.linalg.norm(Lx) * np.linalg.norm(y), np.linalg.norm(x) * np.linalg.norm(Ly),
                    _TINY)
        worst = max(worst, abs(a - c) / scale)
    return worst


def is_symmetric(L, tol=1e-12, n_probes=3, seed=0):
    return symmetry_defect(L, n_probes, seed) <= tol


class SolverConfig(NamedTuple):
    """Tolerance and iteration cap of one implicit stage.

    ``max_iter=None`` lets each stage pick a size-dependent default.
    """

    rel_tol: float = 1e-10
    max_iter: int = None
    deterministic: bool = False

    def validated(self):
        if not 0.0 < self.rel_tol < 1.0:
            raise ConfigurationError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.max_iter is not None and self.max_iter < 1:
            raise ConfigurationError("max_iter must be >= 1")
        return self


def solve_auto(L, b, x0=None, cfg=SolverConfig(), symmetric=None):
    """CG when ``L`` is symmetric (probed if ``symmetric`` is None), else BiCGSTAB/GMRES.

    The guess ``x0`` is handled by solving for the correction so that the
    relative tolerance refers to the residual of the initial guess, which
    matters when the update is a small fluctuation on top of a large field.
    """
    if symmetric is None:
        symmetric = is_symmetric(L)
    if x0 is None:
        x0 = np.zeros_like(b)
    r0 = b - L(x0)
    bnorm, rnorm = _norm(b, cfg.deterministic), _norm(r0, cfg.deterministic)
    if rnorm <= 1e-14 * bnorm or rnorm < _TINY:
        return SolveResult(np.array(x0, dtype=float), 0, rnorm / max(bnorm, _TINY))
    # floor so that we never chase round-off of the full field
    tol = max(cfg.rel_tol, 1e-14 * bnorm / rnorm)
    if symmetric:
        try:
            res = cg_solve(L, r0, None, tol, cfg.max_iter, cfg.deterministic)
        except SPDViolationError:
            log.info("%s: CG met negative curvature, switching to BiCGSTAB", L.name)
            res = solve_general(L, r0, None, tol, cfg.max_iter, cfg.deterministic)
    else:
        res = solve_general(L, r0, None, tol, cfg.max_iter, cfg.deterministic)
    return SolveResult(x0 + res.x, res.iterations, res.residual)
