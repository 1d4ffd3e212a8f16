"""
Non-negative least squares by the Lawson-Hanson active-set method.

Solves ``min ||F a - y||_2^2  subject to  a >= 0`` for a design matrix whose
columns are dictionary magnitude responses and a target magnitude spectrum.

References
----------
.. [1] C. L. Lawson and R. J. Hanson. Solving Least Squares Problems.
   Prentice-Hall, 1974, chapter 23.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NnlsConvergenceError, NnlsError


@dataclass
class NnlsSolution:
    activations: np.ndarray
    residual_norm: float
    iterations: int
    kkt_satisfied: bool
    unique: bool = True
    residual_history: list = field(default_factory=list)


def _check_inputs(F, y):
    F = np.asarray(F, dtype=float)
    y = np.asarray(y, dtype=float)
    if F.ndim != 2 or F.shape[0] < 1 or F.shape[1] < 1:
        raise ValueError("design must be a non-empty 2-D array")
    if y.shape != (F.shape[0],):
        raise ValueError(f"target has shape {y.shape}, expected ({F.shape[0]},)")
    if not (np.all(np.isfinite(F)) and np.all(np.isfinite(y))):
        raise NnlsError("NaN or Inf in NNLS inputs")
    return F, y


def kkt_check(F, y, a, tol):
    """True when ``a`` satisfies the NNLS optimality conditions to ``tol``."""
    grad = F.T @ (F @ a - y)
    pos = a > 0
    return bool(np.all(a >= 0) and np.all(np.abs(grad[pos]) <= tol) and np.all(grad[~pos] >= -tol))


def solve_nnls(F, y, tol=None, max_iter=None):
    """
    Lawson-Hanson NNLS.

    Parameters
    ----------
    F : array_like, shape (m, n)
    y : array_like, shape (m,)
    tol : float, optional
        Dual feasibility tolerance, default ``1e-10 * max|F^T y|``.
    max_iter : int, optional
        Limit on outer (column-entering) iterations, default ``3 * n``.

    Returns
    -------
    NnlsSolution

    Raises
    ------
    NnlsConvergenceError
        When ``max_iter`` is exceeded; ``err.best`` carries the last iterate.
    """
    F, y = _check_inputs(F, y)
    m, n = F.shape
    if max_iter is None:
        max_iter = 3 * n
    scale = np.max(np.abs(F.T @ y))
    if tol is None:
        tol = 1e-10 * scale if scale > 0 else np.finfo(float).tiny
    if tol <= 0:
        raise ValueError("tol must be positive")

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    blocked = np.zeros(n, dtype=bool)
    resid = y.copy()
    w = F.T @ resid
    history = [float(np.linalg.norm(resid))]
    unique = True
    it = 0

    while True:
        candidates = ~passive & ~blocked
        if not np.any(candidates) or np.max(np.where(candidates, w, -np.inf)) <= tol:
            break
        if it >= max_iter:
            best = NnlsSolution(x, history[-1], it, False, unique, history)
            raise NnlsConvergenceError(f"no convergence in {max_iter} iterations", best=best)
        it += 1
        j = int(np.argmax(np.where(candidates, w, -np.inf)))
        passive[j] = True

        first = True
        while True:
            idx = np.flatnonzero(passive)
            sub = F[:, idx]
            z_sub, _, rank, _ = np.linalg.lstsq(sub, y, rcond=None)
            if rank < len(idx):
                unique = False
            z = np.zeros(n)
            z[idx] = z_sub
            if np.all(z_sub > 0):
                x = z
                break
            if first and z[j] <= 0:
                # entering column cannot move off zero (roundoff); freeze it until x changes
                passive[j] = False
                blocked[j] = True
                break
            first = False
            neg = idx[z_sub <= 0]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = x[neg] / (x[neg] - z[neg])
            alpha = np.min(ratios)
            x = x + alpha * (z - x)
            drop = passive & (x <= np.finfo(float).eps * np.max(np.abs(x), initial=1.0))
            x[drop] = 0.0
            passive &= ~drop
            if not np.any(passive):
                break

        if not blocked[j]:
            blocked[:] = False
        resid = y - F @ x
        w = F.T @ resid
        history.append(float(np.linalg.norm(resid)))

    if not np.linalg.matrix_rank(F) == n:
        unique = False
    kkt = kkt_check(F, y, x, max(tol, 1e-12 * max(scale, 1.0)))
    return NnlsSolution(x, history[-1], it, kkt, unique, history)


def solve_nnls_batch(F, targets, tol=None, max_iter=None):
    """
    Solve one NNLS problem per column of ``targets`` against a shared design.

    Returns the activation matrix of shape ``(n, L)`` and the list of
    per-column solutions.
    """
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    F = np.asarray(F, dtype=float)
    A = np.zeros((F.shape[1], targets.shape[1]))
    solutions = []
    for col in range(targets.shape[1]):
        try:
            sol = solve_nnls(F, targets[:, col], tol=tol, max_iter=max_iter)
        except NnlsError as err:
            raise type(err)(str(err), frame=col, best=err.best) from err
        A[:, col] = sol.activations
        solutions.append(sol)
    return A, solutions
