"""Inner convex minimizations: ||base - D c|| over complex coefficients.

All three entry points reduce to the same problem, minimizing the norm of
an affine residual over one, two, or k complex coefficients. The objective
is convex and, away from a zero residual, differentiable; the gradient
with respect to the real parametrization comes from the norming
functional (the directional derivative of ||x + u y|| at u = 0 is
Re F_x(y)). Descent is plain gradient descent with Armijo backtracking,
no external solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .spaces import LpSpace, _as_vector, _functional_rows, _norm_rows

__all__ = [
    "SolverConfig",
    "SolveResult",
    "DependentBasisError",
    "minimize_over_line",
    "minimize_free_relax",
    "best_approx_subspace",
]

# The norming functional is undefined at 0; a residual this small is an
# exact fit and terminates the descent with value 0.
RESIDUAL_FLOOR = 1e-13

# Pivoted-QR rank threshold for declaring a basis dependent.
RANK_TOL = 1e-10

_MIN_STEP = 1e-18
_STEP_GROWTH = 2.0


class DependentBasisError(ValueError):
    """The supplied basis is numerically linearly dependent."""


@dataclass(frozen=True)
class SolverConfig:
    """Descent controls; defaults match the library-wide tolerances."""

    grad_tol: float = 1e-10
    max_iters: int = 500
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5

    def __post_init__(self):
        if not self.grad_tol > 0.0:
            raise ValueError(f"solver.grad_tol must be > 0; got {self.grad_tol!r}")
        if int(self.max_iters) < 1:
            raise ValueError(f"solver.max_iters must be >= 1; got {self.max_iters!r}")
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError(f"solver.armijo_c must lie in (0, 1); got {self.armijo_c!r}")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError(
                f"solver.backtrack_factor must lie in (0, 1); got {self.backtrack_factor!r}"
            )


@dataclass
class SolveResult:
    """Minimizer (complex coefficients), objective value, and descent stats.

    ``converged`` means the gradient norm reached grad_tol or the residual
    hit the exact-fit floor.
    """

    minimizer: np.ndarray
    value: float
    converged: bool
    iterations: int


def _descend(
    space: LpSpace,
    base: np.ndarray,
    directions: np.ndarray,
    cfg: SolverConfig,
    x0: np.ndarray,
) -> SolveResult:
    """Minimize ||base - directions @ x|| by Armijo gradient descent.

    Columns of ``directions`` are rescaled to unit Euclidean norm first (a
    diagonal preconditioner; the reported minimizer is in original units).
    Each iteration opens at the Barzilai-Borwein curvature step, then
    backtracks until the Armijo decrease holds; the curvature opening is
    what keeps plain gradient steps from ping-ponging across the valley.
    """
    p = space.p
    scales = np.sqrt((np.abs(directions) ** 2).sum(axis=0))
    cols = directions / scales[None, :]
    y = x0 * scales

    def residual(yv):
        return base - cols @ yv

    r = residual(y)
    value = float(_norm_rows(p, r[None, :])[0])
    step = 1.0
    prev_y = None
    prev_grad = None
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iters + 1):
        if value <= RESIDUAL_FLOOR:
            converged = True
            break
        coeffs = _functional_rows(p, r[None, :], np.array([value]))[0]
        grad = -np.conj(coeffs @ cols)
        grad_sq = float((np.abs(grad) ** 2).sum())
        if np.sqrt(grad_sq) <= cfg.grad_tol:
            converged = True
            break
        if prev_grad is not None:
            dy = y - prev_y
            dg = grad - prev_grad
            curvature = float(np.real(np.conj(dy) @ dg))
            if curvature > 0.0:
                step = float((np.abs(dy) ** 2).sum()) / curvature
            else:
                step = step * _STEP_GROWTH
        step = float(np.clip(step, 1e-16, 1e12))
        prev_y, prev_grad = y, grad
        accepted = False
        while step >= _MIN_STEP:
            y_trial = y - step * grad
            r_trial = residual(y_trial)
            value_trial = float(_norm_rows(p, r_trial[None, :])[0])
            if value_trial <= value - cfg.armijo_c * step * grad_sq:
                y, r, value = y_trial, r_trial, value_trial
                accepted = True
                break
            step *= cfg.backtrack_factor
        if not accepted:
            # Step size hit the numerical floor; no further progress possible.
            break
    return SolveResult(
        minimizer=y / scales,
        value=0.0 if value <= RESIDUAL_FLOOR else value,
        converged=converged,
        iterations=iterations,
    )


def minimize_over_line(
    space: LpSpace,
    base,
    direction,
    cfg: SolverConfig | None = None,
) -> SolveResult:
    """min over complex lam of ||base - lam * direction||.

    The minimizer array has length one. Descent starts from lam = 0.
    """
    cfg = cfg or SolverConfig()
    base = _as_vector(space, base, "base")
    direction = _as_vector(space, direction, "direction")
    if not np.abs(direction).max() > 0.0:
        raise ValueError("direction must be nonzero")
    return _descend(space, base, direction[:, None], cfg, np.zeros(1, dtype=np.complex128))


def minimize_free_relax(
    space: LpSpace,
    f,
    G_prev,
    phi,
    cfg: SolverConfig | None = None,
    x0=None,
) -> SolveResult:
    """min over complex (w, lam) of ||f - ((1-w) G_prev + lam phi)||.

    The minimizer array is (w, lam), initialized at (0, 0) unless ``x0``
    overrides it. When G_prev = 0 the objective does not depend on w, so w
    is frozen at 0 and only lam is optimized.
    """
    cfg = cfg or SolverConfig()
    f = _as_vector(space, f, "f")
    G_prev = _as_vector(space, G_prev, "G_prev")
    phi = _as_vector(space, phi, "phi")
    if not np.abs(phi).max() > 0.0:
        raise ValueError("phi must be nonzero")
    if not np.abs(G_prev).max() > 0.0:
        start = np.zeros(1, dtype=np.complex128) if x0 is None else np.array([x0[1]], dtype=np.complex128)
        line = _descend(space, f, phi[:, None], cfg, start)
        return SolveResult(
            minimizer=np.array([0.0 + 0.0j, line.minimizer[0]]),
            value=line.value,
            converged=line.converged,
            iterations=line.iterations,
        )
    # f - (1-w)G - lam*phi  ==  (f - G) - (w, lam) @ (-G, phi)
    directions = np.column_stack([-G_prev, phi])
    start = np.zeros(2, dtype=np.complex128) if x0 is None else np.asarray(x0, dtype=np.complex128)
    return _descend(space, f - G_prev, directions, cfg, start)


def best_approx_subspace(
    space: LpSpace,
    f,
    basis,
    cfg: SolverConfig | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Best approximation of f from span(basis); returns (coeffs, residual).

    The basis (a sequence of vectors) must be numerically independent:
    pivoted QR with relative threshold 1e-10. Descent is warm-started at
    the Euclidean least-squares solution, which for p = 2 is already the
    answer.
    """
    cfg = cfg or SolverConfig()
    f = _as_vector(space, f, "f")
    vectors = [_as_vector(space, b, "basis element") for b in basis]
    if not vectors:
        raise ValueError("basis must be nonempty")
    B = np.column_stack(vectors)
    r_diag = np.abs(np.diag(scipy.linalg.qr(B, mode="r", pivoting=True)[0]))
    if r_diag.size < B.shape[1] or r_diag.min() <= RANK_TOL * r_diag.max():
        raise DependentBasisError(
            f"basis is numerically dependent (pivot ratio {r_diag.min() / r_diag.max():.2e} "
            f"<= {RANK_TOL:g})"
        )
    x0 = np.linalg.lstsq(B, f, rcond=None)[0]
    result = _descend(space, f, B, cfg, x0)
    coeffs = result.minimizer
    return coeffs, f - B @ coeffs
