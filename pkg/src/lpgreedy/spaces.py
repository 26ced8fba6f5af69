"""Complex l_p^n spaces: norms, norming functionals, smoothness bounds.

Vectors are 1-D numpy arrays of complex128, scalars are python complex.
Every operation here is a pure function of its inputs; nothing is cached
or mutated, so values can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LpSpace",
    "DualFunctional",
    "SmoothnessParams",
    "lp_norm",
    "complex_sign",
    "norming_functional",
    "apply_functional",
    "rho_bound",
    "smoothness_params",
    "estimate_rho",
]

# |h_i|^(p-1) and the dual exponent p/(p-1) leave float64 range quickly for
# extreme p; 64 keeps every intermediate quantity representable.
P_MAX = 64.0


@dataclass(frozen=True)
class LpSpace:
    """Complex l_p^n, exponent ``p`` in (1, 64], dimension ``dim`` >= 1.

    p = 1 and p = infinity are rejected: those spaces are not uniformly
    smooth and the duality map below is not single-valued there.
    """

    p: float
    dim: int

    def __post_init__(self):
        p = float(self.p)
        if not np.isfinite(p) or not (1.0 < p <= P_MAX):
            raise ValueError(
                f"space.p must satisfy 1 < p <= {P_MAX:g}; got {self.p!r}"
            )
        dim = int(self.dim)
        if dim < 1:
            raise ValueError(f"space.dim must be a positive integer; got {self.dim!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "dim", dim)

    @property
    def p_conjugate(self) -> float:
        """Hoelder conjugate p/(p-1), the exponent of the dual space."""
        return self.p / (self.p - 1.0)


@dataclass(frozen=True, eq=False)
class DualFunctional:
    """Linear functional F(x) = sum_i coeffs[i] * x[i] (no conjugation).

    Produced by :func:`norming_functional`, in which case the coefficient
    vector has unit dual norm and F(h) equals ||h||.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise ValueError("functional coefficients must form a nonempty vector")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("functional coefficients contain non-finite entries")
        coeffs = coeffs.copy()
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def dim(self) -> int:
        return self.coeffs.size


@dataclass(frozen=True)
class SmoothnessParams:
    """Power-type smoothness data (q, gamma) with rho(u) <= gamma * u^q.

    ``p_dual`` = q/(q-1) is the exponent appearing in the convergence
    rates m^(-1/p_dual).
    """

    q: float
    gamma: float
    p_dual: float


def _as_vector(space: LpSpace, v, name: str = "v") -> np.ndarray:
    arr = np.asarray(v, dtype=np.complex128)
    if arr.shape != (space.dim,):
        raise ValueError(
            f"{name} has shape {arr.shape}, expected ({space.dim},) for this space"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _norm_rows(p: float, a: np.ndarray) -> np.ndarray:
    """Row-wise l_p norms of a 2-D complex array, scaled for stability."""
    mags = np.abs(a)
    scale = mags.max(axis=-1)
    safe = np.where(scale > 0.0, scale, 1.0)
    sums = ((mags / safe[..., None]) ** p).sum(axis=-1)
    return np.where(scale > 0.0, safe * sums ** (1.0 / p), 0.0)


def _functional_rows(p: float, h: np.ndarray, norms: np.ndarray) -> np.ndarray:
    """Row-wise norming-functional coefficients; rows of ``h`` must be nonzero.

    The conjugate sign is e^{-i arg(h_i)}, which stays exact for subnormal
    entries where the direct division h/|h| can overflow; arg(0) = 0 gives
    the sign-of-zero convention for free.
    """
    mags = np.abs(h)
    conj_signs = np.exp(-1j * np.angle(h))
    return conj_signs * (mags / norms[..., None]) ** (p - 1.0)


def lp_norm(space: LpSpace, v) -> float:
    """(sum_i |v_i|^p)^(1/p); nonnegative and zero only for the zero vector."""
    arr = _as_vector(space, v)
    return float(_norm_rows(space.p, arr[None, :])[0])


def complex_sign(z) -> complex:
    """z/|z| for z != 0, and 1 for z = 0, so the result always has modulus 1."""
    z = complex(z)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValueError(f"complex_sign requires a finite scalar; got {z!r}")
    if z == 0:
        return 1.0 + 0.0j
    return z / abs(z)


def norming_functional(space: LpSpace, h) -> DualFunctional:
    """The functional F_h with unit dual norm and F_h(h) = ||h||.

    In l_p the duality map is explicit: the coefficient at i is
    conj(sign h_i) * (|h_i| / ||h||)^(p-1). This closed form satisfies the
    two defining identities to round-off and is never obtained by
    optimization.
    """
    arr = _as_vector(space, h, "h")
    norm = float(_norm_rows(space.p, arr[None, :])[0])
    if norm == 0.0:
        raise ValueError("norming functional is undefined for the zero vector")
    coeffs = _functional_rows(space.p, arr[None, :], np.array([norm]))[0]
    return DualFunctional(coeffs)


def apply_functional(F: DualFunctional, x) -> complex:
    """Evaluate F(x) = sum_i coeffs[i] * x[i]; linear in x."""
    arr = np.asarray(x, dtype=np.complex128)
    if arr.shape != (F.dim,):
        raise ValueError(
            f"x has shape {arr.shape}, expected ({F.dim},) to match the functional"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("x contains non-finite entries")
    return complex(np.dot(F.coeffs, arr))


def rho_bound(space: LpSpace, u: float) -> float:
    """Upper bound for the modulus of smoothness of l_p at u >= 0.

    u^p/p for p <= 2 and (p-1)u^2/2 for p >= 2; the two branches agree
    at p = 2.
    """
    u = float(u)
    if not np.isfinite(u) or u < 0.0:
        raise ValueError(f"u must be finite and nonnegative; got {u!r}")
    if space.p <= 2.0:
        return u**space.p / space.p
    return (space.p - 1.0) * u * u / 2.0


def smoothness_params(space: LpSpace) -> SmoothnessParams:
    """(q, gamma, p_dual) with rho_bound(u) = gamma * u^q and p_dual = q/(q-1)."""
    if space.p <= 2.0:
        q = space.p
        gamma = 1.0 / space.p
    else:
        q = 2.0
        gamma = (space.p - 1.0) / 2.0
    return SmoothnessParams(q=q, gamma=gamma, p_dual=q / (q - 1.0))


def estimate_rho(space: LpSpace, u: float, n_samples: int, seed: int) -> float:
    """Monte-Carlo lower estimate of the modulus of smoothness at u.

    Maximizes (||x+uy|| + ||x-uy||)/2 - 1 over ``n_samples`` random unit
    pairs (x, y). The estimate never exceeds rho_bound(space, u) and, for
    a fixed seed, is nondecreasing in u because each sampled pair
    contributes an even convex function of u.
    """
    u = float(u)
    if not np.isfinite(u) or u < 0.0:
        raise ValueError(f"u must be finite and nonnegative; got {u!r}")
    n_samples = int(n_samples)
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if u == 0.0:
        return 0.0
    rng = np.random.default_rng(seed)
    shape = (n_samples, space.dim)
    x = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    y = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    x /= _norm_rows(space.p, x)[:, None]
    y /= _norm_rows(space.p, y)[:, None]
    vals = 0.5 * (_norm_rows(space.p, x + u * y) + _norm_rows(space.p, x - u * y)) - 1.0
    return max(0.0, float(vals.max()))
