"""Finite dictionaries, selection oracles, and synthetic targets.

A dictionary is an ordered finite list of unit-norm atoms. The sup over
the (infinite) phase symmetrization {e^{i theta} g} is never materialized:
for each atom the optimal phase is analytic, Re F(e^{i theta} g) maxes out
at |F(g)|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import (
    DualFunctional,
    LpSpace,
    _as_vector,
    _norm_rows,
    complex_sign,
    lp_norm,
)

__all__ = [
    "Dictionary",
    "Selection",
    "TargetSpec",
    "InfeasibleSelectionError",
    "generate_dictionary",
    "dict_dual_norm",
    "weak_select",
    "eps_select",
    "make_target",
    "DICTIONARY_KINDS",
    "POLICIES",
    "MEMBERSHIPS",
    "SELECTION_MODES",
]

DICTIONARY_KINDS = ("gaussian", "fourier_frame", "canonical")
POLICIES = ("argmax", "first_qualifying")
MEMBERSHIPS = ("a1", "conv")
SELECTION_MODES = ("circle", "plain")

ATOM_NORM_TOL = 1e-12


class InfeasibleSelectionError(RuntimeError):
    """No dictionary element meets the near-optimality threshold.

    Raised by :func:`eps_select`; certifies that the target violates its
    membership contract (f not in A_1(D) resp. conv(D)) rather than
    silently falling back.
    """


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Ordered finite list of atoms with norm at most one.

    ``atoms`` is a (count, dim) complex array, one atom per row, frozen
    after construction.
    """

    space: LpSpace
    atoms: np.ndarray
    kind: str = "custom"
    seed: int | None = None

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=np.complex128)
        if atoms.ndim != 2 or atoms.shape[0] < 1 or atoms.shape[1] != self.space.dim:
            raise ValueError(
                f"atoms must form a nonempty (count, {self.space.dim}) array; "
                f"got shape {atoms.shape}"
            )
        if not np.all(np.isfinite(atoms)):
            raise ValueError("atoms contain non-finite entries")
        norms = _norm_rows(self.space.p, atoms)
        if norms.max() > 1.0 + ATOM_NORM_TOL:
            raise ValueError(
                f"every atom must have norm <= 1 + {ATOM_NORM_TOL:g}; "
                f"worst is {norms.max()!r}"
            )
        atoms = atoms.copy()
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)

    def __len__(self) -> int:
        return self.atoms.shape[0]

    def element(self, index: int) -> np.ndarray:
        return self.atoms[index]

    def to_json_obj(self) -> dict:
        return {
            "schema": "lpgreedy.dictionary.v1",
            "space": {"p": self.space.p, "dim": self.space.dim},
            "kind": self.kind,
            "seed": self.seed,
            "elements": [_vector_to_pairs(row) for row in self.atoms],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Dictionary":
        space = LpSpace(obj["space"]["p"], obj["space"]["dim"])
        atoms = np.array(
            [_pairs_to_vector(e) for e in obj["elements"]], dtype=np.complex128
        )
        return cls(space=space, atoms=atoms, kind=obj.get("kind", "custom"),
                   seed=obj.get("seed"))


@dataclass(frozen=True)
class Selection:
    """One selection: atom index, aligning phase, and the raw value F(g).

    ``phase`` is the complex conjugate of sign F(g), so phase * value is
    |value| whenever value is nonzero.
    """

    index: int
    phase: complex
    value: complex


@dataclass(frozen=True, eq=False)
class TargetSpec:
    """A target f, its representable part f_eps, and membership metadata.

    ``f_eps``/A_eps lies in A_1(D) (coefficients with sum of moduli <= A_eps)
    or f_eps lies in conv(D) (nonnegative real weights summing to one), and
    ||f - f_eps|| <= eps.
    """

    f: np.ndarray
    f_eps: np.ndarray
    eps: float
    A_eps: float
    membership: str
    true_coeffs: tuple[tuple[int, complex], ...] | None = None

    def __post_init__(self):
        f = np.asarray(self.f, dtype=np.complex128).copy()
        f_eps = np.asarray(self.f_eps, dtype=np.complex128).copy()
        if f.shape != f_eps.shape or f.ndim != 1:
            raise ValueError("f and f_eps must be 1-D vectors of equal length")
        if self.membership not in MEMBERSHIPS:
            raise ValueError(f"membership must be one of {MEMBERSHIPS}; got {self.membership!r}")
        if self.eps < 0.0 or self.A_eps <= 0.0:
            raise ValueError("eps must be >= 0 and A_eps > 0")
        f.setflags(write=False)
        f_eps.setflags(write=False)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "f_eps", f_eps)

    def to_json_obj(self) -> dict:
        coeffs = None
        if self.true_coeffs is not None:
            coeffs = [[i, [c.real, c.imag]] for i, c in self.true_coeffs]
        return {
            "schema": "lpgreedy.target.v1",
            "membership": self.membership,
            "eps": self.eps,
            "a_eps": self.A_eps,
            "f": _vector_to_pairs(self.f),
            "f_eps": _vector_to_pairs(self.f_eps),
            "true_coeffs": coeffs,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TargetSpec":
        coeffs = obj.get("true_coeffs")
        if coeffs is not None:
            coeffs = tuple((int(i), complex(re, im)) for i, (re, im) in coeffs)
        return cls(
            f=_pairs_to_vector(obj["f"]),
            f_eps=_pairs_to_vector(obj["f_eps"]),
            eps=float(obj["eps"]),
            A_eps=float(obj["a_eps"]),
            membership=obj["membership"],
            true_coeffs=coeffs,
        )


def _vector_to_pairs(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in v]


def _pairs_to_vector(pairs) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


def generate_dictionary(space: LpSpace, count: int, kind: str, seed: int = 0) -> Dictionary:
    """Build a seeded dictionary of unit-norm atoms.

    gaussian       i.i.d. complex-Gaussian entries, rows normalized.
    fourier_frame  rows of an oversampled DFT matrix, normalized
                   (requires count >= dim).
    canonical      the dim standard basis vectors (count must equal dim).
    """
    count = int(count)
    if kind not in DICTIONARY_KINDS:
        raise ValueError(f"kind must be one of {DICTIONARY_KINDS}; got {kind!r}")
    if count < 1:
        raise ValueError(f"count must be >= 1; got {count}")
    if kind == "canonical":
        if count != space.dim:
            raise ValueError(
                f"canonical dictionary requires count == dim; got count={count}, dim={space.dim}"
            )
        atoms = np.eye(space.dim, dtype=np.complex128)
    elif kind == "gaussian":
        rng = np.random.default_rng(seed)
        atoms = rng.standard_normal((count, space.dim)) + 1j * rng.standard_normal(
            (count, space.dim)
        )
        atoms /= _norm_rows(space.p, atoms)[:, None]
    else:  # fourier_frame
        if count < space.dim:
            raise ValueError(
                f"fourier_frame requires count >= dim; got count={count}, dim={space.dim}"
            )
        k = np.arange(count)[:, None]
        j = np.arange(space.dim)[None, :]
        atoms = np.exp(2j * np.pi * k * j / count)
        atoms /= _norm_rows(space.p, atoms)[:, None]
    return Dictionary(space=space, atoms=atoms, kind=kind, seed=seed)


def _check_functional(F: DualFunctional, dictionary: Dictionary) -> None:
    if F.dim != dictionary.space.dim:
        raise ValueError(
            f"functional dimension {F.dim} does not match space dimension "
            f"{dictionary.space.dim}"
        )


def dict_dual_norm(F: DualFunctional, dictionary: Dictionary) -> tuple[float, int]:
    """max_i |F(g_i)| together with the smallest attaining index."""
    _check_functional(F, dictionary)
    values = dictionary.atoms @ F.coeffs
    mags = np.abs(values)
    idx = int(np.argmax(mags))  # first occurrence wins ties
    return float(mags[idx]), idx


def weak_select(
    F: DualFunctional,
    dictionary: Dictionary,
    t: float,
    policy: str = "argmax",
    seed: int = 0,
) -> Selection:
    """Pick an atom with |F(g)| >= t * max_i |F(g_i)|.

    ``argmax`` returns the maximizer itself; ``first_qualifying`` returns
    the smallest index over the threshold, which exercises weakness t < 1
    nontrivially. Both policies are deterministic (``seed`` is reserved
    for future randomized policies). When every value is zero the
    selection degenerates to index 0 with phase 1; callers detect the
    stagnation through the zero value.
    """
    t = float(t)
    if not 0.0 < t <= 1.0:
        raise ValueError(f"t must lie in (0, 1]; got {t}")
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}; got {policy!r}")
    _check_functional(F, dictionary)
    values = dictionary.atoms @ F.coeffs
    mags = np.abs(values)
    best = int(np.argmax(mags))
    if mags[best] == 0.0:
        return Selection(index=0, phase=1.0 + 0.0j, value=0.0 + 0.0j)
    if policy == "argmax":
        idx = best
    else:
        qualifying = mags >= t * mags[best]
        idx = int(np.argmax(qualifying))  # smallest qualifying index
    value = complex(values[idx])
    phase = complex(np.conj(complex_sign(value)))
    return Selection(index=idx, phase=phase, value=value)


def eps_select(
    F: DualFunctional,
    dictionary: Dictionary,
    f,
    eps_m: float,
    mode: str = "circle",
    policy: str = "argmax",
) -> Selection:
    """Pick an atom phi with Re F(phi) - Re F(f) >= -eps_m.

    In ``circle`` mode each atom is taken with its optimal phase, so its
    score is |F(g)|; feasibility is guaranteed for f in A_1(D). In
    ``plain`` mode the phase is fixed to one and the score is Re F(g);
    feasibility is guaranteed for f in conv(D). ``argmax`` returns the
    best-scoring atom, ``first_qualifying`` the smallest index over the
    threshold, ties always to the smallest index.
    """
    eps_m = float(eps_m)
    if eps_m < 0.0:
        raise ValueError(f"eps_m must be >= 0; got {eps_m}")
    if mode not in SELECTION_MODES:
        raise ValueError(f"mode must be one of {SELECTION_MODES}; got {mode!r}")
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}; got {policy!r}")
    _check_functional(F, dictionary)
    f = _as_vector(dictionary.space, f, "f")
    values = dictionary.atoms @ F.coeffs
    scores = np.abs(values) if mode == "circle" else values.real
    threshold = float(np.dot(F.coeffs, f).real) - eps_m
    if policy == "argmax":
        idx = int(np.argmax(scores))
        if scores[idx] < threshold:
            raise InfeasibleSelectionError(
                f"no atom within eps_m={eps_m:g} of the target functional value; "
                f"best score {scores[idx]!r} < required {threshold!r} "
                f"(target violates its {mode} membership contract)"
            )
    else:
        qualifying = scores >= threshold
        if not qualifying.any():
            raise InfeasibleSelectionError(
                f"no atom within eps_m={eps_m:g} of the target functional value "
                f"(target violates its {mode} membership contract)"
            )
        idx = int(np.argmax(qualifying))
    value = complex(values[idx])
    if mode == "circle":
        phase = complex(np.conj(complex_sign(value)))
    else:
        phase = 1.0 + 0.0j
    return Selection(index=idx, phase=phase, value=value)


def make_target(
    dictionary: Dictionary,
    membership: str,
    sparsity: int,
    eps: float = 0.0,
    seed: int = 0,
) -> TargetSpec:
    """Draw a seeded target supported on ``sparsity`` atoms.

    a1    complex coefficients with sum of moduli exactly one (A_eps = 1).
    conv  nonnegative real weights summing to one.

    Coefficient moduli are drawn from [0.5, 1.5] before normalization so
    no support atom is degenerately small. When eps > 0 the returned f is
    f_eps plus a random perturbation of norm exactly eps.
    """
    space = dictionary.space
    sparsity = int(sparsity)
    if membership not in MEMBERSHIPS:
        raise ValueError(f"membership must be one of {MEMBERSHIPS}; got {membership!r}")
    if not 1 <= sparsity <= len(dictionary):
        raise ValueError(
            f"sparsity must lie in [1, {len(dictionary)}]; got {sparsity}"
        )
    eps = float(eps)
    if eps < 0.0:
        raise ValueError(f"eps must be >= 0; got {eps}")
    rng = np.random.default_rng(seed)
    indices = np.sort(rng.choice(len(dictionary), size=sparsity, replace=False))
    moduli = rng.uniform(0.5, 1.5, size=sparsity)
    if membership == "a1":
        phases = np.exp(2j * np.pi * rng.uniform(size=sparsity))
        coeffs = moduli * phases / moduli.sum()
    else:
        coeffs = (moduli / moduli.sum()).astype(np.complex128)
    f_eps = coeffs @ dictionary.atoms[indices]
    f = f_eps
    if eps > 0.0:
        noise = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
        f = f_eps + noise * (eps / lp_norm(space, noise))
    return TargetSpec(
        f=f,
        f_eps=f_eps,
        eps=eps,
        A_eps=1.0,
        membership=membership,
        true_coeffs=tuple((int(i), complex(c)) for i, c in zip(indices, coeffs)),
    )
