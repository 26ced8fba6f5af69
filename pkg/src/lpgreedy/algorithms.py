"""The four greedy loops, their schedules, and per-iteration traces.

All runners share the shape: select an atom against the norming functional
of the current residual, update the running approximant G_m, record one
trace row. A run stops early once the residual norm falls below 1e-12
(the norming functional is undefined at zero) and the stop reason is
recorded.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .dictionaries import Dictionary, TargetSpec, dict_dual_norm, eps_select, weak_select
from .solvers import SolverConfig, minimize_free_relax, minimize_over_line
from .spaces import LpSpace, SmoothnessParams, lp_norm, norming_functional, smoothness_params

__all__ = [
    "WeaknessSequence",
    "RelaxationSchedule",
    "EpsilonSchedule",
    "epsilon_schedule",
    "TraceRecord",
    "GreedyTrace",
    "run_wgafr",
    "run_gawr",
    "run_iac",
    "run_iacc",
    "read_trace_csv",
    "RESIDUAL_STOP",
]

RESIDUAL_STOP = 1e-12

# Rebuilding G_m from the recorded selections must agree with the stored
# value to this tolerance at every step.
BARYCENTRIC_TOL = 1e-10

CSV_COLUMNS = (
    "m",
    "algo",
    "selected_index",
    "phase_re",
    "phase_im",
    "lambda_re",
    "lambda_im",
    "w_or_r_re",
    "w_or_r_im",
    "residual_norm",
    "dual_norm",
    "eps_m",
    "solver_converged",
)


@dataclass(frozen=True)
class WeaknessSequence:
    """Per-step selection factors t_m in [0, 1].

    ``constant`` carries one t in (0, 1]; ``general`` carries an explicit
    list, which must cover every iteration it is asked for.
    """

    kind: str
    t: float = 1.0
    values: tuple[float, ...] = ()

    @classmethod
    def constant(cls, t: float) -> "WeaknessSequence":
        t = float(t)
        if not 0.0 < t <= 1.0:
            raise ValueError(f"constant weakness requires t in (0, 1]; got {t}")
        return cls(kind="constant", t=t)

    @classmethod
    def general(cls, values) -> "WeaknessSequence":
        vals = tuple(float(v) for v in values)
        if not vals:
            raise ValueError("general weakness sequence must be nonempty")
        if any(not 0.0 <= v <= 1.0 for v in vals):
            raise ValueError("weakness values must lie in [0, 1]")
        return cls(kind="general", values=vals)

    def value(self, m: int) -> float:
        if self.kind == "constant":
            return self.t
        if m > len(self.values):
            raise ValueError(
                f"weakness sequence has {len(self.values)} entries, step {m} requested"
            )
        return self.values[m - 1]


@dataclass(frozen=True)
class RelaxationSchedule:
    """Shrinkage factors r_m in [0, 1) applied to G_{m-1} before each update."""

    kind: str
    r: float = 0.0
    values: tuple[float, ...] = ()

    @classmethod
    def harmonic(cls) -> "RelaxationSchedule":
        """r_k = 2/(k+2), the classic conditional-gradient step schedule."""
        return cls(kind="harmonic")

    @classmethod
    def constant(cls, r: float) -> "RelaxationSchedule":
        r = float(r)
        if not 0.0 <= r < 1.0:
            raise ValueError(f"constant relaxation requires r in [0, 1); got {r}")
        return cls(kind="constant", r=r)

    @classmethod
    def custom(cls, values) -> "RelaxationSchedule":
        vals = tuple(float(v) for v in values)
        if not vals:
            raise ValueError("custom relaxation schedule must be nonempty")
        if any(not 0.0 <= v < 1.0 for v in vals):
            raise ValueError("relaxation values must lie in [0, 1)")
        return cls(kind="custom", values=vals)

    def value(self, m: int) -> float:
        if self.kind == "harmonic":
            return 2.0 / (m + 2.0)
        if self.kind == "constant":
            return self.r
        if m > len(self.values):
            raise ValueError(
                f"relaxation schedule has {len(self.values)} entries, step {m} requested"
            )
        return self.values[m - 1]


def epsilon_schedule(K1: float, params: SmoothnessParams, n: int) -> float:
    """K1 * gamma^(1/q) * n^(-1/p_dual), the incremental selection tolerance."""
    K1 = float(K1)
    if K1 <= 0.0:
        raise ValueError(f"K1 must be > 0; got {K1}")
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1; got {n}")
    return K1 * params.gamma ** (1.0 / params.q) * float(n) ** (-1.0 / params.p_dual)


@dataclass(frozen=True)
class EpsilonSchedule:
    """The tolerance sequence eps_n bound to one space's smoothness data."""

    K1: float
    params: SmoothnessParams

    def value(self, n: int) -> float:
        return epsilon_schedule(self.K1, self.params, n)


@dataclass
class TraceRecord:
    """One iteration: selection, coefficients, and both norms.

    ``w_or_r`` holds w_m for the free-relaxation loop, r_m for the
    relaxed loop, and 1/m for the incremental loops. ``eps_m`` is None
    outside the incremental loops.
    """

    m: int
    selected_index: int
    phase: complex
    lam: complex
    w_or_r: complex
    residual_norm: float
    dual_norm: float
    eps_m: float | None
    solver_converged: bool


@dataclass
class GreedyTrace:
    """Full record of one run: per-step rows plus the stored approximants."""

    algorithm: str
    initial_residual_norm: float
    records: list[TraceRecord] = field(default_factory=list)
    approximants: list[np.ndarray] = field(default_factory=list)
    stop_reason: str = "completed"
    config_hash: str | None = None

    def __len__(self) -> int:
        return len(self.records)

    def residual_norms(self) -> np.ndarray:
        """[||f_0||, ||f_1||, ...]; entry m is the residual after step m."""
        return np.array(
            [self.initial_residual_norm] + [r.residual_norm for r in self.records]
        )

    def selections(self) -> list[tuple[int, complex]]:
        return [(r.selected_index, r.phase) for r in self.records]

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        meta = (
            f"# lpgreedy-trace algorithm={self.algorithm} "
            f"config_hash={self.config_hash or '-'} "
            f"initial_residual_norm={self.initial_residual_norm!r} "
            f"stop_reason={self.stop_reason}"
        )
        buf.write(meta + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.records:
            writer.writerow(
                [
                    r.m,
                    self.algorithm,
                    r.selected_index,
                    repr(r.phase.real),
                    repr(r.phase.imag),
                    repr(r.lam.real),
                    repr(r.lam.imag),
                    repr(r.w_or_r.real),
                    repr(r.w_or_r.imag),
                    repr(r.residual_norm),
                    repr(r.dual_norm),
                    "" if r.eps_m is None else repr(r.eps_m),
                    "true" if r.solver_converged else "false",
                ]
            )
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_string())

    def to_json_obj(self, config: dict | None = None) -> dict:
        return {
            "schema": "lpgreedy.trace.v1",
            "algorithm": self.algorithm,
            "config_hash": self.config_hash,
            "initial_residual_norm": self.initial_residual_norm,
            "stop_reason": self.stop_reason,
            "config": config,
            "records": [
                {
                    "m": r.m,
                    "selected_index": r.selected_index,
                    "phase": [r.phase.real, r.phase.imag],
                    "lambda": [r.lam.real, r.lam.imag],
                    "w_or_r": [r.w_or_r.real, r.w_or_r.imag],
                    "residual_norm": r.residual_norm,
                    "dual_norm": r.dual_norm,
                    "eps_m": r.eps_m,
                    "solver_converged": r.solver_converged,
                }
                for r in self.records
            ],
        }


def read_trace_csv(path) -> tuple[dict, list[TraceRecord]]:
    """Parse a trace CSV; malformed content raises with the 1-based line number."""
    meta: dict = {}
    records: list[TraceRecord] = []
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("# lpgreedy-trace"):
        raise ValueError(f"{path}: line 1: missing trace header comment")
    for token in lines[0][1:].split()[1:]:
        key, _, val = token.partition("=")
        meta[key] = val
    if len(lines) < 2 or tuple(lines[1].split(",")) != CSV_COLUMNS:
        raise ValueError(f"{path}: line 2: expected column header {','.join(CSV_COLUMNS)}")
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        parts = next(csv.reader([line]))
        if len(parts) != len(CSV_COLUMNS):
            raise ValueError(
                f"{path}: line {lineno}: expected {len(CSV_COLUMNS)} fields, got {len(parts)}"
            )
        try:
            records.append(
                TraceRecord(
                    m=int(parts[0]),
                    selected_index=int(parts[2]),
                    phase=complex(float(parts[3]), float(parts[4])),
                    lam=complex(float(parts[5]), float(parts[6])),
                    w_or_r=complex(float(parts[7]), float(parts[8])),
                    residual_norm=float(parts[9]),
                    dual_norm=float(parts[10]),
                    eps_m=None if parts[11] == "" else float(parts[11]),
                    solver_converged=parts[12] == "true",
                )
            )
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return meta, records


def _start_run(space: LpSpace, dictionary: Dictionary, target: TargetSpec, iters: int):
    if dictionary.space is not space and dictionary.space != space:
        raise ValueError("dictionary was built for a different space")
    if int(iters) < 1:
        raise ValueError(f"iters must be >= 1; got {iters}")
    f = np.asarray(target.f, dtype=np.complex128)
    norm0 = lp_norm(space, f)
    if norm0 == 0.0:
        raise ValueError("target.f must be nonzero")
    return f, norm0


def run_wgafr(
    space: LpSpace,
    dictionary: Dictionary,
    target: TargetSpec,
    tau: WeaknessSequence,
    iters: int,
    policy: str = "argmax",
    cfg: SolverConfig | None = None,
) -> GreedyTrace:
    """Greedy loop with free relaxation.

    Step m: pick phi_m with |F(phi_m)| >= t_m * max over the dictionary,
    then jointly reoptimize the shrinkage of G_{m-1} and the new
    coefficient, G_m = (1 - w_m) G_{m-1} + lam_m phi_m. The residual norm
    never increases because (w, lam) = (0, 0) is always available.
    """
    cfg = cfg or SolverConfig()
    f, norm0 = _start_run(space, dictionary, target, iters)
    trace = GreedyTrace(algorithm="wgafr", initial_residual_norm=norm0)
    G = np.zeros(space.dim, dtype=np.complex128)
    f_m = f.copy()
    current = norm0
    for m in range(1, int(iters) + 1):
        if current <= RESIDUAL_STOP:
            trace.stop_reason = "residual_below_threshold"
            break
        F = norming_functional(space, f_m)
        dual_value, _ = dict_dual_norm(F, dictionary)
        sel = weak_select(F, dictionary, tau.value(m), policy)
        phi = dictionary.atoms[sel.index]
        result = minimize_free_relax(space, f, G, phi, cfg)
        w, lam = result.minimizer
        G = (1.0 - w) * G + lam * phi
        f_m = f - G
        current = lp_norm(space, f_m)
        trace.records.append(
            TraceRecord(
                m=m,
                selected_index=sel.index,
                phase=sel.phase,
                lam=complex(lam),
                w_or_r=complex(w),
                residual_norm=current,
                dual_norm=dual_value,
                eps_m=None,
                solver_converged=result.converged,
            )
        )
        trace.approximants.append(G.copy())
    return trace


def run_gawr(
    space: LpSpace,
    dictionary: Dictionary,
    target: TargetSpec,
    tau: WeaknessSequence,
    r: RelaxationSchedule,
    iters: int,
    policy: str = "argmax",
    cfg: SolverConfig | None = None,
) -> GreedyTrace:
    """Greedy loop with a prescribed relaxation schedule.

    Step m: select phi_m as in the free-relaxation loop, shrink the
    approximant by (1 - r_m), and optimize only the new coefficient:
    G_m = (1 - r_m) G_{m-1} + lam_m phi_m.
    """
    cfg = cfg or SolverConfig()
    f, norm0 = _start_run(space, dictionary, target, iters)
    trace = GreedyTrace(algorithm="gawr", initial_residual_norm=norm0)
    G = np.zeros(space.dim, dtype=np.complex128)
    f_m = f.copy()
    current = norm0
    for m in range(1, int(iters) + 1):
        if current <= RESIDUAL_STOP:
            trace.stop_reason = "residual_below_threshold"
            break
        F = norming_functional(space, f_m)
        dual_value, _ = dict_dual_norm(F, dictionary)
        sel = weak_select(F, dictionary, tau.value(m), policy)
        phi = dictionary.atoms[sel.index]
        r_m = r.value(m)
        base = f - (1.0 - r_m) * G
        result = minimize_over_line(space, base, phi, cfg)
        lam = result.minimizer[0]
        G = (1.0 - r_m) * G + lam * phi
        f_m = f - G
        current = lp_norm(space, f_m)
        trace.records.append(
            TraceRecord(
                m=m,
                selected_index=sel.index,
                phase=sel.phase,
                lam=complex(lam),
                w_or_r=complex(r_m),
                residual_norm=current,
                dual_norm=dual_value,
                eps_m=None,
                solver_converged=result.converged,
            )
        )
        trace.approximants.append(G.copy())
    return trace


def _run_incremental(
    space: LpSpace,
    dictionary: Dictionary,
    target: TargetSpec,
    K1: float,
    iters: int,
    policy: str,
    mode: str,
    algorithm: str,
) -> GreedyTrace:
    f, norm0 = _start_run(space, dictionary, target, iters)
    params = smoothness_params(space)
    trace = GreedyTrace(algorithm=algorithm, initial_residual_norm=norm0)
    G = np.zeros(space.dim, dtype=np.complex128)
    running_sum = np.zeros(space.dim, dtype=np.complex128)
    f_m = f.copy()
    current = norm0
    for m in range(1, int(iters) + 1):
        if current <= RESIDUAL_STOP:
            trace.stop_reason = "residual_below_threshold"
            break
        eps_m = epsilon_schedule(K1, params, m)
        F = norming_functional(space, f_m)
        dual_value, _ = dict_dual_norm(F, dictionary)
        sel = eps_select(F, dictionary, f, eps_m, mode=mode, policy=policy)
        phi = dictionary.atoms[sel.index]
        nu = sel.phase  # 1 in plain mode
        # The m = 1 step needs no special-casing: (1 - 1/1) = 0 literally.
        G = (1.0 - 1.0 / m) * G + nu * phi / m
        running_sum = running_sum + nu * phi
        drift = np.abs(running_sum / m - G).max()
        if drift > BARYCENTRIC_TOL:
            raise AssertionError(
                f"barycentric representation drifted by {drift:.3e} at step {m}"
            )
        f_m = f - G
        current = lp_norm(space, f_m)
        trace.records.append(
            TraceRecord(
                m=m,
                selected_index=sel.index,
                phase=nu,
                lam=complex(nu / m),
                w_or_r=complex(1.0 / m),
                residual_norm=current,
                dual_norm=dual_value,
                eps_m=eps_m,
                solver_converged=True,
            )
        )
        trace.approximants.append(G.copy())
    return trace


def run_iac(
    space: LpSpace,
    dictionary: Dictionary,
    target: TargetSpec,
    K1: float,
    iters: int,
    policy: str = "argmax",
    cfg: SolverConfig | None = None,
) -> GreedyTrace:
    """Incremental loop with phase-aligned atoms, for targets in A_1(D).

    Step m: pick phi_m with Re F(phi_m) - Re F(f) >= -eps_m over the
    phase-symmetrized dictionary, then average:
    G_m = (1 - 1/m) G_{m-1} + nu_m phi_m / m with |nu_m| = 1. G_m always
    equals (1/m) sum_j nu_j phi_j, asserted at every step.
    """
    del cfg  # no inner solver; accepted for interface uniformity
    if target.membership != "a1":
        raise ValueError(
            f"run_iac requires an a1 target; got membership={target.membership!r}"
        )
    if target.eps != 0.0:
        raise ValueError("run_iac requires an exact target (eps = 0)")
    return _run_incremental(
        space, dictionary, target, K1, iters, policy, mode="circle", algorithm="iac"
    )


def run_iacc(
    space: LpSpace,
    dictionary: Dictionary,
    target: TargetSpec,
    K1: float,
    iters: int,
    policy: str = "argmax",
    cfg: SolverConfig | None = None,
) -> GreedyTrace:
    """Incremental loop without phases, for targets in conv(D).

    The update G_m = (1 - 1/m) G_{m-1} + phi_m / m keeps G_m a true convex
    combination of atoms (weights count_j / m), asserted at every step.
    """
    del cfg
    if target.membership != "conv":
        raise ValueError(
            f"run_iacc requires a conv target; got membership={target.membership!r}"
        )
    if target.eps != 0.0:
        raise ValueError("run_iacc requires an exact target (eps = 0)")
    trace = _run_incremental(
        space, dictionary, target, K1, iters, policy, mode="plain", algorithm="iacc"
    )
    # Convexity of the stored representation: weights are count/m by
    # construction; verify the invariant on the recorded selections.
    for step, record in enumerate(trace.records, start=1):
        if abs(record.phase - 1.0) > 1e-15:
            raise AssertionError(f"plain-mode selection carried a phase at step {step}")
    return trace
