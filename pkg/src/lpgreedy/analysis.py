"""Numerical checkers for per-step residual recursions, rate bounds, traces.

Each checker samples or walks a trace, accumulates slack margins
(bound minus observed value; negative means violation), and returns a
CheckReport. Checkers substitute the closed-form l_p smoothness bound for
the true modulus; every such substitution sits on the large side of the
inequality being checked, so the direction is preserved. Per-step
inequalities on traces carry an explicit solver slack because the inner
minimizations are approximate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algorithms import GreedyTrace, WeaknessSequence
from .dictionaries import Dictionary, dict_dual_norm
from .solvers import SolverConfig, best_approx_subspace
from .spaces import (
    DualFunctional,
    LpSpace,
    SmoothnessParams,
    _functional_rows,
    _norm_rows,
    apply_functional,
    lp_norm,
    norming_functional,
    rho_bound,
    smoothness_params,
)

__all__ = [
    "CheckReport",
    "RateFit",
    "check_ll0",
    "check_ml1_step",
    "check_ml1_trace",
    "check_ml3_step",
    "check_ml3_trace",
    "check_mt2_bound",
    "check_hl1",
    "check_ml4",
    "fit_log_slope",
    "check_orthogonality",
    "check_dual_norm_supremum",
    "check_condition_43",
    "check_monotone",
    "check_trivial_step",
    "check_barycentric",
    "ml1_optimal_lambda",
    "reports_to_csv",
    "DEFAULT_SLACK",
]

# Solver slack added to every per-step trace inequality: the inner infima
# are exact in the statements, approximate in the runs.
DEFAULT_SLACK = 1e-8


@dataclass
class CheckReport:
    """Outcome of one checker.

    ``worst_margin`` is the most-violated slack (negative = violation);
    ``passed`` is worst_margin >= -tolerance. ``applicable`` is False when
    a checker's hypotheses fail on the supplied data, in which case
    ``passed`` carries no information.
    """

    name: str
    passed: bool
    worst_margin: float
    samples: int
    tolerance: float = 0.0
    applicable: bool = True
    details: list[str] = field(default_factory=list)

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "samples": self.samples,
            "tolerance": self.tolerance,
            "applicable": self.applicable,
            "details": list(self.details),
        }


@dataclass
class RateFit:
    """Least-squares slope of log residual versus log step index."""

    slope: float
    intercept: float
    window: tuple[int, int]
    r_squared: float


def _finish(name, margins, samples, tolerance, details=None, applicable=True):
    worst = float(min(margins)) if len(margins) else float("inf")
    return CheckReport(
        name=name,
        passed=bool(worst >= -tolerance),
        worst_margin=worst,
        samples=samples,
        tolerance=tolerance,
        applicable=applicable,
        details=details or [],
    )


def reports_to_csv(reports) -> str:
    """Summary table (name, passed, worst_margin, samples) as CSV text."""
    lines = ["name,passed,worst_margin,samples"]
    for report in reports:
        lines.append(
            f"{report.name},{'true' if report.passed else 'false'},"
            f"{report.worst_margin!r},{report.samples}"
        )
    return "\n".join(lines) + "\n"


def check_ll0(space: LpSpace, n_samples: int, seed: int, tol: float = 1e-9) -> CheckReport:
    """Two-sided smoothness sandwich on random (x, y, u).

    0 <= ||x+uy|| - ||x|| - Re(u F_x(y)) <= 2 ||x|| rho_bound(|u| ||y|| / ||x||)
    for x != 0 and real u in [-2, 2].
    """
    rng = np.random.default_rng(seed)
    n = int(n_samples)
    shape = (n, space.dim)
    x = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    y = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    u = rng.uniform(-2.0, 2.0, size=n)
    nx = _norm_rows(space.p, x)
    ny = _norm_rows(space.p, y)
    coeffs = _functional_rows(space.p, x, nx)
    mid = _norm_rows(space.p, x + u[:, None] * y) - nx - (u * (coeffs * y).sum(axis=1).real)
    upper = 2.0 * nx * np.array(
        [rho_bound(space, ui) for ui in np.abs(u) * ny / nx]
    )
    margins = np.concatenate([mid, upper - mid])
    details = []
    if margins.min() < -tol:
        bad = int(np.argmin(margins)) % n
        details.append(f"worst sample index {bad}: u={u[bad]!r}")
    return _finish("ll0_sandwich", margins, n, tol, details)


def ml1_optimal_lambda(
    res_prev: float, t_m: float, params: SmoothnessParams, A_eps: float
) -> float:
    """The lambda at which the free-relaxation residual recursion is tight."""
    q = params.q
    return (
        res_prev ** (q / (q - 1.0))
        * 5.0 ** (-q / (q - 1.0))
        * (8.0 * params.gamma * A_eps) ** (-1.0 / (q - 1.0))
        * t_m ** (1.0 / (q - 1.0))
    )


def _default_lambda_grid(res_prev, t_m, params, A_eps, points=101):
    grid = np.linspace(0.0, 1.0, points)
    return np.append(grid, ml1_optimal_lambda(res_prev, t_m, params, A_eps))


def check_ml1_step(
    space: LpSpace,
    trace: GreedyTrace,
    m: int,
    A_eps: float,
    eps: float,
    t_m: float,
    lambda_grid=None,
    slack: float = DEFAULT_SLACK,
    grid_points: int = 101,
) -> CheckReport:
    """Per-step residual recursion of the free-relaxation loop.

    ||f_m|| <= ||f_{m-1}|| (1 - lam t_m (1 - eps/||f_{m-1}||)/A_eps
                              + 2 rho_bound(5 lam / ||f_{m-1}||))
    for every lam >= 0 in the grid, within solver slack. The default grid
    is ``grid_points`` points on [0, 1] plus the lambda where the explicit
    rate derivation is tight.
    """
    norms = trace.residual_norms()
    if not 1 <= m <= len(trace.records):
        raise ValueError(f"step {m} outside trace of length {len(trace.records)}")
    prev, curr = norms[m - 1], norms[m]
    params = smoothness_params(space)
    if lambda_grid is None:
        lambda_grid = _default_lambda_grid(prev, t_m, params, A_eps, grid_points)
    lams = np.asarray(lambda_grid, dtype=float)
    rhs = prev * (
        1.0
        - lams * t_m / A_eps * (1.0 - eps / prev)
        + 2.0 * params.gamma * (5.0 * lams / prev) ** params.q
    )
    margins = rhs - curr
    return _finish(f"ml1_step_{m}", margins, lams.size, slack)


def check_ml1_trace(
    space: LpSpace,
    trace: GreedyTrace,
    tau: WeaknessSequence,
    A_eps: float,
    eps: float,
    lambda_grid=None,
    slack: float = DEFAULT_SLACK,
    grid_points: int = 101,
) -> CheckReport:
    """check_ml1_step at every recorded step, margins merged."""
    margins = []
    details = []
    for record in trace.records:
        rep = check_ml1_step(
            space,
            trace,
            record.m,
            A_eps,
            eps,
            tau.value(record.m),
            lambda_grid,
            slack,
            grid_points,
        )
        margins.append(rep.worst_margin)
        if not rep.passed:
            details.append(f"step {record.m}: margin {rep.worst_margin:.3e}")
    return _finish("ml1_per_step", margins, len(trace.records), slack, details)


def check_ml3_step(
    space: LpSpace,
    trace: GreedyTrace,
    m: int,
    A_eps: float,
    eps: float,
    t: float,
    r_m: float | None = None,
    f_norm: float | None = None,
    slack: float = DEFAULT_SLACK,
) -> CheckReport:
    """Per-step residual recursion of the relaxed loop.

    ||f_m|| <= ||f_{m-1}|| (1 - r_m (1 - eps/||f_{m-1}||)
               + 2 rho_bound(r_m (||f|| + A_eps/t) / ((1-r_m) ||f_{m-1}||))).
    Steps with r_m = 0 or ||f_{m-1}|| <= eps are outside the recursion's
    hypotheses and are reported as not applicable.
    """
    norms = trace.residual_norms()
    if not 1 <= m <= len(trace.records):
        raise ValueError(f"step {m} outside trace of length {len(trace.records)}")
    prev, curr = norms[m - 1], norms[m]
    if r_m is None:
        r_m = trace.records[m - 1].w_or_r.real
    if f_norm is None:
        f_norm = trace.initial_residual_norm
    if r_m == 0.0 or prev <= eps:
        return CheckReport(
            name=f"ml3_step_{m}",
            passed=True,
            worst_margin=float("inf"),
            samples=0,
            tolerance=slack,
            applicable=False,
            details=[f"skipped: r_m={r_m!r}, prev={prev!r}, eps={eps!r}"],
        )
    u = r_m * (f_norm + A_eps / t) / ((1.0 - r_m) * prev)
    rhs = prev * (1.0 - r_m * (1.0 - eps / prev) + 2.0 * rho_bound(space, u))
    return _finish(f"ml3_step_{m}", [rhs - curr], 1, slack)


def check_ml3_trace(
    space: LpSpace,
    trace: GreedyTrace,
    A_eps: float,
    eps: float,
    t: float,
    slack: float = DEFAULT_SLACK,
) -> CheckReport:
    """check_ml3_step at every applicable step, margins merged."""
    margins = []
    details = []
    applicable_steps = 0
    for record in trace.records:
        rep = check_ml3_step(space, trace, record.m, A_eps, eps, t, slack=slack)
        if not rep.applicable:
            continue
        applicable_steps += 1
        margins.append(rep.worst_margin)
        if not rep.passed:
            details.append(f"step {record.m}: margin {rep.worst_margin:.3e}")
    return _finish("ml3_per_step", margins, applicable_steps, slack, details)


def check_mt2_bound(
    trace: GreedyTrace,
    params: SmoothnessParams,
    A_eps: float,
    eps: float,
    tau: WeaknessSequence,
    slack: float = DEFAULT_SLACK,
) -> CheckReport:
    """Explicit-constant residual bound for the free-relaxation loop.

    ||f_m|| <= max(2 eps, A_q^(1/p) (A_eps + eps) (1 + sum_{k<=m} t_k^p)^(-1/p))
    with p = q/(q-1) and A_q = 4 (8 gamma)^(1/(q-1)) 5^(q/(q-1)).
    """
    q = params.q
    p = params.p_dual
    A_q = 4.0 * (8.0 * params.gamma) ** (1.0 / (q - 1.0)) * 5.0 ** (q / (q - 1.0))
    norms = trace.residual_norms()
    margins = []
    t_power_sum = 0.0
    for record in trace.records:
        t_power_sum += tau.value(record.m) ** p
        bound = max(
            2.0 * eps,
            A_q ** (1.0 / p) * (A_eps + eps) * (1.0 + t_power_sum) ** (-1.0 / p),
        )
        margins.append(bound - norms[record.m])
    return _finish("mt2_bound", margins, len(trace.records), slack)


def check_hl1(x_seq, C1: float, a_seq, slack: float = 1e-12) -> CheckReport:
    """Recursive-sequence bound: x_m <= (C1^-1 + sum_{k<=m} a_k)^-1.

    First verifies the hypotheses (x_0 <= C1, nonnegativity, and the
    recursion x_{m+1} <= x_m (1 - x_m a_{m+1}) for every transition); if
    any fails, the report is returned as not applicable.
    """
    x = np.asarray(x_seq, dtype=float)
    a = np.asarray(a_seq, dtype=float)
    C1 = float(C1)
    problems = []
    if C1 <= 0.0:
        problems.append(f"C1 must be > 0; got {C1!r}")
    if x.size < 1:
        problems.append("x_seq is empty")
    if a.size < x.size - 1:
        problems.append(f"need {x.size - 1} a-values, got {a.size}")
    if not problems:
        if np.any(x < 0.0):
            problems.append("x_seq has negative entries")
        if np.any(a[: x.size - 1] < 0.0):
            # a_k = 0 degenerates the bound to the constant C1, still valid.
            problems.append("a_seq entries must be nonnegative")
        if x[0] > C1 + slack:
            problems.append(f"x_0={x[0]!r} exceeds C1={C1!r}")
        for m in range(x.size - 1):
            if x[m + 1] > x[m] * (1.0 - x[m] * a[m]) + slack:
                problems.append(
                    f"recursion fails at m={m}: {x[m + 1]!r} > "
                    f"{x[m] * (1.0 - x[m] * a[m])!r}"
                )
                break
    if problems:
        return CheckReport(
            name="hl1",
            passed=False,
            worst_margin=float("-inf"),
            samples=x.size,
            tolerance=slack,
            applicable=False,
            details=problems,
        )
    bounds = 1.0 / (1.0 / C1 + np.concatenate([[0.0], np.cumsum(a[: x.size - 1])]))
    margins = bounds - x
    return _finish("hl1", margins, x.size, slack)


def check_ml4(
    a_seq, alpha: float, gamma_param: float, A: float, slack: float = 1e-12
) -> CheckReport:
    """Power-decay hypothesis check plus the empirical bounding constant.

    Verifies, for n >= 2, a_n <= a_{n-1} + A (n-1)^(-alpha), and whenever
    a_v >= A v^(-alpha) (v >= 2) also a_{v+1} <= a_v (1 - gamma_param/v).
    Reports max_n a_n n^alpha / A (over the whole sequence and its first
    half) as the empirical decay constant.
    """
    a = np.asarray(a_seq, dtype=float)
    alpha = float(alpha)
    gamma_param = float(gamma_param)
    A = float(A)
    problems = []
    if not 0.0 < alpha < gamma_param <= 1.0:
        problems.append(
            f"need 0 < alpha < gamma_param <= 1; got alpha={alpha!r}, "
            f"gamma_param={gamma_param!r}"
        )
    if a.size < 2:
        problems.append("sequence too short")
    elif A <= a[0]:
        problems.append(f"need A > a_1; got A={A!r}, a_1={a[0]!r}")
    margins = []
    if not problems:
        n = np.arange(1, a.size + 1, dtype=float)
        growth = a[:-1] + A * n[:-1] ** (-alpha) - a[1:]
        margins.extend(growth.tolist())
        if growth.min() < -slack:
            problems.append(f"growth hypothesis fails at n={int(np.argmin(growth)) + 2}")
        for v in range(2, a.size):  # v is 1-based index, a_v = a[v-1]
            if a[v - 1] >= A * float(v) ** (-alpha):
                decay_margin = a[v - 1] * (1.0 - gamma_param / v) - a[v]
                margins.append(decay_margin)
                if decay_margin < -slack:
                    problems.append(f"decay hypothesis fails at v={v}")
                    break
    if problems:
        return CheckReport(
            name="ml4",
            passed=False,
            worst_margin=float("-inf"),
            samples=a.size,
            tolerance=slack,
            applicable=False,
            details=problems,
        )
    n = np.arange(1, a.size + 1, dtype=float)
    ratios = a * n**alpha / A
    details = [
        f"empirical_constant={float(ratios.max())!r}",
        f"first_half_constant={float(ratios[: max(1, a.size // 2)].max())!r}",
    ]
    return _finish("ml4", margins, a.size, slack, details)


def fit_log_slope(residuals, window: tuple[int, int]) -> RateFit:
    """Least-squares slope of log residual versus log m over the window.

    ``residuals`` is a trace or an array indexed so entry i is the
    residual after step i+1. Zero residuals inside the window shrink it to
    the positive prefix; the returned window is the one actually used.
    """
    if isinstance(residuals, GreedyTrace):
        res = residuals.residual_norms()[1:]
    else:
        res = np.asarray(residuals, dtype=float)
    m_lo, m_hi = int(window[0]), int(window[1])
    if m_lo < 2:
        raise ValueError(f"window must start at m >= 2; got {m_lo}")
    m_hi = min(m_hi, res.size)
    if m_hi < m_lo + 1:
        raise ValueError(f"window [{m_lo}, {m_hi}] has fewer than two points")
    values = res[m_lo - 1 : m_hi]
    positive = values > 0.0
    if not positive.all():
        first_zero = int(np.argmin(positive))
        m_hi = m_lo + first_zero - 1
        values = res[m_lo - 1 : m_hi]
        if values.size < 2:
            raise ValueError(
                f"window [{m_lo}, {window[1]}] collapses below two positive residuals"
            )
    log_m = np.log(np.arange(m_lo, m_hi + 1, dtype=float))
    log_r = np.log(values)
    slope, intercept = np.polyfit(log_m, log_r, 1)
    fitted = slope * log_m + intercept
    ss_res = float(((log_r - fitted) ** 2).sum())
    ss_tot = float(((log_r - log_r.mean()) ** 2).sum())
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        window=(m_lo, m_hi),
        r_squared=r_squared,
    )


def check_orthogonality(
    space: LpSpace,
    f,
    basis,
    cfg: SolverConfig | None = None,
    n_competitors: int = 100,
    seed: int = 0,
    func_tol: float = 1e-7,
    comp_tol: float = 1e-9,
) -> CheckReport:
    """Best-approximant certificate: F_{f - f_L} kills the subspace.

    Computes the best approximant f_L from span(basis), asserts
    |F_{f-f_L}(b_i)| <= func_tol for every basis element, and verifies
    sufficiency by sampling competitors g in the subspace and requiring
    ||f - f_L|| <= ||f - g|| + comp_tol. Margins are normalized so 0 is
    the pass line.
    """
    cfg = cfg or SolverConfig()
    coeffs, residual = best_approx_subspace(space, f, basis, cfg)
    res_norm = lp_norm(space, residual)
    if res_norm <= 1e-10:
        raise ValueError("f lies in span(basis); the certificate is degenerate")
    F = norming_functional(space, residual)
    margins = [func_tol - abs(apply_functional(F, b)) for b in basis]
    rng = np.random.default_rng(seed)
    B = np.column_stack([np.asarray(b, dtype=np.complex128) for b in basis])
    scale = float(np.abs(coeffs).mean()) + 1.0
    k = len(basis)
    for _ in range(int(n_competitors)):
        offset = scale * (rng.standard_normal(k) + 1j * rng.standard_normal(k))
        g = B @ (coeffs + offset)
        margins.append(
            lp_norm(space, np.asarray(f, dtype=np.complex128) - g) + comp_tol - res_norm
        )
    return _finish("ll1_certificate", margins, k + int(n_competitors), 0.0)


def check_dual_norm_supremum(
    F: DualFunctional,
    dictionary: Dictionary,
    n_samples: int = 500,
    seed: int = 0,
    tol: float = 1e-9,
    attain_tol: float = 1e-6,
) -> CheckReport:
    """Dictionary sup equals hull sup, sampled.

    |F| over random absolutely-convex combinations never exceeds the
    dictionary max |F(g)|, Re F over random convex combinations never
    exceeds max Re F(g), and both sampled sups attain the dictionary value
    because the aligned extreme atom is included among the samples.
    """
    rng = np.random.default_rng(seed)
    n = int(n_samples)
    count = len(dictionary)
    values = dictionary.atoms @ F.coeffs
    abs_max, idx_abs = dict_dual_norm(F, dictionary)
    re_max = float(values.real.max())

    w = rng.standard_normal((n, count)) + 1j * rng.standard_normal((n, count))
    w /= np.abs(w).sum(axis=1)[:, None]
    abs_samples = np.abs(w @ values)
    # The phase-aligned argmax atom is itself an absolutely-convex
    # combination and scores exactly the dictionary max.
    abs_samples = np.append(abs_samples, abs(values[idx_abs]))

    c = rng.uniform(0.0, 1.0, size=(n, count))
    c /= c.sum(axis=1)[:, None]
    re_samples = (c @ values).real
    re_samples = np.append(re_samples, values.real[int(np.argmax(values.real))])

    margins = np.concatenate(
        [
            abs_max + tol - abs_samples,
            re_max + tol - re_samples,
            [abs_samples.max() - (abs_max - attain_tol)],
            [re_samples.max() - (re_max - attain_tol)],
        ]
    )
    return _finish("ll2_ll3_sampling", margins, 2 * n + 2, 0.0)


def check_condition_43(
    tau: WeaknessSequence,
    theta: float,
    n_terms: int,
    params: SmoothnessParams,
) -> CheckReport:
    """Diagnostic partial sums of t_m * s^{-1}(theta t_m).

    s(u) = rho_bound(u)/u = gamma u^(q-1), so s^{-1}(v) = (v/gamma)^(1/(q-1)).
    Finite evidence cannot decide divergence, so this never fails; the
    report carries checkpoint partial sums and the log-log growth trend of
    the partial-sum sequence.
    """
    theta = float(theta)
    if theta <= 0.0:
        raise ValueError(f"theta must be > 0; got {theta}")
    n_terms = int(n_terms)
    t = np.array([tau.value(m) for m in range(1, n_terms + 1)])
    terms = t * (theta * t / params.gamma) ** (1.0 / (params.q - 1.0))
    partial = np.cumsum(terms)
    details = [
        f"partial_sum_quarter={float(partial[max(0, n_terms // 4 - 1)])!r}",
        f"partial_sum_half={float(partial[max(0, n_terms // 2 - 1)])!r}",
        f"partial_sum_full={float(partial[-1])!r}",
    ]
    tail = partial[n_terms // 2 :]
    if tail.size >= 2 and tail.min() > 0.0:
        idx = np.arange(n_terms // 2 + 1, n_terms + 1, dtype=float)
        trend = float(np.polyfit(np.log(idx), np.log(tail), 1)[0])
        details.append(f"tail_growth_exponent={trend!r}")
    else:
        details.append("tail_growth_exponent=nan (vanishing partial sums)")
    return CheckReport(
        name="condition_43_diagnostic",
        passed=True,
        worst_margin=float(partial[-1]),
        samples=n_terms,
        tolerance=0.0,
        details=details,
    )


def check_monotone(trace: GreedyTrace, slack: float = DEFAULT_SLACK) -> CheckReport:
    """Residual norms never increase along the trace (within solver slack)."""
    norms = trace.residual_norms()
    margins = (norms[:-1] - norms[1:] + slack).tolist()
    return _finish("residual_monotone", margins, len(trace.records), 0.0)


def check_trivial_step(trace: GreedyTrace, slack: float = 1e-10) -> CheckReport:
    """Trivial-step safety of the incremental loops: ||f_m|| <= ||f_{m-1}|| + 2/m."""
    norms = trace.residual_norms()
    margins = [
        norms[r.m - 1] + 2.0 / r.m + slack - norms[r.m] for r in trace.records
    ]
    return _finish("trivial_step_bound", margins, len(trace.records), 0.0)


def check_barycentric(
    trace: GreedyTrace,
    dictionary: Dictionary,
    tol: float = 1e-10,
    weight_tol: float = 1e-12,
) -> CheckReport:
    """Recorded selections rebuild every stored G_m.

    G_m must equal (1/m) sum_{j<=m} nu_j phi_j within ``tol``. For the
    convex variant the implied weights must additionally be nonnegative
    reals summing to one within ``weight_tol``.
    """
    margins = []
    details = []
    running = np.zeros(dictionary.space.dim, dtype=np.complex128)
    counts: dict[int, int] = {}
    for record, stored in zip(trace.records, trace.approximants):
        running = running + complex(record.phase) * dictionary.atoms[record.selected_index]
        rebuilt = running / record.m
        drift = float(np.abs(rebuilt - stored).max())
        margins.append(tol - drift)
        if drift > tol:
            details.append(f"step {record.m}: drift {drift:.3e}")
        if trace.algorithm == "iacc":
            counts[record.selected_index] = counts.get(record.selected_index, 0) + 1
            weights = [c / record.m for c in counts.values()]
            margins.append(min(weights))
            margins.append(weight_tol - abs(sum(weights) - 1.0))
            if abs(record.phase - 1.0) > weight_tol:
                margins.append(-abs(record.phase - 1.0))
                details.append(f"step {record.m}: non-unit weight phase")
    return _finish("barycentric_reconstruction", margins, len(trace.records), 0.0, details)
