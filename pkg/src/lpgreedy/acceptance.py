"""The acceptance battery behind ``verify``: one function per criterion.

Every criterion returns a CheckReport whose margins already fold in the
criterion's stated tolerance, so 0 is the pass line. ``full`` runs the
complete battery at the full sample counts; ``quick`` is a
scaled-down smoke profile of the same checks.
"""

from __future__ import annotations

import filecmp
import os
import tempfile

import numpy as np

from .algorithms import (
    RelaxationSchedule,
    WeaknessSequence,
    run_gawr,
    run_iac,
    run_iacc,
    run_wgafr,
)
from .analysis import (
    CheckReport,
    _finish,
    check_barycentric,
    check_dual_norm_supremum,
    check_hl1,
    check_ll0,
    check_trivial_step,
    check_ml1_trace,
    check_ml3_trace,
    check_ml4,
    check_monotone,
    check_orthogonality,
    fit_log_slope,
)
from .config import ExperimentConfig, stable_seed
from .dictionaries import generate_dictionary, make_target
from .spaces import LpSpace, _functional_rows, _norm_rows, norming_functional

__all__ = ["ALL_CRITERIA"]

_PS = (1.5, 2.0, 3.0, 4.0)
_RUN_PS = (1.5, 2.0, 3.0)


def _complex_rows(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def criterion_duality_identities(seed=0, profile="full") -> CheckReport:
    """F_h(h) = ||h|| and ||F_h||_dual = 1, both within 1e-9 relative."""
    n = 1000 if profile == "full" else 100
    tol = 1e-9
    margins = []
    for p, dim in zip(_PS, (8, 16, 32, 64)):
        rng = np.random.default_rng(stable_seed(seed, "duality", p))
        h = _complex_rows(rng, (n, dim))
        norms = _norm_rows(p, h)
        coeffs = _functional_rows(p, h, norms)
        value_gap = np.abs((coeffs * h).sum(axis=1) - norms) / norms
        dual_gap = np.abs(_norm_rows(p / (p - 1.0), coeffs) - 1.0)
        margins.append(tol - value_gap)
        margins.append(tol - dual_gap)
    return _finish("duality_identities", np.concatenate(margins), 4 * n, 0.0)


def criterion_ll0_sandwich(seed=0, profile="full") -> CheckReport:
    """Two-sided smoothness sandwich, 1e-9 absolute slack, zero violations."""
    n = 10_000 if profile == "full" else 1000
    margins = []
    samples = 0
    for p, dim in zip(_PS, (8, 16, 32, 64)):
        report = check_ll0(LpSpace(p, dim), n, stable_seed(seed, "ll0", p), tol=1e-9)
        margins.append(report.worst_margin + report.tolerance)
        samples += report.samples
    return _finish("ll0_sandwich", margins, samples, 0.0)


def criterion_ll1_certificate(seed=0, profile="full") -> CheckReport:
    """Best-approximant certificate and competitor sweep on random subspaces."""
    instances = 200 if profile == "full" else 10
    competitors = 100 if profile == "full" else 30
    dim, k = 6, 3
    margins = []
    for p in _PS:
        space = LpSpace(p, dim)
        for i in range(instances):
            rng = np.random.default_rng(stable_seed(seed, "ll1", p, i))
            f = _complex_rows(rng, dim)
            basis = list(_complex_rows(rng, (k, dim)))
            report = check_orthogonality(
                space,
                f,
                basis,
                n_competitors=competitors,
                seed=stable_seed(seed, "ll1-comp", p, i),
            )
            margins.append(report.worst_margin)
    return _finish("ll1_certificate", margins, 4 * instances, 0.0)


def criterion_ll2_ll3_sampling(seed=0, profile="full") -> CheckReport:
    """Hull suprema never exceed the dictionary max; sampled sup attains it."""
    n = 500 if profile == "full" else 100
    functionals = 3 if profile == "full" else 1
    margins = []
    samples = 0
    for p in _PS:
        space = LpSpace(p, 12)
        dictionary = generate_dictionary(space, 24, "gaussian", stable_seed(seed, "ll2-dict", p))
        for i in range(functionals):
            rng = np.random.default_rng(stable_seed(seed, "ll2-h", p, i))
            F = norming_functional(space, _complex_rows(rng, 12))
            report = check_dual_norm_supremum(
                F, dictionary, n_samples=n, seed=stable_seed(seed, "ll2-s", p, i)
            )
            margins.append(report.worst_margin)
            samples += report.samples
    return _finish("ll2_ll3_sampling", margins, samples, 0.0)


def _wgafr_case(seed, i, p, t, policy, iters, eps=0.0):
    space = LpSpace(p, 12)
    dictionary = generate_dictionary(space, 24, "gaussian", stable_seed(seed, "dict", i))
    target = make_target(dictionary, "a1", 4, eps, stable_seed(seed, "target", i))
    tau = WeaknessSequence.constant(t)
    trace = run_wgafr(space, dictionary, target, tau, iters, policy)
    return space, dictionary, target, tau, trace


def criterion_wgafr_monotonicity(seed=0, profile="full") -> CheckReport:
    """Residual norms never increase, 1e-8 slack, every step of every run."""
    runs = 50 if profile == "full" else 6
    iters = 40 if profile == "full" else 25
    margins = []
    steps = 0
    for i in range(runs):
        p = _RUN_PS[i % 3]
        t, policy = ((1.0, "argmax"), (0.5, "first_qualifying"))[i % 2]
        _, _, _, _, trace = _wgafr_case(seed, i, p, t, policy, iters)
        report = check_monotone(trace, slack=1e-8)
        margins.append(report.worst_margin)
        steps += report.samples
    return _finish("wgafr_monotonicity", margins, steps, 0.0)


def criterion_ml1_per_step(seed=0, profile="full") -> CheckReport:
    """Free-relaxation residual recursion at every step and grid point."""
    runs = 50 if profile == "full" else 6
    iters = 50 if profile == "full" else 25
    margins = []
    steps = 0
    for i in range(runs):
        p = _RUN_PS[i % 3]
        t, policy = ((1.0, "argmax"), (0.5, "first_qualifying"))[i % 2]
        space, _, target, tau, trace = _wgafr_case(seed, 1000 + i, p, t, policy, iters)
        report = check_ml1_trace(space, trace, tau, target.A_eps, target.eps, slack=1e-8)
        margins.append(report.worst_margin + 1e-8)
        steps += report.samples
    return _finish("ml1_per_step", margins, steps, 0.0)


def criterion_ml3_per_step(seed=0, profile="full") -> CheckReport:
    """Relaxed-loop residual recursion with r_k = 2/(k+2), every step."""
    runs = 50 if profile == "full" else 6
    iters = 60 if profile == "full" else 30
    margins = []
    steps = 0
    for i in range(runs):
        p = _RUN_PS[i % 3]
        t = (1.0, 0.5)[i % 2]
        space = LpSpace(p, 12)
        dictionary = generate_dictionary(space, 24, "gaussian", stable_seed(seed, "ml3-dict", i))
        target = make_target(dictionary, "a1", 4, 0.0, stable_seed(seed, "ml3-target", i))
        trace = run_gawr(
            space,
            dictionary,
            target,
            WeaknessSequence.constant(t),
            RelaxationSchedule.harmonic(),
            iters,
        )
        report = check_ml3_trace(space, trace, target.A_eps, target.eps, t, slack=1e-8)
        margins.append(report.worst_margin + 1e-8)
        steps += report.samples
    return _finish("ml3_per_step", margins, steps, 0.0)


def criterion_mt2_explicit_bound(seed=0, profile="full") -> CheckReport:
    """||f_m||^2 <= 400/(1+m) for l_2, t = 1, exact unit-mass targets."""
    runs = 50 if profile == "full" else 4
    iters = 500 if profile == "full" else 150
    margins = []
    steps = 0
    for i in range(runs):
        space = LpSpace(2.0, 16)
        dictionary = generate_dictionary(space, 32, "gaussian", stable_seed(seed, "mt2-dict", i))
        target = make_target(dictionary, "a1", 8, 0.0, stable_seed(seed, "mt2-target", i))
        trace = run_wgafr(space, dictionary, target, WeaknessSequence.constant(1.0), iters)
        norms = trace.residual_norms()
        for record in trace.records:
            margins.append(400.0 / (1.0 + record.m) - norms[record.m] ** 2)
        steps += len(trace.records)
    return _finish("mt2_explicit_bound", margins, steps, 0.0)


def criterion_orthonormal_exactness(seed=0, profile="full") -> CheckReport:
    """Sparsity-k targets over the canonical basis resolve in exactly k steps."""
    ks = range(1, 9) if profile == "full" else range(1, 5)
    seeds_per_k = 2 if profile == "full" else 1
    margins = []
    runs = 0
    for k in ks:
        for j in range(seeds_per_k):
            space = LpSpace(2.0, 8)
            dictionary = generate_dictionary(space, 8, "canonical")
            target = make_target(dictionary, "a1", k, 0.0, stable_seed(seed, "exact", k, j))
            trace = run_wgafr(space, dictionary, target, WeaknessSequence.constant(1.0), k + 2)
            norms = trace.residual_norms()
            if len(norms) <= k:
                margins.append(float("-inf"))  # run stopped before k steps
                continue
            margins.append(1e-8 - norms[k])
            margins.append(norms[k - 1] - 1e-8)
            runs += 1
    return _finish("orthonormal_exactness", margins, runs, 0.0)


def criterion_iac_rate(seed=0, profile="full") -> CheckReport:
    """Incremental rate: slope <= -0.4 on >= 90% of runs; trivial-step bound always."""
    runs = 50 if profile == "full" else 8
    iters = 200 if profile == "full" else 120
    needed = 45 if profile == "full" else 6
    slopes = []
    step_bound_margins = []
    for i in range(runs):
        space = LpSpace(2.0, 16)
        dictionary = generate_dictionary(space, 32, "gaussian", stable_seed(seed, "iac-dict", i))
        target = make_target(dictionary, "a1", 6, 0.0, stable_seed(seed, "iac-target", i))
        trace = run_iac(space, dictionary, target, K1=1.0, iters=iters)
        slopes.append(fit_log_slope(trace, (10, iters)).slope)
        step_bound_margins.append(check_trivial_step(trace).worst_margin)
    qualifying = sum(1 for s in slopes if s <= -0.4)
    margins = [float(qualifying - needed), min(step_bound_margins)]
    details = [
        f"qualifying_runs={qualifying}/{runs} (need {needed})",
        f"median_slope={float(np.median(slopes))!r}",
    ]
    return _finish("iac_rate", margins, runs, 0.0, details)


def criterion_iacc_barycentric(seed=0, profile="full") -> CheckReport:
    """Every stored incremental approximant rebuilds from its selections."""
    runs = 20 if profile == "full" else 4
    iters = 150 if profile == "full" else 80
    margins = []
    steps = 0
    for i in range(runs):
        p = _RUN_PS[i % 3]
        space = LpSpace(p, 12)
        dictionary = generate_dictionary(space, 24, "gaussian", stable_seed(seed, "iacc-dict", i))
        target = make_target(dictionary, "conv", 5, 0.0, stable_seed(seed, "iacc-target", i))
        trace = run_iacc(space, dictionary, target, K1=1.0, iters=iters)
        report = check_barycentric(trace, dictionary, tol=1e-10, weight_tol=1e-12)
        margins.append(report.worst_margin)
        steps += report.samples
    return _finish("iacc_barycentric", margins, steps, 0.0)


def criterion_gawr_rate_proxy(seed=0, profile="full") -> CheckReport:
    """Relaxed-loop rate proxy: slope <= -0.35 on >= 90% of runs."""
    runs = 50 if profile == "full" else 8
    iters = 300 if profile == "full" else 150
    needed = 45 if profile == "full" else 6
    slopes = []
    for i in range(runs):
        space = LpSpace(2.0, 16)
        dictionary = generate_dictionary(space, 32, "gaussian", stable_seed(seed, "gawr-dict", i))
        target = make_target(dictionary, "a1", 6, 0.0, stable_seed(seed, "gawr-target", i))
        trace = run_gawr(
            space,
            dictionary,
            target,
            WeaknessSequence.constant(1.0),
            RelaxationSchedule.harmonic(),
            iters,
        )
        slopes.append(fit_log_slope(trace, (10, iters)).slope)
    qualifying = sum(1 for s in slopes if s <= -0.35)
    details = [
        f"qualifying_runs={qualifying}/{runs} (need {needed})",
        f"median_slope={float(np.median(slopes))!r}",
    ]
    return _finish("gawr_rate_proxy", [float(qualifying - needed)], runs, 0.0, details)


def _synthetic_hl1(rng, length=60):
    C1 = 10.0 ** rng.uniform(-1.0, 1.0)
    a = rng.uniform(0.05, 0.9, size=length) / C1
    x = [C1 * rng.uniform(0.2, 1.0)]
    equality = rng.uniform() < 0.5
    for m in range(length - 1):
        factor = 1.0 if equality else rng.uniform(0.7, 1.0)
        x.append(x[-1] * (1.0 - x[-1] * a[m]) * factor)
    return np.array(x), C1, a


def _synthetic_ml4(rng, length=80):
    alpha = rng.uniform(0.2, 0.7)
    gamma_param = rng.uniform(alpha + 0.05, 1.0)
    A = rng.uniform(1.0, 3.0)
    a = [A * rng.uniform(0.1, 0.9)]
    equality = rng.uniform() < 0.5
    for n in range(2, length + 1):
        v = n - 1
        if v >= 2 and a[-1] >= A * v ** (-alpha):
            factor = 1.0 if equality else rng.uniform(0.8, 1.0)
            a.append(a[-1] * (1.0 - gamma_param / v) * factor)
        else:
            factor = 1.0 if equality else rng.uniform(0.0, 1.0)
            a.append(a[-1] + A * v ** (-alpha) * factor)
    return np.array(a), alpha, gamma_param, A


def criterion_sequence_bounds(seed=0, profile="full") -> CheckReport:
    """Recursion and power-decay sequence bounds on synthetic generators."""
    count = 100 if profile == "full" else 20
    margins = []
    details = []
    for i in range(count):
        rng = np.random.default_rng(stable_seed(seed, "hl1-seq", i))
        x, C1, a = _synthetic_hl1(rng)
        report = check_hl1(x, C1, a)
        if not report.applicable:
            margins.append(float("-inf"))
            details.append(f"hl1 sequence {i} inapplicable: {report.details}")
        else:
            margins.append(report.worst_margin + report.tolerance)
    for i in range(count):
        rng = np.random.default_rng(stable_seed(seed, "ml4-seq", i))
        a, alpha, gamma_param, A = _synthetic_ml4(rng)
        report = check_ml4(a, alpha, gamma_param, A)
        if not report.applicable:
            margins.append(float("-inf"))
            details.append(f"ml4 sequence {i} inapplicable: {report.details}")
        else:
            margins.append(report.worst_margin + report.tolerance)
    return _finish("sequence_bounds", margins, 2 * count, 0.0, details)


def criterion_determinism(seed=0, profile="full") -> CheckReport:
    """Identical configs produce byte-identical trace CSV and report JSON."""
    from .harness import run_experiment

    del profile
    configs = [
        ExperimentConfig.from_dict(
            {
                "space": {"p": 2.0, "dim": 8},
                "dictionary": {"kind": "gaussian", "count": 16, "seed": int(seed) + 3},
                "target": {"membership": "a1", "sparsity": 3, "eps": 0.0, "seed": int(seed) + 4},
                "algorithm": {"id": "wgafr", "iters": 15, "t": 1.0},
            }
        ),
        ExperimentConfig.from_dict(
            {
                "space": {"p": 1.5, "dim": 8},
                "dictionary": {"kind": "gaussian", "count": 16, "seed": int(seed) + 5},
                "target": {"membership": "a1", "sparsity": 3, "eps": 0.0, "seed": int(seed) + 6},
                "algorithm": {"id": "iac", "iters": 25, "k1": 1.0},
            }
        ),
    ]
    margins = []
    details = []
    for idx, config in enumerate(configs):
        with tempfile.TemporaryDirectory() as tmp:
            dir_a = os.path.join(tmp, "a")
            dir_b = os.path.join(tmp, "b")
            run_experiment(config, out_dir=dir_a)
            run_experiment(config, out_dir=dir_b)
            for name in (config.output.trace_csv, config.output.report_json):
                same = filecmp.cmp(
                    os.path.join(dir_a, name), os.path.join(dir_b, name), shallow=False
                )
                margins.append(0.0 if same else -1.0)
                if not same:
                    details.append(f"config {idx}: {name} differs between runs")
    return _finish("determinism", margins, 2 * len(configs), 0.0, details)


ALL_CRITERIA = (
    (1, "duality_identities", criterion_duality_identities),
    (2, "ll0_sandwich", criterion_ll0_sandwich),
    (3, "ll1_certificate", criterion_ll1_certificate),
    (4, "ll2_ll3_sampling", criterion_ll2_ll3_sampling),
    (5, "wgafr_monotonicity", criterion_wgafr_monotonicity),
    (6, "ml1_per_step", criterion_ml1_per_step),
    (7, "ml3_per_step", criterion_ml3_per_step),
    (8, "mt2_explicit_bound", criterion_mt2_explicit_bound),
    (9, "orthonormal_exactness", criterion_orthonormal_exactness),
    (10, "iac_rate", criterion_iac_rate),
    (11, "iacc_barycentric", criterion_iacc_barycentric),
    (12, "gawr_rate_proxy", criterion_gawr_rate_proxy),
    (13, "sequence_bounds", criterion_sequence_bounds),
    (14, "determinism", criterion_determinism),
)
