"""Seeded experiment execution, sweeps, and the verification battery.

Outputs are a pure function of the config text: no clocks, no environment
lookups. Every file embeds the config hash and the readers refuse
mismatched trace/report pairs.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import itertools
import json
import os
import sys

import numpy as np

from .algorithms import (
    GreedyTrace,
    read_trace_csv,
    run_gawr,
    run_iac,
    run_iacc,
    run_wgafr,
)
from .analysis import (
    CheckReport,
    check_barycentric,
    check_trivial_step,
    check_ml1_trace,
    check_ml3_trace,
    check_monotone,
    check_mt2_bound,
    fit_log_slope,
)
from .config import ConfigError, ExperimentConfig, SweepSpec, stable_seed
from .dictionaries import generate_dictionary, make_target
from .spaces import LpSpace, smoothness_params

__all__ = [
    "run_experiment",
    "run_sweep",
    "verify_suite",
    "read_report_json",
    "load_run",
    "stable_seed",
]

SWEEP_COLUMNS = (
    "cell",
    "replicate",
    "axes",
    "dictionary_seed",
    "target_seed",
    "final_residual",
    "slope",
    "checks_passed",
    "checks_total",
    "pass_rate",
    "error",
    "config_hash",
)


def _build(config: ExperimentConfig):
    space = LpSpace(config.space.p, config.space.dim)
    dictionary = generate_dictionary(
        space, config.dictionary.count, config.dictionary.kind, config.dictionary.seed
    )
    target = make_target(
        dictionary,
        config.target.membership,
        config.target.sparsity,
        config.target.eps,
        config.target.seed,
    )
    return space, dictionary, target


def _diag_slope(trace: GreedyTrace) -> CheckReport:
    """Fitted decay slope as a diagnostic report (never a failure)."""
    n = len(trace.records)
    report = CheckReport(
        name="rate_slope", passed=True, worst_margin=float("inf"), samples=n
    )
    try:
        fit = fit_log_slope(trace, (max(2, n // 10), n))
        report.details = [
            f"slope={fit.slope!r}",
            f"window={fit.window}",
            f"r_squared={fit.r_squared!r}",
        ]
    except ValueError as exc:
        report.details = [f"slope unavailable: {exc}"]
    return report


def run_experiment(
    config: ExperimentConfig, out_dir: str | None = None
) -> tuple[GreedyTrace, list[CheckReport]]:
    """Run one configured experiment and its per-algorithm checker suite.

    With ``out_dir`` set, writes the trace CSV and the report JSON there
    under the configured file names.
    """
    config.validate()
    space, dictionary, target = _build(config)
    cfg = config.solver
    a = config.algorithm
    tau = config.weakness()
    if a.id == "wgafr":
        trace = run_wgafr(space, dictionary, target, tau, a.iters, a.policy, cfg)
    elif a.id == "gawr":
        trace = run_gawr(
            space, dictionary, target, tau, config.relaxation(), a.iters, a.policy, cfg
        )
    elif a.id == "iac":
        trace = run_iac(space, dictionary, target, a.k1, a.iters, a.policy, cfg)
    else:
        trace = run_iacc(space, dictionary, target, a.k1, a.iters, a.policy, cfg)
    trace.config_hash = config.hash()

    params = smoothness_params(space)
    slack = config.checks.slack
    reports: list[CheckReport] = []
    if a.id == "wgafr":
        reports.append(check_monotone(trace, slack))
        reports.append(
            check_ml1_trace(
                space,
                trace,
                tau,
                target.A_eps,
                target.eps,
                slack=slack,
                grid_points=config.checks.lambda_points,
            )
        )
        reports.append(
            check_mt2_bound(trace, params, target.A_eps, target.eps, tau, slack)
        )
    elif a.id == "gawr":
        if tau.kind == "constant":
            reports.append(
                check_ml3_trace(space, trace, target.A_eps, target.eps, tau.t, slack)
            )
        else:
            reports.append(
                CheckReport(
                    name="ml3_per_step",
                    passed=True,
                    worst_margin=float("inf"),
                    samples=0,
                    applicable=False,
                    details=["recursion is stated for constant weakness only"],
                )
            )
    else:
        reports.append(check_trivial_step(trace))
        reports.append(check_barycentric(trace, dictionary))
        reports.append(_diag_slope(trace))

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        trace.write_csv(os.path.join(out_dir, config.output.trace_csv))
        report_obj = {
            "schema": "lpgreedy.report.v1",
            "config_hash": trace.config_hash,
            "algorithm": a.id,
            "config": config.to_dict(),
            "reports": [r.to_json_obj() for r in reports],
        }
        with open(os.path.join(out_dir, config.output.report_json), "w") as fh:
            json.dump(report_obj, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return trace, reports


def read_report_json(path) -> dict:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if obj.get("schema") != "lpgreedy.report.v1":
        raise ValueError(f"{path}: not a lpgreedy report file")
    return obj


def load_run(trace_path, report_path):
    """Load a trace/report pair, refusing mismatched config hashes."""
    meta, records = read_trace_csv(trace_path)
    report = read_report_json(report_path)
    if meta.get("config_hash") != report.get("config_hash"):
        raise ValueError(
            f"config hash mismatch: trace {meta.get('config_hash')!r} vs "
            f"report {report.get('config_hash')!r}"
        )
    return meta, records, report


def _run_cell(args):
    cell_index, replicate, assignments, config = args
    row = {
        "cell": cell_index,
        "replicate": replicate,
        "axes": json.dumps(assignments, sort_keys=True),
        "dictionary_seed": "",
        "target_seed": "",
        "final_residual": "",
        "slope": "",
        "checks_passed": "",
        "checks_total": "",
        "pass_rate": "",
        "error": "",
        "config_hash": "",
    }
    if isinstance(config, ConfigError):
        row["error"] = f"ConfigError: {config}"
        return row
    row["dictionary_seed"] = config.dictionary.seed
    row["target_seed"] = config.target.seed
    try:
        trace, reports = run_experiment(config)
        applicable = [r for r in reports if r.applicable]
        passed = sum(1 for r in applicable if r.passed)
        norms = trace.residual_norms()
        row["final_residual"] = repr(float(norms[-1]))
        try:
            n = len(trace.records)
            row["slope"] = repr(fit_log_slope(trace, (max(2, n // 10), n)).slope)
        except ValueError:
            row["slope"] = ""
        row["checks_passed"] = passed
        row["checks_total"] = len(applicable)
        row["pass_rate"] = repr(passed / len(applicable)) if applicable else ""
        row["config_hash"] = trace.config_hash
    except Exception as exc:  # propagate per-cell, keep the sweep running
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(
    spec: SweepSpec, out_dir: str | None = None, max_workers: int | None = None
) -> list[dict]:
    """Cartesian product of axes x replicate seeds; one summary row per cell.

    Cells run concurrently; rows are merged in deterministic cell order.
    Per-cell failures land in the row's ``error`` column and do not stop
    the sweep.
    """
    spec.validate()
    paths = [path for path, _ in spec.axes]
    value_lists = [values for _, values in spec.axes]
    jobs = []
    cell_index = 0
    for combo in itertools.product(*value_lists) if value_lists else [()]:
        for replicate in range(int(spec.replicate_seeds)):
            # Bad cell values are tallied as that cell's failure instead of
            # aborting the sweep; validation happens inside the cell.
            try:
                config = spec.base
                for path, value in zip(paths, combo):
                    config = config.with_field(path, value)
                config = config.with_field(
                    "dictionary.seed",
                    stable_seed(spec.base.dictionary.seed, cell_index, replicate, "dict"),
                )
                config = config.with_field(
                    "target.seed",
                    stable_seed(spec.base.target.seed, cell_index, replicate, "target"),
                )
            except ConfigError as exc:
                config = exc
            jobs.append((cell_index, replicate, dict(zip(paths, combo)), config))
        cell_index += 1
    if max_workers == 1 or len(jobs) == 1:
        rows = [_run_cell(job) for job in jobs]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(_run_cell, jobs))
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        with open(os.path.join(out_dir, "sweep_summary.csv"), "w", newline="") as fh:
            fh.write(buf.getvalue())
    return rows


def verify_suite(seed: int = 0, profile: str = "quick", stream=None) -> tuple[int, list[CheckReport]]:
    """Run the full property battery; print one pass/fail line per criterion.

    ``quick`` is a scaled-down smoke profile; ``full`` runs the complete
    acceptance battery. Returns (exit_code, reports) with exit code 0 only
    if every criterion passed.
    """
    from . import acceptance  # local import: acceptance builds on this module

    if profile not in ("quick", "full"):
        raise ConfigError(f"profile: must be 'quick' or 'full'; got {profile!r}")
    stream = stream if stream is not None else sys.stdout
    reports = []
    for number, name, fn in acceptance.ALL_CRITERIA:
        report = fn(seed=seed, profile=profile)
        reports.append(report)
        status = "PASS" if report.passed else "FAIL"
        margin = report.worst_margin
        margin_text = f"{margin:.3e}" if np.isfinite(margin) else str(margin)
        print(
            f"{status}  criterion {number:2d} {name}: "
            f"worst_margin={margin_text} samples={report.samples}",
            file=stream,
        )
    exit_code = 0 if all(r.passed for r in reports) else 1
    print(
        f"{sum(r.passed for r in reports)}/{len(reports)} criteria passed",
        file=stream,
    )
    return exit_code, reports
