"""Command line front end.

Subcommands:

  check-regime  evaluate the boundedness classifier for a config
  run           integrate the system and write diagnostics
  sweep         run or classify a grid of parameter variations
  audit         report interpolation-inequality exponents and constants

Exit codes: 0 success (for run: completed bounded), 1 config or input
errors, 2 check-regime found no applicable boundedness case, 3 blow-up
detected, 4 step-size collapse.

Outputs are written deterministically: float fields use repr, rows keep
a fixed order, and no timestamps are embedded, so repeated invocations
of the same config produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import (ConfigError, RunConfig, SweepAxis, parse_config,
                     serialize_config, substitute_parameter)
from .diagnostics import (audit_gn_on_field, default_diag_k_set,
                          gn_theta_lk, gn_theta_lrho, k_floor_lrho)
from .grid import Field, Grid, GridError, SnapshotFormatError, write_snapshot
from .model import ParameterError, RegimeVerdict, classify_regime
from .solver import LinearSolveError, RunOutcome, RunStatus, run

_STATUS_EXIT = {
    RunStatus.COMPLETED_BOUNDED: 0,
    RunStatus.BLOWUP_DETECTED: 3,
    RunStatus.STEP_COLLAPSE: 4,
}


def _load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    return parse_config(text)


def _require_run_dimensions(cfg: RunConfig) -> None:
    if cfg.params.n != cfg.grid.dim:
        raise ConfigError(
            f"[params] n = {cfg.params.n} does not match the "
            f"{cfg.grid.dim}-dimensional domain; simulation needs n == dim "
            "(the classifier alone accepts any n)")


def _format_k(k: float) -> str:
    return str(int(k)) if float(k).is_integer() else repr(float(k))


def _verdict_dict(verdict: RegimeVerdict) -> dict:
    return {
        "theorem": verdict.theorem.value,
        "case": verdict.case_label.value,
        "growth_class": verdict.growth_class.value,
        "both_cases": verdict.both_cases,
        "margins": [
            {"name": m.name, "lhs": m.lhs, "rhs": m.rhs, "strict": m.strict,
             "slack": m.slack, "satisfied": m.satisfied}
            for m in verdict.margins
        ],
    }


def _print_verdict(verdict: RegimeVerdict) -> None:
    print(f"theorem: {verdict.theorem.value}")
    print(f"case: {verdict.case_label.value}")
    print(f"growth_class: {verdict.growth_class.value}")
    print(f"both_cases: {str(verdict.both_cases).lower()}")
    print("margins:")
    for m in verdict.margins:
        status = "ok" if m.satisfied else "fail"
        rel = "strict" if m.strict else "non-strict"
        print(f"  {m.name}: lhs={m.lhs:.6g} rhs={m.rhs:.6g} "
              f"slack={m.slack:.6g} [{rel}] {status}")


def cmd_check_regime(args) -> int:
    cfg = _load_config(args.config)
    verdict = classify_regime(cfg.params, cfg.production)
    _print_verdict(verdict)
    return 0 if verdict.holds() else 2


def _ensure_parent(path: str) -> None:
    parent = Path(path).parent
    if str(parent) not in ("", "."):
        parent.mkdir(parents=True, exist_ok=True)


def _write_diagnostics_csv(path: str, outcome: RunOutcome,
                           ks: tuple[float, ...]) -> None:
    _ensure_parent(path)
    header = ["t", "dt_used", "mass", "linf_u", "linf_v", "linf_w",
              "nonlocal_beta"]
    for k in ks:
        kk = _format_k(k)
        header += [f"lk_norm_{kk}", f"phi_{kk}", f"grad_term_{kk}"]
    header.append("blowup_flag")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in outcome.records:
            row = [repr(rec.t), repr(rec.dt_used), repr(rec.mass),
                   repr(rec.linf_u), repr(rec.linf_v), repr(rec.linf_w),
                   repr(rec.nonlocal_beta)]
            for k in ks:
                row += [repr(rec.lk_norms[k]), repr(rec.phi[k]),
                        repr(rec.grad_terms[k])]
            row.append("1" if rec.blowup_flag else "0")
            writer.writerow(row)


def _write_summary(path: str, cfg: RunConfig, outcome: RunOutcome,
                   verdict: RegimeVerdict) -> None:
    _ensure_parent(path)
    doc = {
        "status": outcome.status.value,
        "t_final": outcome.t_final,
        "mass_max": outcome.mass_max,
        "sup_linf_u": outcome.sup_linf_u,
        "regime_verdict": _verdict_dict(verdict),
        "config_echo": serialize_config(cfg),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _snapshot_writer(prefix: str, every: int):
    def observer(state):
        if every > 0 and state.step_count % every == 0:
            for name, field in (("u", state.u), ("v", state.v),
                                ("w", state.w)):
                write_snapshot(f"{prefix}{name}_step{state.step_count:06d}.chtx",
                               field)
    return observer


def _execute_run(cfg: RunConfig) -> RunOutcome:
    _require_run_dimensions(cfg)
    grid = cfg.grid
    u0 = cfg.initial_u.build(grid, cfg.seed)
    v0 = w0 = None
    if cfg.params.tau == 1:
        v0 = cfg.initial_v.build(grid, cfg.seed)
        w0 = cfg.initial_w.build(grid, cfg.seed)
    observer = None
    if cfg.output.snapshot_prefix and cfg.output.snapshot_every > 0:
        _ensure_parent(cfg.output.snapshot_prefix + "x")
        observer = _snapshot_writer(cfg.output.snapshot_prefix,
                                    cfg.output.snapshot_every)
    return run(cfg.params, cfg.production, grid, u0, v0, w0, cfg.solver,
               observer=observer)


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    verdict = classify_regime(cfg.params, cfg.production)
    outcome = _execute_run(cfg)
    ks = cfg.solver.diag_k_set or default_diag_k_set(cfg.params.n)
    _write_diagnostics_csv(cfg.output.csv, outcome, ks)
    _write_summary(cfg.output.summary, cfg, outcome, verdict)
    if cfg.output.snapshot_prefix:
        _ensure_parent(cfg.output.snapshot_prefix + "x")
        state = outcome.final_state
        for name, field in (("u", state.u), ("v", state.v), ("w", state.w)):
            write_snapshot(f"{cfg.output.snapshot_prefix}{name}_final.chtx",
                           field)
    print(f"status={outcome.status.value} t_final={outcome.t_final!r} "
          f"sup_linf_u={outcome.sup_linf_u!r} mass_max={outcome.mass_max!r}")
    return _STATUS_EXIT[outcome.status]


def _thread_count() -> int:
    raw = os.environ.get("CHTX_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(f"CHTX_THREADS = {raw!r} is not an integer") \
                from None
        if n < 1:
            raise ConfigError("CHTX_THREADS must be at least 1")
        return n
    return min(8, os.cpu_count() or 1)


def _parse_cli_axis(text: str) -> SweepAxis:
    if "=" not in text:
        raise ConfigError(f"--axis must look like name=v1,v2,... got {text!r}")
    name, _, rest = text.partition("=")
    values = [tok.strip() for tok in rest.split(",") if tok.strip()]
    if not values:
        raise ConfigError(f"--axis {text!r} lists no values")
    try:
        vals = tuple(float(v) for v in values)
    except ValueError:
        raise ConfigError(f"--axis {text!r}: values must be numbers") from None
    return SweepAxis(name=name.strip(), values=vals)


def _sweep_cell(base: RunConfig, names: tuple[str, ...],
                values: tuple[float, ...], classify_only: bool) -> dict:
    row: dict[str, str] = {}
    for name, value in zip(names, values):
        row[name] = repr(float(value))
    try:
        cfg = base
        for name, value in zip(names, values):
            cfg = substitute_parameter(cfg, name, value)
        verdict = classify_regime(cfg.params, cfg.production)
        row["theorem"] = verdict.theorem.value
        row["case"] = verdict.case_label.value
        row["growth_class"] = verdict.growth_class.value
        if not classify_only:
            outcome = _execute_run(cfg)
            row["status"] = outcome.status.value
            row["t_final"] = repr(outcome.t_final)
            row["sup_linf_u"] = repr(outcome.sup_linf_u)
            row["mass_max"] = repr(outcome.mass_max)
        row["error"] = ""
    except (ConfigError, ParameterError, GridError, ValueError,
            LinearSolveError) as exc:
        row["error"] = str(exc)
    return row


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    axes = tuple(_parse_cli_axis(a) for a in args.axis) if args.axis \
        else cfg.sweep.axes
    if not axes:
        raise ConfigError("sweep needs at least one axis (config [sweep] "
                          "axis1 or --axis name=v1,v2,...)")
    if len(axes) > 2:
        raise ConfigError("at most two sweep axes are supported")
    classify_only = cfg.sweep.classify_only or args.classify_only
    out_path = args.output or cfg.sweep.output

    names = tuple(a.name for a in axes)
    cells = list(itertools.product(*(a.values for a in axes)))
    workers = _thread_count()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(
            lambda vals: _sweep_cell(cfg, names, vals, classify_only), cells))

    columns = (["index"] + list(names)
               + ["theorem", "case", "growth_class",
                  "status", "t_final", "sup_linf_u", "mass_max", "error"])
    _ensure_parent(out_path)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for idx, row in enumerate(rows):
            writer.writerow([str(idx)] + [row.get(c, "") for c in columns[1:]])
    print(f"wrote {out_path} with {len(rows)} rows "
          f"({len(axes)} axes, {workers} workers)")
    return 0


def _sample_fields(grid: Grid, count: int, seed: int):
    """Smooth strictly positive fields for the audit sample, seeded."""
    rng = np.random.default_rng(seed)
    modes = 4
    for _ in range(count):
        vals = np.ones(grid.shape)
        for axis in range(grid.dim):
            x = grid.coordinates[axis] / grid.lengths[axis]
            coeffs = rng.uniform(-1.0, 1.0, size=modes)
            bump = sum(c * np.cos((m + 1) * np.pi * x)
                       for m, c in enumerate(coeffs)) / (2.0 * modes)
            shape = [1] * grid.dim
            shape[axis] = -1
            vals = vals + bump.reshape(shape)
        scale = float(rng.uniform(0.5, 2.0))
        yield Field(grid, scale * np.maximum(vals, 0.05))


def cmd_audit(args) -> int:
    cfg = _load_config(args.config)
    au = cfg.audit
    n_dim = cfg.grid.dim

    lrho_cases = au.lrho_cases
    if not lrho_cases:
        rho = cfg.production.rho
        floor = k_floor_lrho(rho, cfg.params.n)
        k0 = max(2.0, math.floor(floor) + 1.0)
        lrho_cases = tuple((k0 + d, rho, cfg.params.n) for d in (0.0, 2.0, 4.0))
    lk_cases = au.lk_cases or ((2.0, cfg.params.n), (4.0, cfg.params.n))

    print("interpolation exponents (theta against the k-energy):")
    for k, rho, n in lrho_cases:
        check = gn_theta_lrho(k, rho, n)
        print(f"  k={k:g} rho={rho:g} n={n}: theta={check.theta:.12g} "
              f"exponent={check.exponent_check:.12g} "
              f"in_range={check.in_range} floor={k_floor_lrho(rho, n):.12g}")
    print("interpolation exponents (L^k against mass):")
    for k, n in lk_cases:
        print(f"  k={k:g} n={n}: theta={gn_theta_lk(k, n):.12g}")

    check = gn_theta_lrho(au.sample_k, au.sample_rho, n_dim)
    if not check.in_range:
        raise ConfigError(
            f"[audit] sample_k = {au.sample_k:g} is not admissible for "
            f"sample_rho = {au.sample_rho:g} in dimension {n_dim} "
            f"(needs k > {k_floor_lrho(au.sample_rho, n_dim):g})")
    constants = []
    for field in _sample_fields(cfg.grid, au.samples, au.seed):
        audit = audit_gn_on_field(field, au.sample_k, au.sample_rho, n_dim)
        constants.append(audit.implied_constant)
    print(f"implied constants over {au.samples} smooth sample fields "
          f"(k={au.sample_k:g}, rho={au.sample_rho:g}, n={n_dim}, "
          f"seed={au.seed}):")
    print(f"  min={min(constants)!r}")
    print(f"  mean={sum(constants) / len(constants)!r}")
    print(f"  max={max(constants)!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chtx",
        description="Chemotaxis system with nonlocal logistic damping: "
                    "classify boundedness regimes, run simulations, sweep "
                    "parameters, audit interpolation inequalities.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-regime",
                       help="evaluate the boundedness classifier")
    p.add_argument("config")
    p.set_defaults(func=cmd_check_regime)

    p = sub.add_parser("run", help="integrate the system")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a parameter sweep")
    p.add_argument("config")
    p.add_argument("--axis", action="append", default=[],
                   metavar="NAME=V1,V2,...",
                   help="sweep axis; may be given twice, overrides [sweep]")
    p.add_argument("--classify-only", action="store_true",
                   help="classify each cell without simulating")
    p.add_argument("--output", default=None, help="sweep CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("audit",
                       help="report interpolation exponents and constants")
    p.add_argument("config")
    p.set_defaults(func=cmd_audit)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ParameterError, GridError, SnapshotFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LinearSolveError as exc:
        print(f"linear solver failure: {exc} "
              f"(relative residual {exc.relative_residual:g})",
              file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
