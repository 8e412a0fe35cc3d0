"""Time integration for the chemotaxis system.

One step advances the signals first (an elliptic solve per signal for
tau = 0, one implicit Euler step for tau = 1), then takes an IMEX step
for the cell density: diffusion implicit, taxis and reaction explicit,
with the nonlocal damping integral frozen at the step start.

All implicit systems share the form (c*I - d*Lap) x = rhs and are solved
by conjugate gradients in the trapezoid-weighted inner product, the one
in which the zero-flux Laplacian is self-adjoint.  Step control is
deliberately crude: a trial step that drives u negative beyond a small
round-off band is rejected and the step size halved, permanently.  Once
dt falls below dt_min the run stops and reports StepCollapse, which is a
numerical failure, distinct from BlowupDetected (the solution actually
crossed the configured threshold or went non-finite).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import grid as _g
from .diagnostics import DiagnosticsRecord, record
from .grid import Field, Grid
from .model import ModelParams, ProductionSpec, eval_f, eval_g

NEGATIVE_BAND = 1e-12  # rejection when min u < -NEGATIVE_BAND * linf(u)


class LinearSolveError(RuntimeError):
    """Conjugate gradients exhausted its iteration budget."""

    def __init__(self, msg: str, relative_residual: float):
        super().__init__(msg)
        self.relative_residual = relative_residual


class RunStatus(str, enum.Enum):
    COMPLETED_BOUNDED = "CompletedBounded"
    BLOWUP_DETECTED = "BlowupDetected"
    STEP_COLLAPSE = "StepCollapse"


@dataclass(frozen=True)
class SolverConfig:
    """Time stepping and linear solver knobs.

    diag_k_set left empty means the per-dimension default from
    diagnostics.default_diag_k_set.  max_linear_iters of None allows ten
    sweeps of the grid size, far beyond the finite-termination bound.
    """

    dt: float
    t_end: float
    blowup_threshold: float = 1e8
    dt_min: float = 1e-10
    linear_tol: float = 1e-10
    max_linear_iters: int | None = None
    upwind: bool = False
    diag_k_set: tuple[float, ...] = ()

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.dt_min <= 0:
            raise ValueError("dt_min must be positive")
        if self.dt < self.dt_min:
            raise ValueError("dt must not start below dt_min")
        if self.blowup_threshold <= 0:
            raise ValueError("blowup_threshold must be positive")
        if self.linear_tol <= 0:
            raise ValueError("linear_tol must be positive")
        if self.max_linear_iters is not None and self.max_linear_iters < 1:
            raise ValueError("max_linear_iters must be at least 1")
        ks = tuple(sorted({float(k) for k in self.diag_k_set}))
        if any(k < 1 for k in ks):
            raise ValueError("diagnostic norm orders must be >= 1")
        object.__setattr__(self, "diag_k_set", ks)


@dataclass
class SimulationState:
    t: float
    u: Field
    v: Field
    w: Field
    step_count: int = 0
    last_dt: float = 0.0


@dataclass(frozen=True)
class RunOutcome:
    status: RunStatus
    t_final: float
    sup_linf_u: float
    mass_max: float
    records: tuple[DiagnosticsRecord, ...]
    final_state: SimulationState | None = field(repr=False, compare=False,
                                                default=None)


def _weighted_cg(apply_a, b: np.ndarray, weights: np.ndarray, x0: np.ndarray,
                 tol: float, max_iters: int) -> np.ndarray:
    """CG for an operator self-adjoint in the weighted inner product.

    Stops when the weighted residual norm falls to tol times the weighted
    norm of b.  A zero right-hand side short-circuits to the zero vector.
    """
    bnorm2 = float(np.sum(weights * b * b))
    if bnorm2 == 0.0:
        return np.zeros_like(b)
    target2 = (tol * tol) * bnorm2
    x = x0.copy()
    r = b - apply_a(x)
    rs = float(np.sum(weights * r * r))
    if rs <= target2:
        return x
    p = r.copy()
    for _ in range(max_iters):
        ap = apply_a(p)
        pap = float(np.sum(weights * p * ap))
        if pap <= 0.0:
            raise LinearSolveError(
                "conjugate gradients lost positive definiteness "
                f"(p.A.p = {pap:g})", np.sqrt(rs / bnorm2))
        step = rs / pap
        x += step * p
        r -= step * ap
        rs_new = float(np.sum(weights * r * r))
        if rs_new <= target2:
            return x
        p *= rs_new / rs
        p += r
        rs = rs_new
    raise LinearSolveError(
        f"conjugate gradients did not reach tol={tol:g} within "
        f"{max_iters} iterations", float(np.sqrt(rs / bnorm2)))


def _solve_shifted(grid: Grid, c0: float, d: float, rhs: np.ndarray,
                   tol: float, max_iters: int | None,
                   x0: np.ndarray | None) -> np.ndarray:
    iters = max_iters if max_iters is not None else 10 * grid.node_count

    def apply_a(p):
        return c0 * p - d * _g._lap_array(p, grid)

    start = x0 if x0 is not None else np.zeros_like(rhs)
    return _weighted_cg(apply_a, rhs, grid.weights, start, tol, iters)


def solve_elliptic_signal(source: Field, *, tol: float = 1e-10,
                          max_iters: int | None = None,
                          x0: Field | None = None) -> Field:
    """Solve (I - Lap) psi = source with zero-flux walls."""
    vals = _solve_shifted(source.grid, 1.0, 1.0, source.values, tol, max_iters,
                          x0.values if x0 is not None else None)
    return Field(source.grid, vals)


def step_parabolic_signal(prev: Field, source: Field, dt: float, *,
                          tol: float = 1e-10, max_iters: int | None = None,
                          x0: Field | None = None) -> Field:
    """One implicit Euler step of psi_t = Lap psi - psi + source."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    g = prev.grid
    if source.grid != g:
        raise _g.GridError("prev and source live on different grids")
    rhs = prev.values + dt * source.values
    start = x0.values if x0 is not None else prev.values
    vals = _solve_shifted(g, 1.0 + dt, dt, rhs, tol, max_iters, start)
    return Field(g, vals)


def _clip_negative_band(u: np.ndarray) -> np.ndarray:
    # fractional powers of the tiny admissible negatives read as zero
    return np.maximum(u, 0.0)


def step_cell(state: SimulationState, params: ModelParams,
              spec: ProductionSpec, dt: float, config: SolverConfig) -> Field:
    """One IMEX trial step for u against the signals held in state.

    Taxis and reaction are explicit, diffusion implicit.  The repulsion
    term is computed as the drift of u along -w so both taxis pieces run
    through the same kernel; in centered mode the pair cancels exactly
    (bit for bit) whenever chi = xi and v = w.  The damping integral
    int u**beta is frozen at the step start.  The returned field is a
    trial: the caller decides acceptance.
    """
    g = state.u.grid
    u = state.u.values
    upos = _clip_negative_band(u)

    drift_v = _g._taxis_array(u, state.v.values, g, config.upwind)
    drift_w = _g._taxis_array(u, -state.w.values, g, config.upwind)
    taxis_total = -(params.chi * drift_v) - (params.xi * drift_w)

    nonlocal_beta = float(np.sum(upos ** params.beta * g.weights))
    ualpha = upos ** params.alpha
    reaction = params.a * ualpha - (params.b * nonlocal_beta) * ualpha

    rhs = u + dt * (taxis_total + reaction)
    vals = _solve_shifted(g, 1.0, dt, rhs, config.linear_tol,
                          config.max_linear_iters, u)
    return Field(g, vals)


def detect_blowup(u: Field, config: SolverConfig) -> bool:
    """True when u left the finite range or crossed the threshold."""
    vals = u.values
    if not np.isfinite(vals).all():
        return True
    return float(np.max(np.abs(vals))) > config.blowup_threshold


def _advance_signals(state: SimulationState, params: ModelParams,
                     spec: ProductionSpec, dt: float,
                     config: SolverConfig) -> tuple[Field, Field]:
    g = state.u.grid
    upos = _clip_negative_band(state.u.values)
    fsrc = Field(g, eval_f(spec, upos))
    gsrc = Field(g, eval_g(spec, upos))
    if params.tau == 0:
        v = solve_elliptic_signal(fsrc, tol=config.linear_tol,
                                  max_iters=config.max_linear_iters, x0=state.v)
        w = solve_elliptic_signal(gsrc, tol=config.linear_tol,
                                  max_iters=config.max_linear_iters, x0=state.w)
    else:
        v = step_parabolic_signal(state.v, fsrc, dt, tol=config.linear_tol,
                                  max_iters=config.max_linear_iters)
        w = step_parabolic_signal(state.w, gsrc, dt, tol=config.linear_tol,
                                  max_iters=config.max_linear_iters)
    return v, w


def _check_initial(name: str, f: Field, grid: Grid) -> None:
    if f.grid != grid:
        raise _g.GridError(f"{name} does not live on the run grid")
    if not np.isfinite(f.values).all():
        raise ValueError(f"{name} must be finite")
    if f.values.size and float(np.min(f.values)) < 0:
        raise ValueError(f"{name} must be nonnegative")


def run(params: ModelParams, spec: ProductionSpec, grid: Grid, u0: Field,
        v0: Field | None, w0: Field | None, config: SolverConfig,
        observer=None) -> RunOutcome:
    """Integrate the system from t = 0 to t_end.

    For tau = 1 both signal initial fields are required; for tau = 0 they
    are ignored and the signals are solved from u0 before the first
    record.  observer, when given, is called with the state after every
    accepted step (the CLI uses it to write snapshots).  Diagnostics are
    recorded at t = 0 and after each accepted step.
    """
    _check_initial("u0", u0, grid)
    linf0 = float(np.max(np.abs(u0.values)))
    if linf0 >= config.blowup_threshold:
        raise ValueError("blowup_threshold must exceed the initial sup norm")

    if params.tau == 1:
        if v0 is None or w0 is None:
            raise ValueError("parabolic signals (tau = 1) need v0 and w0")
        _check_initial("v0", v0, grid)
        _check_initial("w0", w0, grid)
        v, w = v0.copy(), w0.copy()
    else:
        upos = _clip_negative_band(u0.values)
        v = solve_elliptic_signal(Field(grid, eval_f(spec, upos)),
                                  tol=config.linear_tol,
                                  max_iters=config.max_linear_iters)
        w = solve_elliptic_signal(Field(grid, eval_g(spec, upos)),
                                  tol=config.linear_tol,
                                  max_iters=config.max_linear_iters)

    state = SimulationState(t=0.0, u=u0.copy(), v=v, w=w)
    records = [record(state, params, config)]
    sup_linf = records[0].linf_u
    mass_max = records[0].mass
    status = RunStatus.COMPLETED_BOUNDED
    dt_cur = config.dt

    while state.t < config.t_end:
        remaining = config.t_end - state.t
        collapsed = False
        while True:
            dt_step = remaining if remaining <= dt_cur else dt_cur
            v_new, w_new = _advance_signals(state, params, spec, dt_step, config)
            trial_state = SimulationState(t=state.t, u=state.u, v=v_new, w=w_new)
            u_new = step_cell(trial_state, params, spec, dt_step, config)
            scale = float(np.max(np.abs(state.u.values)))
            if float(np.min(u_new.values)) < -NEGATIVE_BAND * scale:
                dt_cur *= 0.5  # permanent: the step size never grows back
                if dt_cur < config.dt_min:
                    collapsed = True
                    break
                continue
            break
        if collapsed:
            status = RunStatus.STEP_COLLAPSE
            break

        state.t = config.t_end if dt_step >= remaining else state.t + dt_step
        state.u, state.v, state.w = u_new, v_new, w_new
        state.step_count += 1
        state.last_dt = dt_step

        rec = record(state, params, config)
        records.append(rec)
        sup_linf = max(sup_linf, rec.linf_u)
        mass_max = max(mass_max, rec.mass)
        if observer is not None:
            observer(state)
        if rec.blowup_flag:
            status = RunStatus.BLOWUP_DETECTED
            break

    return RunOutcome(
        status=status,
        t_final=state.t,
        sup_linf_u=sup_linf,
        mass_max=mass_max,
        records=tuple(records),
        final_state=state,
    )
