"""Trajectory diagnostics: norms, energy functionals, interpolation
inequality audits, and the a-posteriori mass bound monitor.

The solver appends one DiagnosticsRecord per accepted step.  Records keep
the weighted L^k norms, the damped energy functionals exp(tau*t) * int u**k,
and the gradient terms int |grad u**(k/2)|**2 that drive the boundedness
estimates, so a run can be checked after the fact against the behaviour
the regime classifier promises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .grid import Field, grad_half_power_norm, integrate, integrate_power
from .model import ModelParams

if TYPE_CHECKING:  # pragma: no cover
    from .solver import SimulationState, SolverConfig


class DegenerateFieldError(ValueError):
    """Audit input is identically zero, negative, or not finite."""


def default_diag_k_set(n: int) -> tuple[float, ...]:
    """Norm orders tracked when the config does not pin its own set."""
    return tuple(sorted({2.0, float(n + 1), float(2 * n), 8.0}))


def _exp_or_inf(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One accepted time level.

    lk_norms maps k to the trapezoid integral of u**k, phi to the damped
    energy exp(tau*t) * int u**k, grad_terms to int |grad u**(k/2)|**2.
    nonlocal_beta is the damping integral int u**beta frozen at this
    level.  Values inside the solver's small negative acceptance band are
    treated as zero wherever a fractional power is taken.
    """

    t: float
    dt_used: float
    mass: float
    linf_u: float
    linf_v: float
    linf_w: float
    nonlocal_beta: float
    lk_norms: dict[float, float]
    phi: dict[float, float]
    grad_terms: dict[float, float]
    blowup_flag: bool


def record(state: "SimulationState", params: ModelParams,
           config: "SolverConfig") -> DiagnosticsRecord:
    """Compute the full diagnostics row for the current state."""
    ks = config.diag_k_set or default_diag_k_set(params.n)
    u = state.u
    uvals = u.values
    finite = bool(np.isfinite(uvals).all())
    clipped = Field(u.grid, np.maximum(uvals, 0.0)) if finite else u
    damp = _exp_or_inf(params.tau * state.t)

    lk: dict[float, float] = {}
    phi: dict[float, float] = {}
    grads: dict[float, float] = {}
    for k in ks:
        if finite:
            nk = integrate_power(clipped, k)
            gk = grad_half_power_norm(clipped, k)
        else:
            nk = math.nan
            gk = math.nan
        lk[k] = nk
        phi[k] = damp * nk
        grads[k] = gk

    linf_u = float(np.max(np.abs(uvals))) if uvals.size else 0.0
    return DiagnosticsRecord(
        t=state.t,
        dt_used=state.last_dt,
        mass=integrate(u),
        linf_u=linf_u,
        linf_v=float(np.max(np.abs(state.v.values))),
        linf_w=float(np.max(np.abs(state.w.values))),
        nonlocal_beta=integrate_power(clipped, params.beta) if finite else math.nan,
        lk_norms=lk,
        phi=phi,
        grad_terms=grads,
        blowup_flag=(not finite) or linf_u > config.blowup_threshold,
    )


@dataclass(frozen=True)
class ThetaCheck:
    theta: float
    exponent_check: float
    in_range: bool


def gn_theta_lrho(k: float, rho: float, n: int) -> ThetaCheck:
    """Interpolation exponent for bounding int u**rho by the k-energy.

    theta = k * (1 - 1/rho) / (k - 1 + 2/n).  The companion product
    exponent (k + rho) * theta / k must land in (0, 1) for the absorption
    argument to close; in_range reports that together with theta in (0, 1).
    """
    theta = k * (1.0 - 1.0 / rho) / (k - 1.0 + 2.0 / n)
    expo = (k + rho) * theta / k
    ok = 0.0 < theta < 1.0 and 0.0 < expo < 1.0
    return ThetaCheck(theta=float(theta), exponent_check=float(expo), in_range=ok)


def gn_theta_lk(k: float, n: int) -> float:
    """Interpolation exponent used for the L^k -> L^1 step.

    theta = (k/2 - 1/2) / (k/2 - 1/2 + 1/n), in (0, 1) for every k > 1.
    """
    half = 0.5 * (k - 1.0)
    return float(half / (half + 1.0 / n))


def k_floor_lrho(rho: float, n: int) -> float:
    """Smallest admissible norm order for gn_theta_lrho.

    The exponent check (k + rho) * theta / k < 1 rearranges to
    k > rho**2 - 2*rho/n, and theta < 1 needs the weaker k > rho*(1 - 2/n),
    so every k strictly above max(1, rho**2 - 2*rho/n) passes.
    """
    return max(1.0, rho * rho - 2.0 * rho / n)


@dataclass(frozen=True)
class GNAudit:
    """Empirical constant for one interpolation inequality instance.

    lhs = (int phi**rho) ** ((k+rho)/rho); the right side splits into a
    gradient part G**e * m**((k+rho)*(1-theta)) and a mass part m**(k+rho)
    with G the half-power gradient term, m the mass, e the exponent
    check.  implied_constant = lhs / (gradient part + mass part); scaling
    phi by any factor leaves it unchanged.
    """

    k: float
    rho: float
    n: int
    theta: float
    exponent_check: float
    lhs: float
    rhs_gradient_term: float
    rhs_mass_term: float
    implied_constant: float


def audit_gn_on_field(phi: Field, k: float, rho: float, n: int) -> GNAudit:
    """Measure the inequality constant on one concrete field."""
    vals = phi.values
    if not np.isfinite(vals).all():
        raise DegenerateFieldError("audit field must be finite")
    if vals.size and np.min(vals) < 0:
        raise DegenerateFieldError("audit field must be nonnegative")
    check = gn_theta_lrho(k, rho, n)
    if not check.in_range:
        raise ValueError(
            f"k={k:g} is below the admissible floor {k_floor_lrho(rho, n):g} "
            f"for rho={rho:g}, n={n}")
    mass = integrate(phi)
    if mass <= 0.0:
        raise DegenerateFieldError("audit field must not be identically zero")
    lhs = integrate_power(phi, rho) ** ((k + rho) / rho)
    grad = grad_half_power_norm(phi, k)
    rhs_grad = grad ** check.exponent_check * mass ** ((k + rho) * (1.0 - check.theta))
    rhs_mass = mass ** (k + rho)
    return GNAudit(
        k=float(k), rho=float(rho), n=int(n),
        theta=check.theta, exponent_check=check.exponent_check,
        lhs=lhs, rhs_gradient_term=rhs_grad, rhs_mass_term=rhs_mass,
        implied_constant=lhs / (rhs_grad + rhs_mass),
    )


@dataclass(frozen=True)
class MassBoundViolation:
    index: int
    t: float
    mass: float
    next_mass: float
    allowed: float


@dataclass(frozen=True)
class MassBoundReport:
    """A-posteriori check of the nonlocal mass mechanism.

    Whenever the damping integral int u**beta sits at or above a/b, the
    continuum mass cannot grow, so each such step must satisfy
    mass_next <= mass * (1 + 1e-8) with the slack covering quadrature and
    linear-solver round-off.  The growth window collects the records
    where the damping integral is still below a/b.
    """

    m0: float
    damping_threshold: float
    ok: bool
    violations: tuple[MassBoundViolation, ...]
    growth_enter_t: float | None
    growth_exit_t: float | None
    growth_record_count: int


def mass_bound_monitor(records: Sequence[DiagnosticsRecord],
                       params: ModelParams) -> MassBoundReport:
    """Scan a diagnostics series for mass-bound violations."""
    if not records:
        raise ValueError("mass_bound_monitor needs at least one record")
    threshold = params.a / params.b if params.b > 0 else math.inf
    violations = []
    for i in range(len(records) - 1):
        r0, r1 = records[i], records[i + 1]
        if r0.nonlocal_beta >= threshold:
            allowed = r0.mass + 1e-8 * abs(r0.mass)
            if r1.mass > allowed:
                violations.append(MassBoundViolation(
                    index=i + 1, t=r1.t, mass=r0.mass,
                    next_mass=r1.mass, allowed=allowed))
    growth_ts = [r.t for r in records if r.nonlocal_beta < threshold]
    return MassBoundReport(
        m0=max(r.mass for r in records),
        damping_threshold=threshold,
        ok=not violations,
        violations=tuple(violations),
        growth_enter_t=growth_ts[0] if growth_ts else None,
        growth_exit_t=growth_ts[-1] if growth_ts else None,
        growth_record_count=len(growth_ts),
    )
