"""Model data: PDE coefficients, signal production laws, and the
boundedness-regime classifier.

The system tracked here is a three-component chemotaxis model: a cell
density u, an attractant v, and a repellent w.  Cells diffuse, drift up
gradients of v and down gradients of w, and react through a logistic
term whose damping strength is set by the spatial integral of u**beta.
Signal equations are elliptic (tau = 0) or parabolic (tau = 1).

Production laws f (attractant) and g (repellent) are either power-law
prototypes or tabulated samples, and must sit inside fixed power-law
envelopes.  The classifier evaluates known sufficient conditions for
global boundedness and reports per-inequality margins.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class ParameterError(ValueError):
    """A coefficient or production law violates a model assumption."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParameterError(msg)


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of the coupled system.

    n is the spatial dimension used by the classifier (any n >= 1; the
    solver itself only runs in 1 or 2 dimensions).  tau selects elliptic
    (0) or parabolic (1) signal equations.  chi and xi are the attraction
    and repulsion sensitivities, a and b the logistic growth and nonlocal
    damping coefficients.  Zero values for chi, xi, a, b are accepted so
    degenerate runs (pure diffusion, no reaction) remain expressible; the
    config layer insists on strict positivity for production runs.
    """

    n: int
    tau: int
    chi: float
    xi: float
    a: float
    b: float
    alpha: float
    beta: float

    def __post_init__(self):
        _require(int(self.n) == self.n and self.n >= 1,
                 "n must be an integer >= 1 (spatial dimension)")
        _require(self.tau in (0, 1),
                 "tau must be 0 (elliptic signals) or 1 (parabolic signals)")
        for name in ("chi", "xi", "a", "b"):
            _require(getattr(self, name) >= 0,
                     f"{name} must be nonnegative")
        _require(self.alpha >= 1,
                 "alpha must be >= 1 (growth exponent of the logistic source)")
        # beta >= 1 is a hypothesis of the boundedness results, not a
        # structural requirement; the classifier reports out-of-regime
        # combinations instead of refusing them
        _require(self.beta > 0,
                 "beta must be positive (exponent inside the nonlocal damping integral)")


class ProductionKind(str, enum.Enum):
    POWER = "power"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class ProductionSpec:
    """Production laws for the two signals with their envelope data.

    The attractant rate f must satisfy 0 <= f(s) <= k1 * s**ell and the
    repellent rate g must satisfy k2 * s**rho <= g(s) <= k2 * s * (s+1)**(rho-1)
    for all s >= 0.  The power prototype uses f = k1 * s**ell and
    g = k2 * s**rho, which sit exactly on their envelope edges.

    Tabulated laws interpolate (s_samples, f_samples, g_samples) linearly
    and extend past the last sample by power laws with exponents ell and
    rho.  Table samples are checked against the envelopes at construction
    unless check_table=False; points between samples are not checked (a
    chord can leave a curved envelope), use validate_envelope to audit
    any point set of interest.
    """

    ell: float
    rho: float
    k1: float = 1.0
    k2: float = 1.0
    kind: ProductionKind = ProductionKind.POWER
    s_samples: tuple[float, ...] = ()
    f_samples: tuple[float, ...] = ()
    g_samples: tuple[float, ...] = ()
    check_table: bool = field(default=True, compare=False)

    def __post_init__(self):
        _require(self.ell > 0, "ell must be positive (attractant envelope exponent)")
        _require(self.rho > 1, "rho must exceed 1 (repellent envelope exponent)")
        _require(self.k1 > 0, "k1 must be positive (attractant envelope constant)")
        _require(self.k2 > 0, "k2 must be positive (repellent envelope constant)")
        for name in ("s_samples", "f_samples", "g_samples"):
            object.__setattr__(self, name,
                               tuple(float(x) for x in getattr(self, name)))
        if self.kind is ProductionKind.POWER:
            _require(not self.s_samples and not self.f_samples and not self.g_samples,
                     "sample tables are only meaningful for tabulated production laws")
            return
        s = self.s_samples
        _require(len(s) >= 2, "tabulated production needs at least two samples")
        _require(len(self.f_samples) == len(s) and len(self.g_samples) == len(s),
                 "f_samples and g_samples must match s_samples in length")
        _require(s[0] == 0.0, "sample grid must start at s = 0")
        _require(all(s[i] < s[i + 1] for i in range(len(s) - 1)),
                 "sample grid must be strictly increasing")
        if self.check_table:
            rep = validate_envelope(self, s)
            if not rep.all_ok:
                bad = [f"{x:g}" for x, fo, go in zip(s, rep.f_ok, rep.g_ok)
                       if not (fo and go)]
                raise ParameterError(
                    "tabulated samples leave the production envelopes at s = "
                    + ", ".join(bad))


def _as_array(s):
    arr = np.asarray(s, dtype=float)
    if arr.size and np.min(arr) < 0:
        raise ParameterError("production rates are defined for s >= 0 only")
    return arr


def _eval_tabulated(spec: ProductionSpec, arr: np.ndarray, values: tuple[float, ...],
                    tail_exp: float) -> np.ndarray:
    xp = np.asarray(spec.s_samples)
    fp = np.asarray(values)
    out = np.interp(arr, xp, fp)
    s_max = xp[-1]
    over = arr > s_max
    if np.any(over):
        out = np.where(over, fp[-1] * (arr / s_max) ** tail_exp, out)
    return out


def eval_f(spec: ProductionSpec, s):
    """Attractant production rate; scalar in, scalar out."""
    arr = _as_array(s)
    if spec.kind is ProductionKind.POWER:
        out = spec.k1 * arr ** spec.ell
    else:
        out = _eval_tabulated(spec, arr, spec.f_samples, spec.ell)
    return float(out) if np.ndim(s) == 0 else out


def eval_g(spec: ProductionSpec, s):
    """Repellent production rate; scalar in, scalar out."""
    arr = _as_array(s)
    if spec.kind is ProductionKind.POWER:
        out = spec.k2 * arr ** spec.rho
    else:
        out = _eval_tabulated(spec, arr, spec.g_samples, spec.rho)
    return float(out) if np.ndim(s) == 0 else out


@dataclass(frozen=True)
class EnvelopeReport:
    samples: tuple[float, ...]
    f_ok: tuple[bool, ...]
    g_ok: tuple[bool, ...]
    all_ok: bool


def validate_envelope(spec: ProductionSpec, samples) -> EnvelopeReport:
    """Check both envelope inequalities at the given sample points.

    f must stay within [0, k1*s**ell] and g within
    [k2*s**rho, k2*s*(s+1)**(rho-1)].  Comparisons are non-strict, so the
    power prototype (which sits on the envelope edges) passes exactly.
    """
    pts = _as_array(samples).ravel()
    fv = np.atleast_1d(eval_f(spec, pts))
    gv = np.atleast_1d(eval_g(spec, pts))
    f_hi = spec.k1 * pts ** spec.ell
    g_lo = spec.k2 * pts ** spec.rho
    g_hi = spec.k2 * pts * (pts + 1.0) ** (spec.rho - 1.0)
    f_ok = (fv >= 0.0) & (fv <= f_hi)
    g_ok = (gv >= g_lo) & (gv <= g_hi)
    return EnvelopeReport(
        samples=tuple(float(x) for x in pts),
        f_ok=tuple(bool(x) for x in f_ok),
        g_ok=tuple(bool(x) for x in g_ok),
        all_ok=bool(np.all(f_ok) and np.all(g_ok)),
    )


class TheoremTag(str, enum.Enum):
    PE = "PE"        # elliptic-signal boundedness result (tau = 0)
    PP = "PP"        # parabolic-signal boundedness result (tau = 1)
    NONE = "none"


class CaseTag(str, enum.Enum):
    A = "A"
    B = "B"
    NONE = "none"


class GrowthClass(str, enum.Enum):
    SUBQUADRATIC = "subquadratic"
    SUPERQUADRATIC = "superquadratic"
    NONE = "none"


@dataclass(frozen=True)
class Margin:
    """One inequality of a regime condition.

    slack is oriented so that positive means strictly inside the region:
    lhs - rhs for ">" / ">=" conditions and rhs - lhs for "<" / "<="
    conditions.  A strict inequality is satisfied only for slack > 0; a
    non-strict one also at slack == 0.  Comparisons are exact, no float
    tolerance is applied.
    """

    name: str
    lhs: float
    rhs: float
    strict: bool
    slack: float
    satisfied: bool


def _margin_gt(name, lhs, rhs, strict=True) -> Margin:
    slack = lhs - rhs
    sat = slack > 0 if strict else slack >= 0
    return Margin(name, float(lhs), float(rhs), strict, float(slack), bool(sat))


def _margin_lt(name, lhs, rhs, strict=True) -> Margin:
    slack = rhs - lhs
    sat = slack > 0 if strict else slack >= 0
    return Margin(name, float(lhs), float(rhs), strict, float(slack), bool(sat))


@dataclass(frozen=True)
class RegimeVerdict:
    """Outcome of the boundedness classification.

    theorem / case_label identify which sufficient condition holds (case
    A is preferred if both were met; the published cases are mutually
    exclusive, so both_cases is expected to stay False).  growth_class
    reports the independent quadratic-degradation comparison.  margins
    lists every inequality inspected, including the failed ones.
    """

    theorem: TheoremTag
    case_label: CaseTag
    growth_class: GrowthClass
    both_cases: bool
    margins: tuple[Margin, ...]

    def holds(self) -> bool:
        return self.theorem is not TheoremTag.NONE


def classify_regime(params: ModelParams, spec: ProductionSpec) -> RegimeVerdict:
    """Evaluate the boundedness conditions for the given coefficients.

    Pure function of (n, tau, alpha, beta, ell, rho).  The elliptic-signal
    result (tau = 0) has two cases:

      A:  beta > n*(alpha-1)/2   and  ell <= min(alpha-1, rho)
      B:  beta > (n*ell + 2*(ell-alpha+1))/2  and  alpha-1 < min(ell, rho)

    and the parabolic-signal result (tau = 1):

      A:  beta > n*(alpha-1)/2   and  alpha-1 >= max(rho, ell)
      B:  beta > (n*max(rho,ell) + 2*(max(rho,ell)-alpha+1))/2
          and  alpha-1 < min(rho, ell)

    The growth_class comparison is evaluated independently:
    subquadratic for 1 <= alpha < 2 with beta > n/2 + 2 - alpha,
    superquadratic for 2 <= alpha < 1 + 2*beta/n with beta > n/2.
    """
    n = float(params.n)
    alpha, beta = params.alpha, params.beta
    ell, rho = spec.ell, spec.rho

    if params.tau == 0:
        tag = TheoremTag.PE
        case_a = (
            _margin_gt("PE-A: beta > n*(alpha-1)/2", beta, n * (alpha - 1.0) / 2.0),
            _margin_lt("PE-A: ell <= min(alpha-1, rho)", ell,
                       min(alpha - 1.0, rho), strict=False),
        )
        case_b = (
            _margin_gt("PE-B: beta > (n*ell + 2*(ell-alpha+1))/2", beta,
                       (n * ell + 2.0 * (ell - alpha + 1.0)) / 2.0),
            _margin_lt("PE-B: alpha-1 < min(ell, rho)", alpha - 1.0, min(ell, rho)),
        )
    else:
        tag = TheoremTag.PP
        m = max(rho, ell)
        case_a = (
            _margin_gt("PP-A: beta > n*(alpha-1)/2", beta, n * (alpha - 1.0) / 2.0),
            _margin_gt("PP-A: alpha-1 >= max(rho, ell)", alpha - 1.0, m, strict=False),
        )
        case_b = (
            _margin_gt("PP-B: beta > (n*max(rho,ell) + 2*(max(rho,ell)-alpha+1))/2",
                       beta, (n * m + 2.0 * (m - alpha + 1.0)) / 2.0),
            _margin_lt("PP-B: alpha-1 < min(rho, ell)", alpha - 1.0, min(rho, ell)),
        )

    sub = (
        _margin_gt("subquadratic: alpha >= 1", alpha, 1.0, strict=False),
        _margin_lt("subquadratic: alpha < 2", alpha, 2.0),
        _margin_gt("subquadratic: beta > n/2 + 2 - alpha", beta, n / 2.0 + 2.0 - alpha),
    )
    sup = (
        _margin_gt("superquadratic: alpha >= 2", alpha, 2.0, strict=False),
        _margin_lt("superquadratic: alpha < 1 + 2*beta/n", alpha, 1.0 + 2.0 * beta / n),
        _margin_gt("superquadratic: beta > n/2", beta, n / 2.0),
    )

    a_holds = all(m.satisfied for m in case_a)
    b_holds = all(m.satisfied for m in case_b)
    if a_holds:
        case = CaseTag.A        # tie-break: case A wins when both hold
    elif b_holds:
        case = CaseTag.B
    else:
        case = CaseTag.NONE

    if all(m.satisfied for m in sub):
        growth = GrowthClass.SUBQUADRATIC
    elif all(m.satisfied for m in sup):
        growth = GrowthClass.SUPERQUADRATIC
    else:
        growth = GrowthClass.NONE

    return RegimeVerdict(
        theorem=tag if case is not CaseTag.NONE else TheoremTag.NONE,
        case_label=case,
        growth_class=growth,
        both_cases=bool(a_holds and b_holds),
        margins=case_a + case_b + sub + sup,
    )
