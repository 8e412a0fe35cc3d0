"""Run configuration: INI-style files mapped onto dataclasses.

A config file fully describes one run: domain, coefficients, production
laws, initial data, solver knobs, output paths, plus optional sweep and
audit sections.  Parsing is schema-checked (unknown sections or keys are
errors, not warnings) and every constraint failure names the modelling
assumption it violates.  serialize_config is the exact inverse of
parse_config, so a parsed config can be echoed into a summary file and
reparsed to reproduce the run.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid, GridError, read_snapshot
from .model import ModelParams, ParameterError, ProductionKind, ProductionSpec
from .solver import SolverConfig


class ConfigError(ValueError):
    """A config file failed schema or constraint validation."""


_SECTIONS = {
    "domain": {"dim", "lengths", "counts"},
    "params": {"n", "tau", "chi", "xi", "a", "b", "alpha", "beta"},
    "production": {"kind", "ell", "rho", "k1", "k2",
                   "s_samples", "f_samples", "g_samples"},
    "initial.u": {"kind", "value", "baseline", "amplitude", "width",
                  "center", "seed", "path"},
    "initial.v": {"kind", "value", "baseline", "amplitude", "width",
                  "center", "seed", "path"},
    "initial.w": {"kind", "value", "baseline", "amplitude", "width",
                  "center", "seed", "path"},
    "solver": {"dt", "t_end", "blowup_threshold", "dt_min", "linear_tol",
               "max_linear_iters", "upwind", "diag_k_set", "seed"},
    "output": {"csv", "summary", "snapshot_prefix", "snapshot_every"},
    "sweep": {"axis1", "axis2", "classify_only", "output"},
    "audit": {"lrho_cases", "lk_cases", "samples", "seed",
              "sample_k", "sample_rho"},
}
_REQUIRED_SECTIONS = ("domain", "params", "production", "initial.u", "solver")

INITIAL_KINDS = ("constant", "gaussian_bump", "perturbed_constant",
                 "from_snapshot")


@dataclass(frozen=True)
class InitialData:
    """One initial field description.

    kind selects the recipe: constant (value), gaussian_bump (baseline +
    amplitude * exp(-|x - center|^2 / (2 width^2)), center defaulting to
    the box midpoint), perturbed_constant (baseline plus uniform noise of
    the given amplitude, seeded), or from_snapshot (a CHTX1 file on the
    same grid).  Every recipe must produce a nonnegative field.
    """

    kind: str
    value: float = 0.0
    baseline: float = 0.0
    amplitude: float = 0.0
    width: float = 0.0
    center: tuple[float, ...] = ()
    seed: int | None = None
    path: str = ""

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.kind not in INITIAL_KINDS:
            raise ConfigError(f"unknown initial data kind {self.kind!r}; "
                              f"choose one of {', '.join(INITIAL_KINDS)}")
        if self.kind == "constant":
            if self.value < 0:
                raise ConfigError("constant initial data must be nonnegative")
        elif self.kind == "gaussian_bump":
            if self.width <= 0:
                raise ConfigError("gaussian bump width must be positive")
            if self.baseline < 0 or self.baseline + self.amplitude < 0:
                raise ConfigError("gaussian bump must stay nonnegative "
                                  "(baseline and baseline + amplitude >= 0)")
        elif self.kind == "perturbed_constant":
            if self.amplitude < 0:
                raise ConfigError("perturbation amplitude must be nonnegative")
            if self.baseline < self.amplitude:
                raise ConfigError("perturbed constant needs baseline >= "
                                  "amplitude to keep the density nonnegative")
        elif self.kind == "from_snapshot":
            if not self.path:
                raise ConfigError("from_snapshot initial data needs a path")

    def build(self, grid: Grid, default_seed: int = 0) -> Field:
        if self.kind == "constant":
            return Field.full(grid, self.value)
        if self.kind == "gaussian_bump":
            center = self.center or tuple(0.5 * L for L in grid.lengths)
            if len(center) != grid.dim:
                raise ConfigError("gaussian bump center needs one coordinate "
                                  "per grid axis")
            meshes = grid.meshes()
            r2 = sum((m - c) ** 2 for m, c in zip(meshes, center))
            vals = self.baseline + self.amplitude * np.exp(
                -r2 / (2.0 * self.width ** 2))
            return Field(grid, vals)
        if self.kind == "perturbed_constant":
            seed = self.seed if self.seed is not None else default_seed
            rng = np.random.default_rng(seed)
            noise = rng.uniform(-1.0, 1.0, size=grid.shape)
            return Field(grid, self.baseline + self.amplitude * noise)
        return read_snapshot(self.path, grid)


@dataclass(frozen=True)
class OutputSpec:
    csv: str = "diagnostics.csv"
    summary: str = "summary.json"
    snapshot_prefix: str = ""
    snapshot_every: int = 0

    def __post_init__(self):
        if self.snapshot_every < 0:
            raise ConfigError("snapshot_every must be >= 0")


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values",
                           tuple(float(v) for v in self.values))
        if not self.values:
            raise ConfigError(f"sweep axis {self.name!r} has no values")


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[SweepAxis, ...] = ()
    classify_only: bool = False
    output: str = "sweep.csv"


@dataclass(frozen=True)
class AuditSpec:
    lrho_cases: tuple[tuple[float, float, int], ...] = ()
    lk_cases: tuple[tuple[float, int], ...] = ()
    samples: int = 50
    seed: int = 0
    sample_k: float = 4.0
    sample_rho: float = 2.0

    def __post_init__(self):
        if self.samples < 1:
            raise ConfigError("audit needs at least one sample field")


@dataclass(frozen=True)
class RunConfig:
    grid: Grid
    params: ModelParams
    production: ProductionSpec
    initial_u: InitialData
    initial_v: InitialData | None
    initial_w: InitialData | None
    solver: SolverConfig
    output: OutputSpec = OutputSpec()
    sweep: SweepSpec = SweepSpec()
    audit: AuditSpec = AuditSpec()
    seed: int = 0


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _fmt_list(values) -> str:
    return ", ".join(_fmt(v) for v in values)


class _Section:
    """One parsed section with typed, error-reporting accessors."""

    def __init__(self, name: str, raw: dict[str, str]):
        self.name = name
        self.raw = raw

    def _get(self, key: str, required: bool):
        if key not in self.raw:
            if required:
                raise ConfigError(f"[{self.name}] is missing the key {key!r}")
            return None
        return self.raw[key].strip()

    def _convert(self, key: str, text: str, conv, what: str):
        try:
            return conv(text)
        except (ValueError, TypeError):
            raise ConfigError(
                f"[{self.name}] {key} = {text!r} is not {what}") from None

    def str_(self, key, default=None, required=False):
        text = self._get(key, required)
        return default if text is None else text

    def int_(self, key, default=None, required=False):
        text = self._get(key, required)
        if text is None:
            return default
        return self._convert(key, text, int, "an integer")

    def float_(self, key, default=None, required=False):
        text = self._get(key, required)
        if text is None:
            return default
        return self._convert(key, text, float, "a number")

    def bool_(self, key, default=None, required=False):
        text = self._get(key, required)
        if text is None:
            return default
        low = text.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"[{self.name}] {key} = {text!r} is not a boolean")

    def floats(self, key, default=(), required=False):
        text = self._get(key, required)
        if text is None:
            return tuple(default)
        items = [tok.strip() for tok in text.split(",") if tok.strip()]
        return tuple(self._convert(key, tok, float, "a number") for tok in items)

    def ints(self, key, default=(), required=False):
        text = self._get(key, required)
        if text is None:
            return tuple(default)
        items = [tok.strip() for tok in text.split(",") if tok.strip()]
        return tuple(self._convert(key, tok, int, "an integer") for tok in items)


def _read_sections(text: str) -> dict[str, _Section]:
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from None
    sections: dict[str, _Section] = {}
    for name in cp.sections():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        allowed = _SECTIONS[name]
        raw = dict(cp.items(name))
        for key in raw:
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
        sections[name] = _Section(name, raw)
    for name in _REQUIRED_SECTIONS:
        if name not in sections:
            raise ConfigError(f"required section [{name}] is missing")
    return sections


def _parse_initial(sec: _Section) -> InitialData:
    kind = sec.str_("kind", required=True)
    return InitialData(
        kind=kind,
        value=sec.float_("value", 0.0),
        baseline=sec.float_("baseline", 0.0),
        amplitude=sec.float_("amplitude", 0.0),
        width=sec.float_("width", 0.0),
        center=sec.floats("center"),
        seed=sec.int_("seed", None),
        path=sec.str_("path", ""),
    )


def _parse_axis(sec: _Section, key: str) -> SweepAxis | None:
    text = sec.str_(key, None)
    if text is None:
        return None
    if "=" not in text:
        raise ConfigError(f"[sweep] {key} must look like name = v1, v2, ...")
    name, _, rest = text.partition("=")
    values = [tok.strip() for tok in rest.split(",") if tok.strip()]
    if not values:
        raise ConfigError(f"[sweep] {key} lists no values")
    try:
        vals = tuple(float(v) for v in values)
    except ValueError:
        raise ConfigError(f"[sweep] {key}: values must be numbers") from None
    return SweepAxis(name=name.strip(), values=vals)


def _parse_tuples(sec: _Section, key: str, arity: int,
                  caster) -> tuple[tuple, ...]:
    text = sec.str_(key, None)
    if not text:
        return ()
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != arity:
            raise ConfigError(f"[audit] {key}: each entry needs {arity} "
                              f"comma-separated numbers, got {chunk!r}")
        try:
            out.append(caster(parts))
        except ValueError:
            raise ConfigError(f"[audit] {key}: bad entry {chunk!r}") from None
    return tuple(out)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config file into a RunConfig."""
    sections = _read_sections(text)

    dom = sections["domain"]
    dim = dom.int_("dim", required=True)
    lengths = dom.floats("lengths", required=True)
    counts = dom.ints("counts", required=True)
    if dim is not None and (len(lengths) != dim or len(counts) != dim):
        raise ConfigError("[domain] lengths and counts must list one value "
                          "per axis (dim entries)")
    try:
        grid = Grid(lengths=lengths, counts=counts)
    except GridError as exc:
        raise ConfigError(f"[domain] {exc}") from None

    par = sections["params"]
    raw_params = {
        "n": par.int_("n", required=True),
        "tau": par.int_("tau", required=True),
        "chi": par.float_("chi", required=True),
        "xi": par.float_("xi", required=True),
        "a": par.float_("a", required=True),
        "b": par.float_("b", required=True),
        "alpha": par.float_("alpha", required=True),
        "beta": par.float_("beta", required=True),
    }
    positivity_why = {
        "chi": "the attraction sensitivity is assumed strictly positive",
        "xi": "the repulsion sensitivity is assumed strictly positive",
        "a": "the logistic growth coefficient is assumed strictly positive",
        "b": "the nonlocal damping coefficient is assumed strictly positive",
    }
    for key, why in positivity_why.items():
        if raw_params[key] <= 0:
            raise ConfigError(f"[params] {key} must be > 0 ({why})")
    try:
        params = ModelParams(**raw_params)
    except ParameterError as exc:
        raise ConfigError(f"[params] {exc}") from None

    pro = sections["production"]
    kind_text = pro.str_("kind", "power")
    try:
        kind = ProductionKind(kind_text)
    except ValueError:
        raise ConfigError(f"[production] kind = {kind_text!r} is not one of "
                          "power, tabulated") from None
    try:
        production = ProductionSpec(
            ell=pro.float_("ell", required=True),
            rho=pro.float_("rho", required=True),
            k1=pro.float_("k1", 1.0),
            k2=pro.float_("k2", 1.0),
            kind=kind,
            s_samples=pro.floats("s_samples"),
            f_samples=pro.floats("f_samples"),
            g_samples=pro.floats("g_samples"),
        )
    except ParameterError as exc:
        raise ConfigError(f"[production] {exc}") from None

    initial_u = _parse_initial(sections["initial.u"])
    initial_v = (_parse_initial(sections["initial.v"])
                 if "initial.v" in sections else None)
    initial_w = (_parse_initial(sections["initial.w"])
                 if "initial.w" in sections else None)
    if params.tau == 1:
        if initial_v is None or initial_w is None:
            raise ConfigError("parabolic signals (tau = 1) need [initial.v] "
                              "and [initial.w] sections")

    sol = sections["solver"]
    try:
        solver = SolverConfig(
            dt=sol.float_("dt", required=True),
            t_end=sol.float_("t_end", required=True),
            blowup_threshold=sol.float_("blowup_threshold", 1e8),
            dt_min=sol.float_("dt_min", 1e-10),
            linear_tol=sol.float_("linear_tol", 1e-10),
            max_linear_iters=sol.int_("max_linear_iters", None),
            upwind=sol.bool_("upwind", False),
            diag_k_set=sol.floats("diag_k_set"),
        )
    except ValueError as exc:
        raise ConfigError(f"[solver] {exc}") from None
    seed = sol.int_("seed", 0)

    if "output" in sections:
        out = sections["output"]
        output = OutputSpec(
            csv=out.str_("csv", "diagnostics.csv"),
            summary=out.str_("summary", "summary.json"),
            snapshot_prefix=out.str_("snapshot_prefix", ""),
            snapshot_every=out.int_("snapshot_every", 0),
        )
    else:
        output = OutputSpec()

    if "sweep" in sections:
        sw = sections["sweep"]
        axes = tuple(a for a in (_parse_axis(sw, "axis1"),
                                 _parse_axis(sw, "axis2")) if a is not None)
        sweep = SweepSpec(
            axes=axes,
            classify_only=sw.bool_("classify_only", False),
            output=sw.str_("output", "sweep.csv"),
        )
    else:
        sweep = SweepSpec()

    if "audit" in sections:
        au = sections["audit"]
        audit = AuditSpec(
            lrho_cases=_parse_tuples(
                au, "lrho_cases", 3,
                lambda p: (float(p[0]), float(p[1]), int(p[2]))),
            lk_cases=_parse_tuples(
                au, "lk_cases", 2, lambda p: (float(p[0]), int(p[1]))),
            samples=au.int_("samples", 50),
            seed=au.int_("seed", 0),
            sample_k=au.float_("sample_k", 4.0),
            sample_rho=au.float_("sample_rho", 2.0),
        )
    else:
        audit = AuditSpec()

    return RunConfig(grid=grid, params=params, production=production,
                     initial_u=initial_u, initial_v=initial_v,
                     initial_w=initial_w, solver=solver, output=output,
                     sweep=sweep, audit=audit, seed=seed)


def _emit_initial(lines: list[str], name: str, init: InitialData) -> None:
    lines.append(f"[{name}]")
    lines.append(f"kind = {init.kind}")
    if init.kind == "constant":
        lines.append(f"value = {_fmt(init.value)}")
    elif init.kind == "gaussian_bump":
        lines.append(f"baseline = {_fmt(init.baseline)}")
        lines.append(f"amplitude = {_fmt(init.amplitude)}")
        lines.append(f"width = {_fmt(init.width)}")
        if init.center:
            lines.append(f"center = {_fmt_list(init.center)}")
    elif init.kind == "perturbed_constant":
        lines.append(f"baseline = {_fmt(init.baseline)}")
        lines.append(f"amplitude = {_fmt(init.amplitude)}")
        if init.seed is not None:
            lines.append(f"seed = {init.seed}")
    elif init.kind == "from_snapshot":
        lines.append(f"path = {init.path}")
    lines.append("")


def serialize_config(cfg: RunConfig) -> str:
    """Render a RunConfig as canonical config text (parse round-trips)."""
    lines: list[str] = []
    lines.append("[domain]")
    lines.append(f"dim = {cfg.grid.dim}")
    lines.append(f"lengths = {_fmt_list(cfg.grid.lengths)}")
    lines.append(f"counts = {_fmt_list(cfg.grid.counts)}")
    lines.append("")

    p = cfg.params
    lines.append("[params]")
    lines.append(f"n = {p.n}")
    lines.append(f"tau = {p.tau}")
    for key in ("chi", "xi", "a", "b", "alpha", "beta"):
        lines.append(f"{key} = {_fmt(float(getattr(p, key)))}")
    lines.append("")

    pr = cfg.production
    lines.append("[production]")
    lines.append(f"kind = {pr.kind.value}")
    lines.append(f"ell = {_fmt(float(pr.ell))}")
    lines.append(f"rho = {_fmt(float(pr.rho))}")
    lines.append(f"k1 = {_fmt(float(pr.k1))}")
    lines.append(f"k2 = {_fmt(float(pr.k2))}")
    if pr.kind is ProductionKind.TABULATED:
        lines.append(f"s_samples = {_fmt_list(pr.s_samples)}")
        lines.append(f"f_samples = {_fmt_list(pr.f_samples)}")
        lines.append(f"g_samples = {_fmt_list(pr.g_samples)}")
    lines.append("")

    _emit_initial(lines, "initial.u", cfg.initial_u)
    if cfg.initial_v is not None:
        _emit_initial(lines, "initial.v", cfg.initial_v)
    if cfg.initial_w is not None:
        _emit_initial(lines, "initial.w", cfg.initial_w)

    s = cfg.solver
    lines.append("[solver]")
    lines.append(f"dt = {_fmt(float(s.dt))}")
    lines.append(f"t_end = {_fmt(float(s.t_end))}")
    lines.append(f"blowup_threshold = {_fmt(float(s.blowup_threshold))}")
    lines.append(f"dt_min = {_fmt(float(s.dt_min))}")
    lines.append(f"linear_tol = {_fmt(float(s.linear_tol))}")
    if s.max_linear_iters is not None:
        lines.append(f"max_linear_iters = {s.max_linear_iters}")
    lines.append(f"upwind = {_fmt(s.upwind)}")
    if s.diag_k_set:
        lines.append(f"diag_k_set = {_fmt_list(s.diag_k_set)}")
    lines.append(f"seed = {cfg.seed}")
    lines.append("")

    o = cfg.output
    lines.append("[output]")
    lines.append(f"csv = {o.csv}")
    lines.append(f"summary = {o.summary}")
    if o.snapshot_prefix:
        lines.append(f"snapshot_prefix = {o.snapshot_prefix}")
    lines.append(f"snapshot_every = {o.snapshot_every}")
    lines.append("")

    if cfg.sweep != SweepSpec():
        lines.append("[sweep]")
        for i, axis in enumerate(cfg.sweep.axes, start=1):
            lines.append(f"axis{i} = {axis.name} = {_fmt_list(axis.values)}")
        lines.append(f"classify_only = {_fmt(cfg.sweep.classify_only)}")
        lines.append(f"output = {cfg.sweep.output}")
        lines.append("")

    au = cfg.audit
    if au != AuditSpec():
        lines.append("[audit]")
        if au.lrho_cases:
            lines.append("lrho_cases = " + "; ".join(
                f"{_fmt(k)}, {_fmt(r)}, {n}" for k, r, n in au.lrho_cases))
        if au.lk_cases:
            lines.append("lk_cases = " + "; ".join(
                f"{_fmt(k)}, {n}" for k, n in au.lk_cases))
        lines.append(f"samples = {au.samples}")
        lines.append(f"seed = {au.seed}")
        lines.append(f"sample_k = {_fmt(float(au.sample_k))}")
        lines.append(f"sample_rho = {_fmt(float(au.sample_rho))}")
        lines.append("")

    return "\n".join(lines)


_PARAM_AXES = {"chi", "xi", "a", "b", "alpha", "beta", "n", "tau"}
_PRODUCTION_AXES = {"ell", "rho", "k1", "k2"}
_SOLVER_AXES = {"dt", "t_end"}
SWEEPABLE = sorted(_PARAM_AXES | _PRODUCTION_AXES | _SOLVER_AXES)


def substitute_parameter(cfg: RunConfig, name: str, value: float) -> RunConfig:
    """Return a copy of cfg with one named numeric parameter replaced.

    Validation is re-run, so an out-of-range value raises the same error
    a config file would have produced.
    """
    if name in _PARAM_AXES:
        if name in ("n", "tau"):
            if float(value) != int(value):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            value = int(value)
        elif value <= 0:
            raise ConfigError(f"{name} must be > 0 (model positivity "
                              "assumption)")
        try:
            params = dataclasses.replace(cfg.params, **{name: value})
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None
        return dataclasses.replace(cfg, params=params)
    if name in _PRODUCTION_AXES:
        try:
            production = dataclasses.replace(cfg.production, **{name: value})
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None
        return dataclasses.replace(cfg, production=production)
    if name in _SOLVER_AXES:
        try:
            solver = dataclasses.replace(cfg.solver, **{name: value})
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return dataclasses.replace(cfg, solver=solver)
    raise ConfigError(f"{name!r} is not sweepable; choose one of "
                      + ", ".join(SWEEPABLE))
