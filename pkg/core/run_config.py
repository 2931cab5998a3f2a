"""Run specification: YAML document with model, run and output sections."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from core.errors import ModelError, ParseError, ValidationError
from core.hierarchy import CLOSURES, MOMENT_MODES, Controls
from core.model import OscillatorModel

MODES = ("hierarchy", "effective", "coefficients", "verify", "compare", "moments")
FORMS = ("reduced", "fourth")
METRICS = ("sup", "l2")
VERIFY_SUITES = ("all", "coefficients", "adiabatic")

MODEL_KEYS = {"m", "omega", "hbar", "u_coeffs"}
RUN_KEYS = {"mode", "q0", "p0", "moments", "adiabatic_order", "truncation", "hbar_order",
            "closure", "t_end", "rel_tol", "abs_tol", "max_step", "fixed_step", "form",
            "iterate", "seed", "samples", "workers", "inputs", "sweep", "metric",
            "uncertainty_tol", "stop_on_violation", "suite"}
OUTPUT_KEYS = {"path", "report", "every"}
SWEEP_KEYS = {"hbar"}


@dataclass(frozen=True)
class RunSpec:
    """Everything a run needs, with the defaults of an empty document."""

    model: OscillatorModel = field(default_factory=lambda: OscillatorModel.from_powers({4: 1 / 24}))
    mode: str = "hierarchy"
    q0: float = 1.0
    p0: float = 0.0
    moments: str = "harmonic_vacuum"
    adiabatic_order: int = 0
    truncation: int = 2
    hbar_order: int = 1
    closure: str = "truncate"
    t_end: float = 2 * math.pi
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = math.inf
    fixed_step: float | None = None
    form: str = "reduced"
    iterate: bool = False
    seed: int = 42
    samples: int = 100
    workers: int = 1
    inputs: tuple[str, ...] = ()
    sweep_hbar: tuple[float, ...] = ()
    metric: str = "sup"
    uncertainty_tol: float = 1e-6
    stop_on_violation: bool = False
    suite: str = "all"
    output: str | None = None
    report: str | None = None
    every: int = 1

    def controls(self) -> Controls:
        return Controls(rel_tol=self.rel_tol, abs_tol=self.abs_tol, max_step=self.max_step,
                        fixed_step=self.fixed_step, hbar_order=self.hbar_order,
                        N=self.truncation, closure=self.closure,
                        uncertainty_tol=self.uncertainty_tol,
                        stop_on_violation=self.stop_on_violation)

    def with_overrides(self, **changes) -> "RunSpec":
        """Apply command-line overrides; None values leave the field alone."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


class _Checker:
    """Collects (key_path, reason) issues while reading typed values."""

    def __init__(self):
        self.issues: list[tuple[str, str]] = []

    def flag(self, path: str, reason: str):
        self.issues.append((path, reason))

    def section(self, doc: dict, name: str, allowed: set[str], prefix: str = "") -> dict:
        path = prefix + name
        value = doc.get(name, {})
        if value is None:
            return {}
        if not isinstance(value, dict):
            self.flag(path, "must be a mapping")
            return {}
        for key in value:
            if key not in allowed:
                self.flag(f"{path}.{key}", "unknown key")
        return value

    def number(self, section: dict, prefix: str, key: str, default, positive=False,
               allow_inf=False):
        if key not in section:
            return default
        value = section[key]
        path = f"{prefix}.{key}"
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.flag(path, "must be a number")
            return default
        value = float(value)
        if math.isnan(value) or (math.isinf(value) and not allow_inf):
            self.flag(path, "must be finite")
            return default
        if positive and value <= 0.0:
            self.flag(path, "must be positive")
            return default
        return value

    def integer(self, section: dict, prefix: str, key: str, default: int, minimum: int = 0):
        if key not in section:
            return default
        value = section[key]
        path = f"{prefix}.{key}"
        if isinstance(value, bool) or not isinstance(value, int):
            self.flag(path, "must be an integer")
            return default
        if value < minimum:
            self.flag(path, f"must be at least {minimum}")
            return default
        return value

    def choice(self, section: dict, prefix: str, key: str, default: str, options: tuple):
        if key not in section:
            return default
        value = section[key]
        if value not in options:
            self.flag(f"{prefix}.{key}", f"must be one of {', '.join(options)}")
            return default
        return value

    def flag_value(self, section: dict, prefix: str, key: str, default: bool) -> bool:
        if key not in section:
            return default
        value = section[key]
        if not isinstance(value, bool):
            self.flag(f"{prefix}.{key}", "must be true or false")
            return default
        return value


def _u_coeffs(raw, check: _Checker) -> dict[int, float]:
    """u_coeffs as a list indexed by power or a {power: coefficient} mapping."""
    if raw is None:
        return {}
    if isinstance(raw, list):
        items = list(enumerate(raw))
    elif isinstance(raw, dict):
        items = []
        for key, value in raw.items():
            try:
                items.append((int(key), value))
            except (TypeError, ValueError):
                check.flag(f"model.u_coeffs.{key}", "power must be an integer")
    else:
        check.flag("model.u_coeffs", "must be a list or a mapping")
        return {}

    powers: dict[int, float] = {}
    for power, value in items:
        path = f"model.u_coeffs.{power}"
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            check.flag(path, "coefficient must be a number")
            continue
        if power < 0:
            check.flag(path, "power must be non-negative")
            continue
        if power <= 2 and value != 0:
            rule = ("quadratic term belongs to the harmonic part mω²q²/2"
                    if power == 2 else "U(q) starts at q^3")
            check.flag(path, f"must be zero: {rule}")
            continue
        powers[power] = float(value)
    return powers


def parse_config(text: str, mode: str | None = None) -> RunSpec:
    """Parse and validate a YAML run document.

    `mode` (from the command line) takes precedence over run.mode.
    Raises ParseError for malformed YAML and ValidationError listing every issue.
    """
    try:
        doc = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ParseError(f"malformed configuration: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ParseError("configuration must be a mapping with model, run and output sections")

    check = _Checker()
    for key in doc:
        if key not in ("model", "run", "output"):
            check.flag(str(key), "unknown section")
    model_sec = check.section(doc, "model", MODEL_KEYS)
    run = check.section(doc, "run", RUN_KEYS)
    out = check.section(doc, "output", OUTPUT_KEYS)
    defaults = RunSpec()

    # Model
    model = defaults.model
    m = check.number(model_sec, "model", "m", 1.0, positive=True)
    omega = check.number(model_sec, "model", "omega", 1.0, positive=True)
    hbar = check.number(model_sec, "model", "hbar", 1.0, positive=True)
    if "u_coeffs" in model_sec:
        powers = _u_coeffs(model_sec["u_coeffs"], check)
    else:
        powers = {4: 1 / 24}
    try:
        model = OscillatorModel.from_powers(powers, m=m, omega=omega, hbar=hbar)
    except ModelError as exc:
        check.flag("model", str(exc))

    # Run
    mode = mode if mode is not None else check.choice(run, "run", "mode", defaults.mode, MODES)
    if mode not in MODES:
        check.flag("run.mode", f"must be one of {', '.join(MODES)}")
        mode = defaults.mode
    truncation = check.integer(run, "run", "truncation", defaults.truncation, minimum=2)
    if truncation % 2:
        check.flag("run.truncation", "N must be even and at least 2")
    hbar_order = check.integer(run, "run", "hbar_order", defaults.hbar_order)
    if hbar_order > 2:
        check.flag("run.hbar_order", "must be 0, 1 or 2")
    form = check.choice(run, "run", "form", defaults.form, FORMS)
    adiabatic_default = 4 if mode == "effective" else defaults.adiabatic_order
    adiabatic_order = check.integer(run, "run", "adiabatic_order", adiabatic_default)
    if mode == "effective" and adiabatic_order not in (0, 2, 4):
        check.flag("run.adiabatic_order", "effective runs support 0, 2 or 4")
    elif mode != "effective" and adiabatic_order > 3:
        check.flag("run.adiabatic_order", "initial moments support adiabatic orders 0 to 3")
    moments = check.choice(run, "run", "moments", defaults.moments, MOMENT_MODES)
    if mode != "effective" and moments == "adiabatic_vacuum":
        # G^(1,2) has no order (0,3) value; odd-n moments have none at order (1,1)
        if adiabatic_order == 3:
            check.flag("run.adiabatic_order",
                       "adiabatic_vacuum initial moments support adiabatic orders 0 to 2")
        elif adiabatic_order >= 1 and hbar_order >= 1 and truncation >= 3:
            check.flag("run.adiabatic_order",
                       "adiabatic_vacuum with N >= 3 and hbar_order >= 1 supports adiabatic "
                       "order 0 only")

    fixed_step = None
    if run.get("fixed_step") is not None:
        fixed_step = check.number(run, "run", "fixed_step", None, positive=True)

    inputs = run.get("inputs", ())
    if not isinstance(inputs, (list, tuple)) or not all(isinstance(p, str) for p in inputs):
        check.flag("run.inputs", "must be a list of CSV paths")
        inputs = ()
    sweep = check.section(run, "sweep", SWEEP_KEYS, prefix="run.") if "sweep" in run else {}
    sweep_hbar = sweep.get("hbar", ())
    if not isinstance(sweep_hbar, (list, tuple)) or not all(
            isinstance(h, (int, float)) and not isinstance(h, bool) and h > 0 for h in sweep_hbar):
        check.flag("run.sweep.hbar", "must be a list of positive numbers")
        sweep_hbar = ()
    if mode == "compare" and len(inputs) != 2 and not sweep_hbar:
        check.flag("run.inputs", "compare needs two trajectory CSV inputs or run.sweep.hbar")

    spec = RunSpec(
        model=model,
        mode=mode,
        q0=check.number(run, "run", "q0", defaults.q0),
        p0=check.number(run, "run", "p0", defaults.p0),
        moments=moments,
        adiabatic_order=adiabatic_order,
        truncation=truncation,
        hbar_order=hbar_order,
        closure=check.choice(run, "run", "closure", defaults.closure, CLOSURES),
        t_end=check.number(run, "run", "t_end", defaults.t_end),
        rel_tol=check.number(run, "run", "rel_tol", defaults.rel_tol, positive=True),
        abs_tol=check.number(run, "run", "abs_tol", defaults.abs_tol, positive=True),
        max_step=check.number(run, "run", "max_step", defaults.max_step, positive=True,
                              allow_inf=True),
        fixed_step=fixed_step,
        form=form,
        iterate=check.flag_value(run, "run", "iterate", defaults.iterate),
        seed=check.integer(run, "run", "seed", defaults.seed),
        samples=check.integer(run, "run", "samples", defaults.samples, minimum=1),
        workers=check.integer(run, "run", "workers", defaults.workers, minimum=1),
        inputs=tuple(inputs),
        sweep_hbar=tuple(float(h) for h in sweep_hbar),
        metric=check.choice(run, "run", "metric", defaults.metric, METRICS),
        uncertainty_tol=check.number(run, "run", "uncertainty_tol", defaults.uncertainty_tol,
                                     positive=True),
        stop_on_violation=check.flag_value(run, "run", "stop_on_violation",
                                           defaults.stop_on_violation),
        suite=check.choice(run, "run", "suite", defaults.suite, VERIFY_SUITES),
        output=_optional_path(out, "path", check),
        report=_optional_path(out, "report", check),
        every=check.integer(out, "output", "every", defaults.every, minimum=1),
    )

    if check.issues:
        raise ValidationError(check.issues)
    return spec


def _optional_path(section: dict, key: str, check: _Checker) -> str | None:
    value = section.get(key)
    if value is not None and not isinstance(value, str):
        check.flag(f"output.{key}", "must be a path string")
        return None
    return value


def load_config(path: str | Path, mode: str | None = None) -> RunSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read configuration {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"configuration {path} is not UTF-8: {exc}") from exc
    return parse_config(text, mode)
