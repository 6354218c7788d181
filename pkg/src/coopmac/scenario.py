"""Scenario files: experiment descriptions for the CLI and demos.

A scenario is a flat text file of ``key = value`` lines describing the
fading model, noise and budget parameters, solver settings, and sweep
configuration. Blank lines and ``#`` comments are ignored. Values may
be scalars, comma-separated lists, or inclusive ranges written as
``start:stop:step``; list and range items can be mixed.

Recognized keys and their defaults (the defaults reproduce the uniform
grid experiment):

==================  =============================================
kind                uniform | rayleigh            (uniform)
direct_values       gains of the two direct links (0.025:0.25:0.025)
inter_values        gains of the inter-user links (0.26:0.35:0.01)
mean_direct         Rayleigh mean direct gain     (0.3)
mean_inter          Rayleigh mean inter gain      (0.6)
n_samples           Rayleigh sample count         (1000)
seed                Rayleigh sampling seed        (7)
tie_inter_links     draw h12 = h21 jointly        (false)
noise0/1/2          receiver noise variances      (1.0)
budget1/2           average power budgets         (1.0)
step_a, step_b      step-size parameters          (50, 5)
max_iters           solver iteration budget       (1000)
eps_sqrt            derivative clamp              (1e-9)
n_weights           weight-fan size for sweeps    (17)
modes               scheme modes to sweep         (all four)
log_base            e | 2 for emitted rates       (e)
out_dir             artifact directory            (artifacts)
==================  =============================================

Two presets ship with the package: ``uniform_paper`` (the 10x10x10x10
uniform grid) and ``rayleigh_paper`` (Monte-Carlo Rayleigh fading with
means 0.3/0.6). ``load_scenario`` accepts either a filesystem path or
a preset name.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from importlib import resources

import numpy as np

from .ensemble import Ensemble, NoiseVariances, build_rayleigh_mc, \
    build_uniform_grid
from .region import SchemeMode, default_weights
from .solver import SolverConfig


class ScenarioParseError(Exception):
    """The scenario file could not be read as key = value lines."""


class ScenarioValidationError(ValueError):
    """The parsed scenario violates one or more field constraints."""


def _parse_number_list(text: str) -> tuple[float, ...]:
    values: list[float] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            raise ValueError("empty list item")
        if ":" in item:
            parts = item.split(":")
            if len(parts) != 3:
                raise ValueError(f"range must be start:stop:step, "
                                 f"got {item!r}")
            start, stop, step = (float(p) for p in parts)
            if step <= 0.0:
                raise ValueError(f"range step must be positive in {item!r}")
            count = int(round((stop - start) / step)) + 1
            if count < 1:
                raise ValueError(f"empty range {item!r}")
            values.extend(start + step * k for k in range(count))
        else:
            values.append(float(item))
    return tuple(values)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_modes(text: str) -> tuple[SchemeMode, ...]:
    modes = []
    for item in text.split(","):
        item = item.strip()
        try:
            modes.append(SchemeMode(item))
        except ValueError:
            known = ", ".join(m.value for m in SchemeMode)
            raise ValueError(f"unknown mode {item!r} (known: {known})")
    return tuple(modes)


@dataclass(frozen=True)
class Scenario:
    """Validated experiment description."""

    kind: str = "uniform"
    direct_values: tuple[float, ...] = tuple(0.025 * k for k in range(1, 11))
    inter_values: tuple[float, ...] = tuple(0.26 + 0.01 * k for k in range(10))
    mean_direct: float = 0.3
    mean_inter: float = 0.6
    n_samples: int = 1000
    seed: int = 7
    tie_inter_links: bool = False
    noise0: float = 1.0
    noise1: float = 1.0
    noise2: float = 1.0
    budget1: float = 1.0
    budget2: float = 1.0
    step_a: float = 50.0
    step_b: float = 5.0
    max_iters: int = 1000
    eps_sqrt: float = 1e-9
    n_weights: int = 17
    modes: tuple[SchemeMode, ...] = tuple(SchemeMode)
    log_base: str = "e"
    out_dir: str = "artifacts"
    label: str = ""

    def noise(self) -> NoiseVariances:
        return NoiseVariances(self.noise0, self.noise1, self.noise2)

    def budgets(self) -> tuple[float, float]:
        return (self.budget1, self.budget2)

    def solver_config(self, max_iters: int | None = None) -> SolverConfig:
        return SolverConfig(step_a=self.step_a, step_b=self.step_b,
                            max_iters=max_iters or self.max_iters,
                            eps_sqrt=self.eps_sqrt)

    def weight_list(self) -> list[tuple[float, float]]:
        return default_weights(self.n_weights)

    def build_ensemble(self) -> Ensemble:
        if self.kind == "uniform":
            return build_uniform_grid(
                np.array(self.direct_values), np.array(self.inter_values),
                noise=self.noise(), budgets=self.budgets(),
                tie_inter_links=self.tie_inter_links)
        return build_rayleigh_mc(
            self.mean_direct, self.mean_inter, self.n_samples, self.seed,
            noise=self.noise(), budgets=self.budgets(),
            tie_inter_links=self.tie_inter_links)


_FIELD_PARSERS = {
    "kind": str.strip,
    "direct_values": _parse_number_list,
    "inter_values": _parse_number_list,
    "mean_direct": float,
    "mean_inter": float,
    "n_samples": int,
    "seed": int,
    "tie_inter_links": _parse_bool,
    "noise0": float,
    "noise1": float,
    "noise2": float,
    "budget1": float,
    "budget2": float,
    "step_a": float,
    "step_b": float,
    "max_iters": int,
    "eps_sqrt": float,
    "n_weights": int,
    "modes": _parse_modes,
    "log_base": str.strip,
    "out_dir": str.strip,
}


def validate_scenario(scenario: Scenario) -> Scenario:
    """Check every field constraint, reporting all violations at once."""
    problems: list[str] = []
    if scenario.kind not in ("uniform", "rayleigh"):
        problems.append(f"kind must be uniform or rayleigh, "
                        f"got {scenario.kind!r}")
    if scenario.kind == "uniform":
        if len(scenario.direct_values) == 0:
            problems.append("direct_values must be non-empty")
        elif min(scenario.direct_values) < 0.0:
            problems.append("direct_values must be nonnegative")
        if len(scenario.inter_values) == 0:
            problems.append("inter_values must be non-empty")
        elif min(scenario.inter_values) < 0.0:
            problems.append("inter_values must be nonnegative")
    if scenario.kind == "rayleigh":
        if scenario.mean_direct <= 0.0:
            problems.append("mean_direct must be positive")
        if scenario.mean_inter <= 0.0:
            problems.append("mean_inter must be positive")
        if scenario.n_samples < 1:
            problems.append("n_samples must be at least 1")
        if scenario.seed < 0:
            problems.append("seed must be nonnegative")
    for name in ("noise0", "noise1", "noise2", "budget1", "budget2"):
        if getattr(scenario, name) <= 0.0:
            problems.append(f"{name} must be positive")
    if scenario.step_a <= 0.0:
        problems.append("step_a must be positive")
    if scenario.step_b < 0.0:
        problems.append("step_b must be nonnegative")
    if scenario.max_iters < 1:
        problems.append("max_iters must be at least 1")
    if scenario.eps_sqrt <= 0.0:
        problems.append("eps_sqrt must be positive")
    if scenario.n_weights < 1:
        problems.append("n_weights must be at least 1")
    if len(scenario.modes) == 0:
        problems.append("modes must be non-empty")
    if scenario.log_base not in ("e", "2"):
        problems.append(f"log_base must be e or 2, "
                        f"got {scenario.log_base!r}")
    if problems:
        raise ScenarioValidationError("; ".join(problems))
    return scenario


def parse_scenario_text(text: str, origin: str = "<string>") -> Scenario:
    """Parse scenario source text; see the module docstring for the
    grammar. Raises ScenarioParseError with line diagnostics, or
    ScenarioValidationError when fields are inconsistent."""
    assignments: dict[str, object] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioParseError(
                f"{origin}:{lineno}: expected 'key = value', "
                f"got {raw_line.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _FIELD_PARSERS:
            raise ScenarioParseError(
                f"{origin}:{lineno}: unknown key {key!r}")
        if key in assignments:
            raise ScenarioParseError(
                f"{origin}:{lineno}: duplicate key {key!r}")
        try:
            assignments[key] = _FIELD_PARSERS[key](value)
        except ValueError as exc:
            raise ScenarioParseError(
                f"{origin}:{lineno}: bad value for {key!r}: {exc}")
    if not assignments:
        raise ScenarioParseError(f"{origin}: no scenario keys found")
    return validate_scenario(Scenario(**assignments))


def parse_scenario(path: str) -> Scenario:
    """Parse a scenario file from disk."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read scenario {path!r}: {exc}")
    scenario = parse_scenario_text(text, origin=path)
    label = os.path.splitext(os.path.basename(path))[0]
    return replace(scenario, label=label)


def preset_names() -> list[str]:
    root = resources.files("coopmac").joinpath("presets")
    return sorted(entry.name[:-4] for entry in root.iterdir()
                  if entry.name.endswith(".scn"))


def load_scenario(source: str) -> Scenario:
    """Load a scenario from a path, or from a bundled preset name such
    as ``uniform_paper``."""
    if os.path.exists(source):
        return parse_scenario(source)
    preset = resources.files("coopmac").joinpath("presets",
                                                 f"{source}.scn")
    if preset.is_file():
        scenario = parse_scenario_text(preset.read_text(encoding="utf-8"),
                                       origin=f"preset:{source}")
        return replace(scenario, label=source)
    known = ", ".join(preset_names())
    raise ScenarioParseError(
        f"no scenario file or preset named {source!r} (presets: {known})")
