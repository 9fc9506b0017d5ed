"""Plain-text key = value run configuration.

The format is line oriented: ``section.key = value`` pairs, ``#``
comments, blank lines.  Parsing fills defaults, validates every
constraint up front (naming the violated rule), and round-trips through
:func:`serialize_config`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .dynamics import SolverConfig
from .experiments import EXPERIMENT_IDS, LadderSpec
from .spectral import ApproxParams

__all__ = ["RunConfig", "ConfigError", "parse_config", "serialize_config", "DEFAULT_CONFIG"]


class ConfigError(ValueError):
    """Malformed or constraint-violating run configuration."""


@dataclass(frozen=True)
class RunConfig:
    experiments: tuple[str, ...] = EXPERIMENT_IDS
    lambdas: tuple[float, ...] = (16.0, 32.0, 64.0, 128.0)
    s: float = 2.0
    delta: float = 1.5
    cfl: float = 0.3
    t_end: float = 1.0
    record_every: float = 0.25
    dealias_fraction: float = 2.0 / 3.0
    out_dir: str = "chlab-out"
    workers: int = 0
    resolution_multiplier: int = 1

    def validated(self) -> "RunConfig":
        for e in self.experiments:
            if e not in EXPERIMENT_IDS:
                raise ConfigError(f"unknown experiment id {e!r} (valid: {', '.join(EXPERIMENT_IDS)}, all)")
        if not self.experiments:
            raise ConfigError("no experiments selected")
        if len(self.lambdas) < 2 or list(self.lambdas) != sorted(set(self.lambdas)):
            raise ConfigError("ladder.lambdas must be strictly increasing with at least 2 entries")
        try:
            # Delegates the mathematical constraints: lam >= 1, 1 < delta < 2,
            # s > 3/2, and rho = min(1 - delta/2, delta/2 + s - 2) > 0.
            ApproxParams(1.0, self.lambdas[0], self.delta, self.s)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        try:
            self.solver_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.workers < 0:
            raise ConfigError("workers must be >= 0 (0 selects the available parallelism)")
        if self.resolution_multiplier < 1:
            raise ConfigError("resolution_multiplier must be >= 1")
        try:
            self.ladder_spec().validate_against(self.solver_config())
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def ladder_spec(self) -> LadderSpec:
        return LadderSpec(
            lambdas=self.lambdas,
            s=self.s,
            delta=self.delta,
            resolution_multiplier=self.resolution_multiplier,
        )

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            cfl=self.cfl,
            dealias_fraction=self.dealias_fraction,
            t_end=self.t_end,
            record_every=self.record_every,
        )


DEFAULT_CONFIG = RunConfig()

_FLOAT_KEYS = {
    "ladder.s": "s",
    "ladder.delta": "delta",
    "solver.cfl": "cfl",
    "solver.t_end": "t_end",
    "solver.record_every": "record_every",
    "solver.dealias_fraction": "dealias_fraction",
}
_INT_KEYS = {"workers": "workers", "resolution_multiplier": "resolution_multiplier"}


def _parse_float(raw: str, line_no: int, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"line {line_no}: value for {key} is not a number: {raw!r}") from None


def parse_config(text: str) -> RunConfig:
    """Parse a key = value document into a validated RunConfig.

    An empty document yields the full defaults.  Syntax problems report
    the line number; constraint violations name the violated rule.
    """
    cfg = DEFAULT_CONFIG
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw_line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if not raw:
            raise ConfigError(f"line {line_no}: empty value for {key!r}")
        if key == "experiments":
            ids = tuple(e.strip() for e in raw.split(",") if e.strip())
            if ids == ("all",):
                ids = EXPERIMENT_IDS
            cfg = replace(cfg, experiments=ids)
        elif key == "ladder.lambdas":
            lams = tuple(_parse_float(v, line_no, key) for v in raw.split(","))
            cfg = replace(cfg, lambdas=lams)
        elif key in _FLOAT_KEYS:
            cfg = replace(cfg, **{_FLOAT_KEYS[key]: _parse_float(raw, line_no, key)})
        elif key in _INT_KEYS:
            try:
                val = int(raw)
            except ValueError:
                raise ConfigError(f"line {line_no}: value for {key} is not an integer: {raw!r}") from None
            cfg = replace(cfg, **{_INT_KEYS[key]: val})
        elif key == "output.dir":
            cfg = replace(cfg, out_dir=raw)
        else:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
    return cfg.validated()


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; parse(serialize(cfg)) is semantically cfg."""
    lines = [
        "experiments = " + ",".join(cfg.experiments),
        "ladder.lambdas = " + ",".join(f"{v:.17g}" for v in cfg.lambdas),
        f"ladder.s = {cfg.s:.17g}",
        f"ladder.delta = {cfg.delta:.17g}",
        f"solver.cfl = {cfg.cfl:.17g}",
        f"solver.t_end = {cfg.t_end:.17g}",
        f"solver.record_every = {cfg.record_every:.17g}",
        f"solver.dealias_fraction = {cfg.dealias_fraction:.17g}",
        f"output.dir = {cfg.out_dir}",
        f"workers = {cfg.workers}",
        f"resolution_multiplier = {cfg.resolution_multiplier}",
    ]
    return "\n".join(lines) + "\n"
