"""Flat ``key = value`` run configuration and its JSON twin.

Scalars: reduced_mass, alpha, beta, l1, l2, kappa1, kappa2 and optionally
mu0, r0, m3, n3.  Vector blocks x0, p0, mu, m, nu, n are comma-separated
triples.  ``potential`` selects the pair potential by name.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import presets
from .core_model import StateVector, SystemParams
from .errors import ConfigError, RelequilError
from .magnet_potential import POTENTIALS, PotentialModel, make_potential
from .relative_equilibria import build_equilibrium_point, solve_force_balance

PARAM_KEYS = ("reduced_mass", "alpha", "beta", "l1", "l2", "kappa1", "kappa2", "mu0")
OPTIONAL_SCALARS = ("r0", "m3", "n3")
STATE_KEYS = ("x0", "p0", "mu", "m", "nu", "n")
REQUIRED = PARAM_KEYS[:-1]


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    potential_name: str = "cylinder4charge"
    state: StateVector | None = None
    r0: float | None = None
    m3: float | None = None
    n3: float | None = None

    def potential(self) -> PotentialModel:
        return make_potential(self.potential_name, self.params)

    def spins(self) -> tuple[float, float]:
        m3 = self.m3 if self.m3 is not None else (float(self.state.m[2]) if self.state is not None else 0.0)
        n3 = self.n3 if self.n3 is not None else (float(self.state.n[2]) if self.state is not None else 0.0)
        return m3, n3

    def radius(self) -> float | None:
        if self.r0 is not None:
            return self.r0
        if self.state is not None:
            return float(np.linalg.norm(self.state.x))
        return None

    def to_dict(self) -> dict:
        out: dict = {k: v for k, v in self.params.to_dict().items()}
        out["potential"] = self.potential_name
        for key in OPTIONAL_SCALARS:
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        if self.state is not None:
            for key, block in zip(STATE_KEYS, self.state.blocks().values()):
                out[key] = [float(v) for v in block]
        return out


def _parse_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as a number") from None


def _parse_triple(key: str, text: str) -> list[float]:
    parts = [t.strip() for t in text.strip().strip("[]").split(",") if t.strip()]
    if len(parts) != 3:
        raise ConfigError(f"{key}: expected three comma-separated numbers, got {text!r}")
    return [_parse_float(key, t) for t in parts]


def parse_config_text(text: str, source: str = "<string>") -> RunConfig:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value.strip("\"'")
    return config_from_mapping(values, source)


def config_from_mapping(values: dict, source: str = "<mapping>") -> RunConfig:
    known = set(PARAM_KEYS) | set(OPTIONAL_SCALARS) | set(STATE_KEYS) | {"potential"}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"{source}: unknown keys {unknown}")
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"{source}: missing keys {missing}")

    def triple(key):
        v = values[key]
        return [_parse_float(key, str(t)) for t in v] if isinstance(v, (list, tuple)) else _parse_triple(key, v)

    try:
        params = SystemParams(**{k: _parse_float(k, str(values[k])) for k in PARAM_KEYS if k in values})
        potential = str(values.get("potential", "cylinder4charge"))
        if potential not in POTENTIALS:
            raise ConfigError(f"{source}: unknown potential {potential!r}")
        present = [k for k in STATE_KEYS if k in values]
        state = None
        if present:
            if len(present) != len(STATE_KEYS):
                raise ConfigError(f"{source}: state needs all of {list(STATE_KEYS)}, got {present}")
            state = StateVector.from_blocks(*(triple(k) for k in STATE_KEYS))
        extras = {k: _parse_float(k, str(values[k])) for k in OPTIONAL_SCALARS if k in values}
    except ConfigError:
        raise
    except RelequilError as err:
        raise ConfigError(f"{source}: {err}") from err
    return RunConfig(params=params, potential_name=potential, state=state, **extras)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {str(path)!r}: {err.strerror}") from None
    if path.suffix == ".json":
        try:
            return config_from_mapping(json.loads(text), str(path))
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: invalid JSON ({err})") from None
    return parse_config_text(text, str(path))


def format_config(cfg: RunConfig) -> str:
    lines = []
    for key, value in cfg.to_dict().items():
        if isinstance(value, list):
            value = ", ".join(repr(v) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def save_config(path, cfg: RunConfig) -> None:
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
    else:
        path.write_text(format_config(cfg))


def reference_config() -> RunConfig:
    """Reference parameters with the state placed on the circular orbit."""
    params = presets.reference_params()
    pot = make_potential("cylinder4charge", params)
    p0, _ = solve_force_balance(presets.R0, params, pot)
    m3, n3 = presets.reference_spins()
    state = build_equilibrium_point(presets.R0, p0, m3, n3)
    return RunConfig(params=params, state=state, r0=presets.R0, m3=m3, n3=n3)
