"""JSON run configuration and the output record.

A config holds a ``model`` section and optional ``simulation`` and
``analysis`` sections::

    {"model": {"servers": 2, "protocol": "fcfd",
               "classes": [{"rate": 1.0, "service": {"type": "exponential", "rate": 10.0}}]},
     "simulation": {"arrivals": 1000000, "replications": 20, "seed": 42},
     "analysis": {"gamma_mode": "strict-eq8"}}

Unknown keys anywhere are rejected with their path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import distributions
from .analytic import GammaMode
from .model import PriorityClass, Protocol, SystemModel, validate
from .simulator import SimConfig

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config", "model_to_dict", "dump_record"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    model: SystemModel
    simulation: SimConfig | None = None
    gamma_mode: GammaMode = GammaMode.STRICT


def _strict(obj: Any, path: str, required: set[str], optional: set[str] = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    for key in sorted(set(obj) - required - optional):
        raise ConfigError(f"{path}.{key}: unknown key")
    for key in sorted(required - set(obj)):
        raise ConfigError(f"{path}.{key}: required key missing")
    return obj


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _model(obj: Any) -> SystemModel:
    obj = _strict(obj, "model", {"servers", "classes"}, {"protocol"})
    servers = _int(obj["servers"], "model.servers")
    try:
        protocol = Protocol(obj.get("protocol", "fcfd"))
    except ValueError:
        raise ConfigError(f"model.protocol: expected 'fcfd' or 'lcfd', got {obj.get('protocol')!r}") from None
    raw = obj["classes"]
    if not isinstance(raw, list):
        raise ConfigError("model.classes: expected a list")
    classes = []
    for n, item in enumerate(raw):
        path = f"model.classes[{n}]"
        item = _strict(item, path, {"rate", "service"})
        try:
            service = distributions.from_dict(item["service"], f"{path}.service")
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        classes.append(PriorityClass(n + 1, _number(item["rate"], f"{path}.rate"), service))
    model = SystemModel(servers, tuple(classes), protocol)
    problems = validate(model)
    if problems:
        raise ConfigError("invalid model: " + "; ".join(problems))
    return model


_SIM_KEYS = {"arrivals", "replications", "warmup", "seed", "confidence"}


def _simulation(obj: Any) -> SimConfig:
    obj = _strict(obj, "simulation", set(), _SIM_KEYS)
    kwargs: dict[str, Any] = {}
    for key in ("arrivals", "replications", "warmup", "seed"):
        if key in obj:
            kwargs[key] = _int(obj[key], f"simulation.{key}")
    if "confidence" in obj:
        kwargs["confidence"] = _number(obj["confidence"], "simulation.confidence")
    return SimConfig(**kwargs)


def parse_config(data: Any) -> RunConfig:
    data = _strict(data, "config", {"model"}, {"simulation", "analysis"})
    model = _model(data["model"])
    sim = _simulation(data["simulation"]) if "simulation" in data else None
    mode = GammaMode.STRICT
    if "analysis" in data:
        analysis = _strict(data["analysis"], "analysis", set(), {"gamma_mode"})
        if "gamma_mode" in analysis:
            try:
                mode = GammaMode.parse(analysis["gamma_mode"])
            except ValueError:
                raise ConfigError(f"analysis.gamma_mode: unknown mode {analysis['gamma_mode']!r}") from None
    return RunConfig(model, sim, mode)


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_config(data)


def model_to_dict(model: SystemModel) -> dict:
    return {
        "servers": model.servers,
        "protocol": model.protocol.value,
        "classes": [{"rate": c.rate, "service": c.service.to_dict()} for c in model.classes],
    }


def dump_record(record: dict) -> str:
    """Canonical JSON text; parsing and dumping it again reproduces it exactly."""
    return json.dumps(record, sort_keys=True, indent=2, allow_nan=False) + "\n"
