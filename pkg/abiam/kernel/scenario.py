import copy
import hashlib
import json
from importlib import resources
from pathlib import Path
from typing import Any

import yaml
from loguru import logger
from pydantic import ValidationError

from abiam.exceptions import ConfigError, ConfigParseError, MissingParameterError, UnknownKeyError
from abiam.kernel.registry import known_parameters, required_parameters
from abiam.schemas import ScenarioConfig

TOP_LEVEL_KEYS = frozenset(
    {"preset", "extends", "granularity", "regions", "horizon", "variants", "population", "parameters", "policy"}
)
SECTIONS = ("variants", "population", "parameters", "policy")
PRESET_PACKAGE = "abiam.presets"


def _parse(text: str) -> dict[str, Any]:
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark
        raise ConfigParseError(
            e.problem or "Invalid document",
            line=mark.line + 1 if mark else None,
            column=mark.column + 1 if mark else None,
        ) from e
    except yaml.YAMLError as e:
        raise ConfigParseError(str(e)) from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigParseError("Top level of a scenario document must be a mapping", line=1, column=1)
    for key in data:
        if key not in TOP_LEVEL_KEYS:
            raise UnknownKeyError(str(key), section="document")
    for section in SECTIONS:
        if section in data and data[section] is not None and not isinstance(data[section], dict):
            raise ConfigParseError(f"Section '{section}' must be a mapping")
    return data


def preset_names() -> list[str]:
    files = resources.files(PRESET_PACKAGE).iterdir()
    return sorted(f.name[: -len(".yaml")] for f in files if f.name.endswith(".yaml") and f.name != "base.yaml")


def _preset_text(name: str) -> str:
    resource = resources.files(PRESET_PACKAGE).joinpath(f"{name}.yaml")
    if not resource.is_file():
        raise ConfigError(f"Unknown preset '{name}'")
    return resource.read_text(encoding="utf-8")


def merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if key in SECTIONS and isinstance(value, dict):
            merged[key] = {**merged.get(key, {}), **copy.deepcopy(value)}
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _resolve(data: dict[str, Any], base_dir: Path | None, chain: tuple[str, ...]) -> dict[str, Any]:
    parent: dict[str, Any] = {}
    if "preset" in data and "extends" in data:
        raise ConfigError("A document may name either 'preset' or 'extends', not both")
    if data.get("preset") not in (None, "custom"):
        name = str(data["preset"])
        if name in chain:
            raise ConfigError(f"Preset cycle: {' -> '.join(chain + (name,))}")
        parent = _resolve(_parse(_preset_text(name)), None, chain + (name,))
    elif data.get("extends"):
        path = Path(data["extends"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        key = str(path.resolve())
        if key in chain:
            raise ConfigError(f"Document cycle at {path}")
        parent = _resolve(_parse(path.read_text(encoding="utf-8")), path.parent, chain + (key,))
    own = {k: v for k, v in data.items() if k not in ("preset", "extends") and v is not None}
    return merge(parent, own)


def _set_path(data: dict[str, Any], key: str, value: Any) -> None:
    parts = key.split(".")
    if len(parts) == 1 and parts[0] not in TOP_LEVEL_KEYS:
        parts = ["parameters", parts[0]]
    if parts[0] not in TOP_LEVEL_KEYS:
        raise UnknownKeyError(parts[0], section="document")
    target = data
    for part in parts[:-1]:
        target = target.setdefault(part, {})
    target[parts[-1]] = value


def apply_overrides(data: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Apply `KEY=VALUE` assignments. Bare keys address the parameter table."""
    result = copy.deepcopy(data)
    for item in overrides:
        if "=" not in item:
            raise ConfigParseError(f"Override '{item}' is not of the form KEY=VALUE")
        key, raw = item.split("=", 1)
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as e:
            raise ConfigParseError(f"Override '{item}' has an unreadable value") from e
        _set_path(result, key.strip(), value)
    return result


def _validate(resolved: dict[str, Any], preset: str) -> ScenarioConfig:
    known = known_parameters()
    for name in resolved.get("parameters", {}):
        if name not in known:
            raise UnknownKeyError(str(name), section="parameters")
    try:
        config = ScenarioConfig(preset=preset, **resolved)
    except ValidationError as e:
        error = e.errors()[0]
        location = ".".join(str(part) for part in error["loc"])
        if error["type"] == "extra_forbidden":
            section = location.rsplit(".", 1)[0] if "." in location else "document"
            raise UnknownKeyError(location.rsplit(".", 1)[-1], section=section) from e
        raise ConfigError(f"Invalid value for '{location}': {error['msg']}") from e
    selection = config.variants.model_dump()
    for name, variant in required_parameters(selection):
        if name not in config.parameters:
            raise MissingParameterError(name, variant)
    return config


def load_document(
    text: str,
    overrides: list[str] | None = None,
    base_dir: Path | None = None,
    preset_name: str | None = None,
) -> ScenarioConfig:
    data = _parse(text)
    resolved = _resolve(data, base_dir, ())
    if overrides:
        resolved = apply_overrides(resolved, overrides)
    name = preset_name or str(data.get("preset") or "custom")
    config = _validate(resolved, name)
    logger.debug(f"Loaded scenario '{name}' ({config.granularity.value}, horizon {config.horizon})")
    return config


def load_config(text: str) -> ScenarioConfig:
    return load_document(text)


def load_config_file(path: str | Path, overrides: list[str] | None = None) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read {path}: {e.strerror}") from e
    return load_document(text, overrides, base_dir=path.parent)


def load_preset(name: str, overrides: list[str] | None = None) -> ScenarioConfig:
    return load_document(f"preset: {name}\n", overrides, preset_name=name)


def config_digest(config: ScenarioConfig) -> str:
    payload = json.dumps(config.model_dump(mode="json"), sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
