"""Run configuration: key=value or JSON, validated against the requirements file."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigInvalid, MalformedVersion, PinMismatch
from .versioning import Version, normalize_name, parse_requirements, parse_version

KNOWLEDGE_ENV = "REQSOLVE_KNOWLEDGE"

# accepted spellings for each field
_KEYS = {
    "project_path": ("project_path", "project", "project path"),
    "requirements_path": ("requirements_path", "requirements", "requirements path"),
    "target_name": ("target_name", "target", "target tpl", "target_tpl", "target tpl name", "tpl"),
    "current_version": ("current_version", "current version"),
    "target_version": ("target_version", "target version"),
    "python_version": ("python_version", "python version", "python"),
    "knowledge_path": ("knowledge_path", "knowledge", "path of knowledge", "knowledge path"),
    "index_url": ("index_url", "index", "index url"),
    "offline": ("offline",),
    "max_iterations": ("max_iterations",),
    "max_seconds": ("max_seconds", "time_budget"),
    "max_depth": ("max_depth", "call_graph_depth"),
    "output_dir": ("output_dir", "output"),
    "aliases": ("aliases", "import_names"),
}
_REQUIRED = ("project_path", "requirements_path", "target_name", "current_version", "target_version")


@dataclass
class Config:
    project_path: Path
    requirements_path: Path
    target_name: str
    current_version: Version
    target_version: Version
    python_version: str = "3.10"
    knowledge_path: Path = Path(".reqsolve-knowledge")
    index_url: str | None = None
    offline: bool = False
    max_iterations: int = 50
    max_seconds: float = 600.0
    max_depth: int = 10
    output_dir: Path | None = None
    aliases: dict[str, list[str]] = field(default_factory=dict)


def _parse_text(text: str) -> dict[str, Any]:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid("<file>", f"bad JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigInvalid("<file>", "top level must be an object")
        return data
    data: dict[str, Any] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ConfigInvalid(f"line {n}", "expected key=value")
        key, value = line.split(sep, 1)
        data[key.strip()] = value.strip()
    return data


def _canonical(raw: dict[str, Any]) -> dict[str, Any]:
    lookup = {alias: name for name, aliases in _KEYS.items() for alias in aliases}
    out: dict[str, Any] = {}
    for key, value in raw.items():
        name = lookup.get(key.strip().lower().replace("-", "_")) or lookup.get(key.strip().lower())
        if name is None:
            raise ConfigInvalid(key, "unknown key")
        out[name] = value
    return out


def _bool(field_name: str, value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off", ""):
        return False
    raise ConfigInvalid(field_name, f"not a boolean: {value!r}")


def _number(field_name: str, value: Any, kind=int):
    try:
        n = kind(value)
    except (TypeError, ValueError):
        raise ConfigInvalid(field_name, f"not a number: {value!r}") from None
    if n <= 0:
        raise ConfigInvalid(field_name, "must be positive")
    return n


def _aliases(value: Any) -> dict[str, list[str]]:
    if isinstance(value, str):
        # "pillow:PIL,scikit-learn:sklearn"
        out: dict[str, list[str]] = {}
        for part in filter(None, (p.strip() for p in value.split(","))):
            pkg, _, name = part.partition(":")
            if not name:
                raise ConfigInvalid("aliases", f"expected package:import_name, got {part!r}")
            out.setdefault(normalize_name(pkg), []).append(name.strip())
        return out
    if isinstance(value, dict):
        return {normalize_name(k): [v] if isinstance(v, str) else list(v) for k, v in value.items()}
    raise ConfigInvalid("aliases", "expected a mapping")


def load_config(path: str | Path) -> Config:
    """Read and validate a configuration file; relative paths are taken from its directory."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid("config", f"cannot read {path}: {exc}") from None
    return config_from_mapping(_parse_text(text), path.parent)


def config_from_mapping(raw: dict[str, Any], base: Path = Path(".")) -> Config:
    data = _canonical(raw)
    for name in _REQUIRED:
        if data.get(name) in (None, ""):
            raise ConfigInvalid(name, "missing")

    def as_path(value: Any) -> Path:
        p = Path(str(value)).expanduser()
        return p if p.is_absolute() else (base / p).resolve()

    def as_version(name: str) -> Version:
        try:
            return parse_version(str(data[name]))
        except MalformedVersion as exc:
            raise ConfigInvalid(name, str(exc)) from None

    project = as_path(data["project_path"])
    requirements = as_path(data["requirements_path"])
    if not project.is_dir():
        raise ConfigInvalid("project_path", f"not a readable directory: {project}")
    if not requirements.is_file():
        raise ConfigInvalid("requirements_path", f"not a readable file: {requirements}")
    target = normalize_name(str(data["target_name"]))
    current, wanted = as_version("current_version"), as_version("target_version")

    pins = parse_requirements(requirements.read_text(encoding="utf-8"))
    if target not in pins:
        raise ConfigInvalid("target_name", f"{target} is not pinned in {requirements}")
    if pins[target] != current:
        raise PinMismatch(target, str(current), str(pins[target]))

    env_knowledge = os.environ.get(KNOWLEDGE_ENV)
    if env_knowledge:
        knowledge = Path(env_knowledge).expanduser().resolve()
    elif data.get("knowledge_path"):
        knowledge = as_path(data["knowledge_path"])
    else:
        knowledge = (base / ".reqsolve-knowledge").resolve()

    cfg = Config(project, requirements, target, current, wanted, knowledge_path=knowledge)
    if data.get("python_version"):
        cfg.python_version = str(data["python_version"])
        try:
            parse_version(cfg.python_version)
        except MalformedVersion:
            raise ConfigInvalid("python_version", f"not a version: {cfg.python_version!r}") from None
    if data.get("index_url"):
        cfg.index_url = str(data["index_url"])
    if "offline" in data:
        cfg.offline = _bool("offline", data["offline"])
    if "max_iterations" in data:
        cfg.max_iterations = _number("max_iterations", data["max_iterations"])
    if "max_seconds" in data:
        cfg.max_seconds = _number("max_seconds", data["max_seconds"], float)
    if "max_depth" in data:
        cfg.max_depth = _number("max_depth", data["max_depth"])
    if data.get("output_dir"):
        cfg.output_dir = as_path(data["output_dir"])
    if "aliases" in data:
        cfg.aliases = _aliases(data["aliases"])
    return cfg
