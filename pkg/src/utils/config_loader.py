"""
Configuration loader with variable substitution and dotted-key support

Config files are YAML. Sections may be written nested

    chain:
      tau_grid: [1, 2, 4]

or as flat dotted keys with comma-separated grids

    chain.tau_grid: "1,2,4"

and both forms can be mixed in one file.
"""

import re
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from ..errors import ConfigurationError

_VAR_PATTERN = re.compile(r'\$\{([^}]+)\}')


def load_yaml(path: str | Path) -> Dict[str, Any]:
    """
    Load YAML configuration file

    Args:
        path: Path to YAML file

    Returns:
        Dictionary containing configuration

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigurationError: If the top level is not a mapping
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")

    with open(path, 'r', encoding='utf-8') as f:
        config = yaml.safe_load(f)

    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ConfigurationError(f"Config file {path} must contain a mapping, got {type(config).__name__}")
    return config


def expand_dotted_keys(config: Dict[str, Any]) -> Dict[str, Any]:
    """
    Turn flat dotted keys into nested sections

    {'problem.kind': 'X', 'problem': {'mu': 1}} -> {'problem': {'kind': 'X', 'mu': 1}}

    Raises:
        ConfigurationError: If a dotted key collides with a scalar value
    """
    result: Dict[str, Any] = {}
    for key, value in config.items():
        if isinstance(value, dict):
            value = expand_dotted_keys(value)
        parts = str(key).split('.')
        node = result
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigurationError(f"Key '{key}' conflicts with scalar '{part}'")
            node = child
        leaf = parts[-1]
        if isinstance(value, dict) and isinstance(node.get(leaf), dict):
            node[leaf] = {**node[leaf], **value}
        else:
            node[leaf] = value
    return result


def substitute_variables(config: Dict[str, Any], context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Recursively substitute ${var} style variables in config

    Args:
        config: Configuration dictionary
        context: Variable context for substitution (the config's own
            top-level scalars are always available)

    Returns:
        Config with variables substituted
    """
    scope = dict(context or {})
    scope.update({k: v for k, v in config.items() if not isinstance(v, (dict, list))})

    def _substitute(obj):
        if isinstance(obj, str):
            return _VAR_PATTERN.sub(
                lambda m: str(scope[m.group(1)]) if m.group(1) in scope else m.group(0),
                obj,
            )
        if isinstance(obj, dict):
            return {k: _substitute(v) for k, v in obj.items()}
        if isinstance(obj, list):
            return [_substitute(item) for item in obj]
        return obj

    return _substitute(config)


def parse_grid(value: Any, cast=float, key: str = "grid") -> List:
    """
    Parse a grid given as a YAML list, a scalar or a comma-separated string

    Raises:
        ConfigurationError: If the grid is empty or an entry cannot be cast
    """
    if isinstance(value, str):
        items = [item.strip() for item in value.split(',') if item.strip()]
    elif isinstance(value, (list, tuple)):
        items = list(value)
    elif value is None:
        items = []
    else:
        items = [value]

    if not items:
        raise ConfigurationError(f"Grid '{key}' must be non-empty")
    try:
        return [cast(float(item)) if cast is int else cast(item) for item in items]
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Invalid entry in grid '{key}': {e}")


def get_project_root() -> Path:
    """Get project root directory"""
    # This file lives in src/utils/
    return Path(__file__).parent.parent.parent


def load_paths_config() -> Dict[str, Any]:
    """
    Load config/paths.yaml with variable substitution

    Relative directories are resolved against the project root.
    """
    project_root = get_project_root()
    config_path = project_root / "config" / "paths.yaml"
    if not config_path.exists():
        return {}

    config = substitute_variables(load_yaml(config_path))
    for key, value in list(config.items()):
        if key.endswith('_dir') and isinstance(value, str):
            path = Path(value)
            if not path.is_absolute():
                config[key] = str((project_root / path).resolve())
    return config


def load_config(path: str | Path, overrides: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Load a YAML config, expand dotted keys and substitute path variables

    Args:
        path: Config file path
        overrides: Optional dotted-key overrides applied last

    Returns:
        Nested configuration dictionary
    """
    raw = load_yaml(path)
    if overrides:
        raw = {**raw, **overrides}
    config = expand_dotted_keys(raw)
    return substitute_variables(config, context=load_paths_config())
