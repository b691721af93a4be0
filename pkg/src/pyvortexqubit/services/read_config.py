"""
Config Reading Utilities

Type-safe dispatch for opening experiment configuration files, and lookup
of the configurations bundled with the package.

Supported File Types
--------------------
- .yaml
- .yml
- .json
"""

# Built-Ins
from importlib import resources
from pathlib import Path
from typing import Any, Protocol
import json
import logging

# Dependencies
import yaml  # type: ignore[import-untyped]

# Local Imports
from pyvortexqubit.config import ExperimentConfig, load_config
from pyvortexqubit.custom_types import (
    ConfigFileTypes,
    PathLike,
    is_valid_config_file,
)
from pyvortexqubit.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

BUNDLED_PACKAGE = "pyvortexqubit.data"
BUNDLED_DIRECTORY = "configs"


class ConfigHandler(Protocol):
    def __call__(self, text: str) -> Any: ...

    """
    Parse the text of a config file.

    Returns
    -------
    data: Any
        The parsed document; a mapping for any valid config.

    Raises
    ------
    ConfigurationError
        If the text is not valid for the format.
    """


def parse_yaml(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigurationError(f"Invalid YAML: {err}") from err


def parse_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigurationError(f"Invalid JSON: {err}") from err


# Mapping from lowercase file extension to parser.
CONFIG_HANDLERS: dict[ConfigFileTypes, ConfigHandler] = {
    ".yaml": parse_yaml,
    ".yml": parse_yaml,
    ".json": parse_json,
}


def bundled_configs() -> dict[str, Path]:
    """Names and paths of the configurations shipped with the package."""
    root = resources.files(BUNDLED_PACKAGE) / BUNDLED_DIRECTORY
    found = {}
    for entry in root.iterdir():
        suffix = Path(entry.name).suffix.lower()
        if is_valid_config_file(suffix):
            found[Path(entry.name).stem] = Path(str(entry))
    return dict(sorted(found.items()))


def resolve_config_path(path_or_name: PathLike) -> Path:
    """
    Locate a config given either a path or a bundled config name.

    Raises
    ------
    ConfigurationError
        If neither a file nor a bundled config of that name exists.
    """
    path = Path(path_or_name)
    if path.exists():
        return path
    bundled = bundled_configs()
    if str(path_or_name) in bundled:
        return bundled[str(path_or_name)]
    raise ConfigurationError(
        f"No config file or bundled config named {str(path_or_name)!r}; "
        f"bundled configs are {', '.join(bundled)}"
    )


def open_config(path_or_name: PathLike) -> ExperimentConfig:
    """
    Read and validate an experiment configuration.

    The config name defaults to the file stem when the file does not set
    one.

    Parameters
    ----------
    path_or_name: str or Path
        Path to a .yaml/.yml/.json file, or the name of a bundled config.

    Returns
    -------
    config: ExperimentConfig
        The validated configuration.

    Raises
    ------
    ConfigurationError
        If the file cannot be found, parsed or validated.
    """
    path = resolve_config_path(path_or_name)
    suffix = path.suffix.lower()
    if not is_valid_config_file(suffix):
        raise ConfigurationError(f"Invalid config file type: {suffix}")
    handler = CONFIG_HANDLERS[suffix]
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigurationError(f"Cannot read {path}: {err}") from err
    data = handler(text)
    if not isinstance(data, dict):
        raise ConfigurationError(
            f"{path.name} must contain a mapping at the top level"
        )
    data.setdefault("name", path.stem)
    logger.debug("Loaded config %s", path)
    return load_config(data)
