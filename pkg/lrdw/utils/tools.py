from __future__ import annotations

__all__ = ["ConfigEncoder", "ConfigError", "config_json"]

import enum
import json
from logging import Logger
from typing import Any, Mapping

import numpy as np


class ConfigEncoder(json.JSONEncoder):
    """
    Echoes configuration values: numpy scalars and arrays become plain numbers
    and lists, enums their values, loggers their names; anything else its str.
    """

    def default(self, obj: Any) -> Any:
        if isinstance(obj, np.generic):
            return obj.item()
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, enum.Enum):
            return obj.value
        if isinstance(obj, Logger):
            return obj.name
        try:
            return json.JSONEncoder.default(self, obj)
        except TypeError:
            return str(obj)


def config_json(config: Mapping[str, Any]) -> str:
    # single line, keys sorted, so the echo is byte-stable
    return json.dumps(
        config, cls=ConfigEncoder, sort_keys=True, separators=(",", ":")
    )


class ConfigError(ValueError):
    def __init__(self, msg: str, field: str = None):
        super(ConfigError, self).__init__(msg)
        self.field = field

    def __str__(self):
        if self.field:
            return f"{self.field}: {super(ConfigError, self).__str__()}"
        return super(ConfigError, self).__str__()
