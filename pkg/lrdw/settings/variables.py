from __future__ import annotations

import argparse
import enum
import json
from logging import Logger
from os import getenv as _getenv
from typing import Any, Callable, ClassVar, Dict, Final, List, Mapping, cast

__all__ = [
    "DefaultVars",
    "PROG_NAME",
    "VERSION",
    "CSV_SCHEMA",
    "ErrorCode",
    "ExperimentName",
    "ControllerOptionNames",
    "SHELL_PARSER_GROUP_NAME",
    "parse_float_list",
    "parse_int_list",
    "parse_threads",
]

from lrdw.covariance.synth import NoiseKind, Normalization
from lrdw.settings.types import VarClass, VarDict, VarFieldNames
from lrdw.utils.logger import AVAILABLE_LOGGERS, resolve_logger, shell_info_logger
from lrdw.utils.tools import ConfigError

_ENV_PREFIX: Final[str] = "LRDW_"


# Custom Variables
PROG_NAME: Final[str] = "lrdw"
VERSION: Final[str] = "0.1.0"
CSV_SCHEMA: Final[str] = "lrdw-csv/1"


class ErrorCode(enum.Enum):
    CONFIG_ERROR_CODE: Final[int] = 2
    NUMERIC_ERROR_CODE: Final[int] = 3
    INIT_ERROR_CODE: Final[int] = 5
    PREP_ERROR_CODE: Final[int] = 7
    POST_ERROR_CODE: Final[int] = 11
    RUNNER_ERROR_CODE: Final[int] = 13


class ExperimentName(str, enum.Enum):
    TABLE1 = "table1"
    TABLE2 = "table2"
    TABLE3 = "table3"
    ESD_RATIO = "esd-ratio"
    PSEUDO_SPIKES = "pseudo-spikes"
    CALIBRATE = "calibrate"
    PCA_DEMO = "pca-demo"


SHELL_PARSER_GROUP_NAME: Final[str] = "EXPERIMENT"


class ControllerOptionNames:
    LOGGER: Final[str] = "logger"
    STDOUT: Final[str] = "stdout"
    ANNOUNCER: Final[str] = "announcer"


class _VarGetter:
    M: int | None
    N: int | None
    A: float | None
    REPS: int | None
    SEED: int
    SPIKES: List[float] | None
    SIGMA2: float | None
    NORMALIZE: str | None
    NOISE: str | None
    OUT: str | None
    THREADS: int | str
    GAMMAS: List[float] | None
    CALIBRATE_REPS: int | None
    K_MAX: int
    BINS: int
    A_GRID: List[float] | None
    M_GRID: List[int] | None
    N_GRID: List[int] | None
    LOGGER: Logger
    """
    This is a proxy of getting Vars from Var Settings
    """

    __slots__ = ["_storage"]

    def __init__(self, storage: VarClass) -> None:
        """
        :param storage: the Var Settings to be proxied
        """
        self._storage = storage

    def __getattr__(self, var_name):
        if var_name not in self._storage.vars:
            raise AttributeError(
                f"'{self._storage.__class__.__name__}' object has no attribute '{var_name}'"
            )
        return self._storage[var_name]


def _split_list(string: str) -> List[Any]:
    """
    Parses "[1, 2, 3]" (json) or "1,2,3"
    """
    try:
        res = json.loads(string)
        if not isinstance(res, list):
            raise TypeError
        return res
    except (TypeError, json.JSONDecodeError):
        return [item for item in string.replace(" ", "").split(",") if item]


def parse_float_list(string: str) -> List[float]:
    return [float(x) for x in _split_list(string)]


def parse_int_list(string: str) -> List[int]:
    return [int(x) for x in _split_list(string)]


def parse_threads(string: str) -> int | str:
    """
    "auto" or a positive worker count
    """
    if string.strip().lower() == "auto":
        return "auto"
    count = int(string)
    if count < 1:
        raise ValueError(f"thread count must be positive, got {count}")
    return count


def _optional(parser: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(string: str) -> Any:
        return None if string.strip().lower() == "none" else parser(string)

    return parse


class DefaultVars(VarFieldNames, VarClass):
    __slots__ = ["_vars", "v"]

    M = "M"
    N = "N"
    A = "A"
    REPS = "REPS"
    SEED = "SEED"
    SPIKES = "SPIKES"
    SIGMA2 = "SIGMA2"
    NORMALIZE = "NORMALIZE"
    NOISE = "NOISE"
    OUT = "OUT"
    THREADS = "THREADS"
    GAMMAS = "GAMMAS"
    CALIBRATE_REPS = "CALIBRATE_REPS"
    K_MAX = "K_MAX"
    BINS = "BINS"
    A_GRID = "A_GRID"
    M_GRID = "M_GRID"
    N_GRID = "N_GRID"
    LOGGER = "LOGGER"

    _default_vars: ClassVar[VarDict] = {
        M: None,
        N: None,
        A: None,
        REPS: None,
        SEED: 0,
        SPIKES: None,
        SIGMA2: None,
        NORMALIZE: None,
        NOISE: None,
        OUT: None,
        #
        THREADS: 1,
        GAMMAS: None,
        CALIBRATE_REPS: None,
        K_MAX: 50,
        BINS: 50,
        A_GRID: None,
        M_GRID: None,
        N_GRID: None,
        LOGGER: shell_info_logger,
    }

    # how a string from the shell environment becomes a value
    _env_parsers: ClassVar[Dict[str, Callable[[str], Any]]] = {
        M: _optional(int),
        N: _optional(int),
        A: _optional(float),
        REPS: _optional(int),
        SEED: int,
        SPIKES: _optional(parse_float_list),
        SIGMA2: _optional(float),
        NORMALIZE: _optional(str),
        NOISE: _optional(str),
        OUT: _optional(str),
        THREADS: parse_threads,
        GAMMAS: _optional(parse_float_list),
        CALIBRATE_REPS: _optional(int),
        K_MAX: int,
        BINS: int,
        A_GRID: _optional(parse_float_list),
        M_GRID: _optional(parse_int_list),
        N_GRID: _optional(parse_int_list),
        LOGGER: resolve_logger,
    }

    # unset flags stay out of the namespace so they never mask the environment
    general_shell_var = {
        M: (
            ("-M", "--m"),
            {
                "default": argparse.SUPPRESS,
                "type": int,
                "help": "samples per variate (rows of X)",
            },
        ),
        N: (
            ("-N", "--n"),
            {
                "default": argparse.SUPPRESS,
                "type": int,
                "help": "number of variates (columns of X)",
            },
        ),
        A: (
            ("-a", "--a"),
            {
                "default": argparse.SUPPRESS,
                "type": float,
                "help": "long range dependence exponent in (0, 1)",
            },
        ),
        REPS: (
            ("-r", "--reps"),
            {
                "default": argparse.SUPPRESS,
                "type": int,
                "help": "Monte-Carlo replicates",
            },
        ),
        SEED: (
            ("-s", "--seed"),
            {
                "default": argparse.SUPPRESS,
                "type": int,
                "help": f"base seed (default {_default_vars[SEED]})",
            },
        ),
        SPIKES: (
            ("--spikes",),
            {
                "default": argparse.SUPPRESS,
                "type": parse_float_list,
                "metavar": "A1,A2,...",
                "help": "spike strengths of the column covariance",
            },
        ),
        SIGMA2: (
            ("--sigma2",),
            {
                "default": argparse.SUPPRESS,
                "type": float,
                "help": "noise level of the column covariance",
            },
        ),
        NORMALIZE: (
            ("--normalize",),
            {
                "default": argparse.SUPPRESS,
                "choices": [mode.value for mode in Normalization],
                "help": "column covariance normalization",
            },
        ),
        NOISE: (
            ("--noise",),
            {
                "default": argparse.SUPPRESS,
                "choices": [kind.value for kind in NoiseKind],
                "help": "law of the noise entries",
            },
        ),
        OUT: (
            ("-o", "--out"),
            {
                "default": argparse.SUPPRESS,
                "type": str,
                "help": "primary CSV path, '-' or omitted for stdout",
            },
        ),
        THREADS: (
            ("-j", "--threads"),
            {
                "default": argparse.SUPPRESS,
                "type": parse_threads,
                "help": "worker count or 'auto'",
            },
        ),
        GAMMAS: (
            ("--gammas",),
            {
                "default": argparse.SUPPRESS,
                "type": parse_float_list,
                "metavar": "G1,G2,G3",
                "help": "detection thresholds; skips calibration",
            },
        ),
        CALIBRATE_REPS: (
            ("--calibrate-reps",),
            {
                "default": argparse.SUPPRESS,
                "type": int,
                "help": "replicates of the threshold calibration",
            },
        ),
        K_MAX: (
            ("--k-max",),
            {
                "default": argparse.SUPPRESS,
                "type": int,
                "help": f"largest spike count tested (default {_default_vars[K_MAX]})",
            },
        ),
        BINS: (
            ("--bins",),
            {
                "default": argparse.SUPPRESS,
                "type": int,
                "help": f"histogram bins (default {_default_vars[BINS]})",
            },
        ),
        A_GRID: (
            ("--a-grid",),
            {
                "default": argparse.SUPPRESS,
                "type": parse_float_list,
                "metavar": "A,...",
            },
        ),
        M_GRID: (
            ("--m-grid",),
            {
                "default": argparse.SUPPRESS,
                "type": parse_int_list,
                "metavar": "M,...",
            },
        ),
        N_GRID: (
            ("--n-grid",),
            {
                "default": argparse.SUPPRESS,
                "type": parse_int_list,
                "metavar": "N,...",
            },
        ),
        LOGGER: (
            ("-l", "--logger"),
            {
                "default": argparse.SUPPRESS,
                "choices": [*AVAILABLE_LOGGERS.values()],
                "type": AVAILABLE_LOGGERS.get,
                "metavar": f"{{{', '.join(AVAILABLE_LOGGERS.keys())}}}",
            },
        ),
    }

    def __init__(self, **kwargs):
        self._vars: VarDict = cast(VarDict, {**self._default_vars})
        self.read_from_env(all_args=True)
        # explicit values win over the environment
        self._vars.update(kwargs)

        # the proxy object to enable "settings.v.LOGGER"
        self.v: _VarGetter = _VarGetter(self)

    def __getitem__(self, item: str):
        return self._vars[item]  # type: ignore

    @classmethod
    def make_shell_env_name(cls, name: str) -> str:
        """
        Makes shell variable name with variable name by adding prefix _ENV_PREFIX
        :param name: the variable name
        :return: prefixed shell variable name
        """
        return f"{_ENV_PREFIX}{name}"

    def read_from_env(self, *args, all_args: bool = False) -> None:
        """
        Reads the shell environment variables and updates the internal variables.

        :param args: The names of the variables to read.
        :param all_args: If True, all known variables are read. This will override the args parameter.
        :return: None
        :raise ConfigError: if an environment value cannot be parsed
        """
        if all_args:
            args = self._env_parsers.keys()

        for env_name in args:
            from_env = _getenv(self.make_shell_env_name(env_name), None)
            if from_env is None:
                continue
            try:
                self._vars[env_name] = self._env_parsers[env_name](from_env)  # type: ignore
            except (TypeError, ValueError) as e:
                raise ConfigError(
                    f"cannot parse {from_env!r}: {e}",
                    field=self.make_shell_env_name(env_name),
                ) from e

    @classmethod
    def get_var_arg_name(cls, var_field: str) -> str:
        """
        Gets the argument name for a variable. (e.g. -j for THREADS)
        :param var_field: the variable field name
        :return: the argument name
        """
        if var_field not in cls.general_shell_var:
            raise ValueError(f"unknown arg name {var_field}")
        return cls.general_shell_var[var_field][0][0]

    @classmethod
    def __class_getitem__(cls, item):
        """
        Gets the default value of a variable name.
        :param item: the variable name (e.g. cls.THREADS)
        :return: the default value for that variable
        """
        return cls._default_vars[item]  # type: ignore

    @property
    def vars(self) -> VarDict:
        """
        Get the variable storage dictionary
        :return:
        """
        return self._vars
