from __future__ import annotations

import argparse
import sys
from typing import Any, Dict, Mapping, Sequence, Type

from ..settings import (
    PROG_NAME,
    SHELL_PARSER_GROUP_NAME,
    VERSION,
    DefaultVars,
    ErrorCode,
    ExperimentName,
)
from .controller import ControllerResultAnnouncer, ExperimentController
from .tools import ConfigError

__all__ = ["arg_parser", "main"]

_DESCRIPTIONS: Mapping[ExperimentName, str] = {
    ExperimentName.TABLE1: "top eigenvalues of the whitened covariance against their limits",
    ExperimentName.TABLE2: "spike count detection and spike strength estimation",
    ExperimentName.TABLE3: "spectral norm error of the Toeplitz estimators over (a, M)",
    ExperimentName.ESD_RATIO: "spectrum of the estimated against the true covariance",
    ExperimentName.PSEUDO_SPIKES: "eigenvalues escaping the bulk of the biased whitening",
    ExperimentName.CALIBRATE: "eigenvalue ratio thresholds of the spike detector",
    ExperimentName.PCA_DEMO: "principal components through the estimated whitening",
}


class _ConfigArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(
            ErrorCode.CONFIG_ERROR_CODE.value, f"{self.prog}: error: {message}\n"
        )


def arg_parser(
    settings_cls: Type[DefaultVars] = DefaultVars, args: Sequence[str] = None
) -> Dict[str, Any]:
    # options for all, accepted after the experiment name
    options_parser = argparse.ArgumentParser(add_help=False)
    for name, (arg, kwargs) in settings_cls.general_shell_var.items():
        options_parser.add_argument(*arg, **kwargs, dest=name)

    parser = _ConfigArgumentParser(
        prog=PROG_NAME,
        description="Long range dependent Toeplitz covariance estimation and whitening",
    )
    parser.add_argument(
        "-V", "--version", action="version", version=f"%(prog)s {VERSION}"
    )

    experiment_group = parser.add_subparsers(
        required=True, dest=SHELL_PARSER_GROUP_NAME, parser_class=_ConfigArgumentParser
    )
    for experiment in ExperimentName:
        experiment_group.add_parser(
            experiment.value,
            parents=[options_parser],
            help=_DESCRIPTIONS[experiment],
        )

    return vars(parser.parse_args(args))


def main(
    setting_cls: Type[DefaultVars] = DefaultVars, args: Sequence[str] = None
) -> None:
    args = arg_parser(setting_cls, args)
    experiment = args.pop(SHELL_PARSER_GROUP_NAME)

    try:
        settings = setting_cls(**args)  # make new settings based on input
    except ConfigError as e:
        ControllerResultAnnouncer().show_error(e, error_code=ErrorCode.CONFIG_ERROR_CODE)

    logger = settings.v.LOGGER
    logger.debug(f"running {experiment} with {args}")

    ctrl = ExperimentController(experiment, default_settings=settings).init()
    ctrl.main(formats=True, announces=True)
    logger.debug("experiment finished and its tables are written")
