from __future__ import annotations

__all__ = [
    "ExperimentConfig",
    "Sections",
    "RUNNERS",
    "run_experiment",
    "run_table1",
    "run_table2",
    "run_table3",
    "run_esd_ratio",
    "run_pseudo_spikes",
    "run_calibrate",
    "run_pca_demo",
]

from logging import Logger
from types import MappingProxyType
from typing import Callable, Final, Mapping

from ..settings import ExperimentName
from ..utils.logger import void_logger
from .calibrate import run_calibrate
from .common import Sections
from .config import ExperimentConfig
from .esd_ratio import run_esd_ratio
from .pca_demo import run_pca_demo
from .pseudo_spikes import run_pseudo_spikes
from .table1 import run_table1
from .table2 import run_table2
from .table3 import run_table3

RUNNERS: Final[
    Mapping[ExperimentName, Callable[[ExperimentConfig, Logger], Sections]]
] = MappingProxyType(
    {
        ExperimentName.TABLE1: run_table1,
        ExperimentName.TABLE2: run_table2,
        ExperimentName.TABLE3: run_table3,
        ExperimentName.ESD_RATIO: run_esd_ratio,
        ExperimentName.PSEUDO_SPIKES: run_pseudo_spikes,
        ExperimentName.CALIBRATE: run_calibrate,
        ExperimentName.PCA_DEMO: run_pca_demo,
    }
)


def run_experiment(config: ExperimentConfig, logger: Logger = void_logger) -> Sections:
    return RUNNERS[config.experiment](config, logger)
