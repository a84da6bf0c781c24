from __future__ import annotations

__all__ = ["run_calibrate"]

from logging import Logger

import pandas as pd

from ..covariance.whiten import calibrate_gammas
from ..utils.logger import void_logger
from .common import Sections
from .config import ExperimentConfig


def run_calibrate(config: ExperimentConfig, logger: Logger = void_logger) -> Sections:
    reps = config.calibrate_reps or config.reps
    gammas = calibrate_gammas(
        config.M,
        config.N,
        reps,
        config.seed,
        a=config.a,
        noise=config.noise,
        threads=config.threads,
        logger=logger,
    )
    table = pd.DataFrame(
        {
            "i": [1, 2, 3],
            "gamma": list(gammas),
            "M": config.M,
            "N": config.N,
            "reps": reps,
        }
    )
    return {"gammas": table}
