from __future__ import annotations

__all__ = [
    "Sections",
    "row_covariance",
    "histogram_frame",
    "summary_frame",
    "resolve_gammas",
]

from logging import Logger
from typing import Any, Dict, Mapping, Tuple, TypeAlias

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike

from ..covariance.spectral import (
    HermitianMatrix,
    SpectralModel,
    ToeplitzHerm,
    build_toeplitz,
    matrix_sqrt,
)
from ..covariance.whiten import Gammas, calibrate_gammas
from ..utils.logger import void_logger
from .config import ExperimentConfig

# section name -> table; the first section is the primary one
Sections: TypeAlias = Dict[str, pd.DataFrame]

_HISTOGRAM_COLUMNS = ("bin_left", "bin_right", "count")


def row_covariance(a: float, M: int) -> Tuple[ToeplitzHerm, HermitianMatrix]:
    """
    R_M of the time-domain model r_k = (1 + k)^(a - 1) and its square root
    """
    R = build_toeplitz(SpectralModel.time_domain(a), M)
    return R, matrix_sqrt(R.to_hermitian())


def histogram_frame(values: ArrayLike, bins: int, **labels: Any) -> pd.DataFrame:
    """
    (bin_left, bin_right, count) rows, prefixed by constant label columns
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        return pd.DataFrame(columns=[*labels, *_HISTOGRAM_COLUMNS])

    counts, edges = np.histogram(values, bins=bins)
    frame = pd.DataFrame(
        {"bin_left": edges[:-1], "bin_right": edges[1:], "count": counts}
    )
    for position, (name, value) in enumerate(labels.items()):
        frame.insert(position, name, value)
    return frame


def summary_frame(metrics: Mapping[str, Any]) -> pd.DataFrame:
    return pd.DataFrame({"metric": list(metrics), "value": list(metrics.values())})


def resolve_gammas(
    config: ExperimentConfig, logger: Logger = void_logger
) -> Tuple[Gammas, int | None]:
    """
    The detection thresholds of a run: the given ones, or a fresh calibration
    at the run's own (M, N).

    :return: thresholds and the calibration replicate count (None when given)
    """
    if config.gammas is not None:
        logger.info(f"using given thresholds {tuple(config.gammas)}")
        return config.gammas, None

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
    return gammas, reps
