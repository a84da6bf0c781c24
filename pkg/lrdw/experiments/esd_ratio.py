from __future__ import annotations

__all__ = ["run_esd_ratio", "CONCENTRATION_BAND"]

from logging import Logger
from typing import Dict, Final, Tuple

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from ..covariance.diagnostics import ratio_esd
from ..covariance.estimators import sample_cov, toeplitzify
from ..covariance.harness import run_replicates
from ..covariance.synth import ColumnCovariance, NoiseSpec, draw_data_matrix
from ..utils.logger import void_logger
from .common import Sections, histogram_frame, row_covariance
from .config import ExperimentConfig

CONCENTRATION_BAND: Final[Tuple[float, float]] = (0.9, 1.1)
_ESTIMATORS: Final = ("biased", "unbiased")


def run_esd_ratio(config: ExperimentConfig, logger: Logger = void_logger) -> Sections:
    """
    Spectra of (Rhat^b)^{-1} R and Rhat^{-1} R for white columns, pooled over
    replicates.
    """
    M, N = config.M, config.N
    logger.info(f"esd-ratio: M={M}, N={N}, a={config.a}, {config.reps} replicate(s)")

    R, Rsqrt = row_covariance(config.a, M)
    R_h = R.to_hermitian()
    C = ColumnCovariance.identity(N)
    noise = NoiseSpec(config.noise, config.seed)

    def _replicate(r: int) -> Dict[str, NDArray]:
        _, X = draw_data_matrix(Rsqrt, noise, C, r)
        S = sample_cov(X)
        # eigenvalues of Rhat^{-1} R: the generalized problem with Rhat as the metric
        return {
            name: ratio_esd(R_h, toeplitzify(S, biased=name == "biased"))
            for name in _ESTIMATORS
        }

    results = run_replicates(_replicate, config.reps, config.threads, logger)

    lo, hi = CONCENTRATION_BAND
    histograms, summaries, eigenvalues = [], [], []
    for name in _ESTIMATORS:
        pooled = np.concatenate([res[name] for res in results])
        histograms.append(histogram_frame(pooled, config.bins, estimator=name))
        summaries.append(
            {
                "estimator": name,
                "count": pooled.size,
                "min": pooled.min(),
                "max": pooled.max(),
                "fraction_in_band": np.mean((pooled >= lo) & (pooled <= hi)),
                "band_low": lo,
                "band_high": hi,
            }
        )
        for r, res in enumerate(results):
            eigenvalues.append(
                pd.DataFrame(
                    {
                        "estimator": name,
                        "replicate": r,
                        "index": np.arange(1, M + 1),
                        "eigenvalue": res[name],
                    }
                )
            )

    return {
        "histogram": pd.concat(histograms, ignore_index=True),
        "summary": pd.DataFrame(summaries),
        "eigenvalues": pd.concat(eigenvalues, ignore_index=True),
    }
