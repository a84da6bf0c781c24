from __future__ import annotations

__all__ = ["run_table3"]

from logging import Logger

import numpy as np
import pandas as pd

from ..covariance.diagnostics import norm_deviation
from ..covariance.estimators import sample_cov, toeplitzify
from ..covariance.harness import run_replicates
from ..covariance.synth import ColumnCovariance, NoiseSpec, assemble_X, sample_noise
from ..utils.logger import void_logger
from .common import Sections, row_covariance
from .config import ExperimentConfig


def run_table3(config: ExperimentConfig, logger: Logger = void_logger) -> Sections:
    """
    Medians (and quartiles) of || Rhat_M - R_M || over an a x M grid, with
    white columns and N = 2M. Every cell draws from its own noise sub-stream.
    """
    noise = NoiseSpec(config.noise, config.seed)
    rows = []
    for cell, (a, M) in enumerate(
        (a, M) for a in config.a_grid for M in config.m_grid
    ):
        N = 2 * M
        logger.info(f"table3: cell a={a}, M={M}, N={N}")
        R, Rsqrt = row_covariance(a, M)
        R_h = R.to_hermitian()
        C = ColumnCovariance.identity(N)

        def _replicate(r: int) -> float:
            X = assemble_X(Rsqrt, sample_noise(noise, M, N, r, cell), C)
            estimate = toeplitzify(sample_cov(X), biased=False)
            return norm_deviation(estimate, R_h, 1.0)

        deviations = np.asarray(
            run_replicates(_replicate, config.reps, config.threads, logger)
        )
        q25, median, q75 = np.quantile(deviations, [0.25, 0.5, 0.75])
        logger.debug(f"table3: a={a}, M={M} median {median}")
        rows.append(
            {
                "a": a,
                "M": M,
                "N": N,
                "reps": config.reps,
                "median": median,
                "q25": q25,
                "q75": q75,
            }
        )

    table = pd.DataFrame(rows)
    grid = table.pivot(index="a", columns="M", values="median")
    grid = grid.loc[list(config.a_grid), list(config.m_grid)]
    grid.columns = [f"M={m}" for m in grid.columns]
    return {"norms": table, "median-grid": grid.reset_index()}
