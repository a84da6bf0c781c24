from __future__ import annotations

__all__ = ["run_table1"]

import math
from logging import Logger
from typing import Final, Tuple

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from ..covariance.harness import run_replicates
from ..covariance.synth import ColumnCovariance, NoiseSpec, draw_data_matrix, xi
from ..covariance.whiten import ideal_cov, mp_edges, spike_limit, whiten_data
from ..utils.logger import void_logger
from .common import Sections, row_covariance, summary_frame
from .config import ExperimentConfig

TOP_EIGENVALUES: Final[int] = 8


def _sd(samples: NDArray, axis: int = 0) -> NDArray:
    if samples.shape[axis] < 2:
        return np.zeros(np.delete(samples.shape, axis))
    return samples.std(axis=axis, ddof=1)


def run_table1(config: ExperimentConfig, logger: Logger = void_logger) -> Sections:
    """
    Mean and SD of the largest eigenvalues of S_w and of the ideally whitened
    S_Rid, both computed from the same noise in every replicate.
    """
    M, N = config.M, config.N
    logger.info(f"table1: M={M}, N={N}, a={config.a}, {config.reps} replicates")

    _, Rsqrt = row_covariance(config.a, M)
    C = ColumnCovariance(
        alphas=config.spikes or (),
        sigma2=config.sigma2,
        normalize=config.normalize,
        N=N,
    )
    noise = NoiseSpec(config.noise, config.seed)
    k = min(TOP_EIGENVALUES, N)

    def _replicate(r: int) -> Tuple[NDArray, NDArray]:
        Z, X = draw_data_matrix(Rsqrt, noise, C, r)
        Sw, _ = whiten_data(X)
        return Sw.top_eigenvalues(k), ideal_cov(Z, C).top_eigenvalues(k)

    results = run_replicates(_replicate, config.reps, config.threads, logger)
    whitened = np.vstack([w for w, _ in results])
    ideal = np.vstack([i for _, i in results])

    c = N / M
    sigma2 = C.effective_sigma2
    alphas = [*C.alphas, *([1.0] * (k - C.p))][:k]
    edge = sigma2 * mp_edges(c)[1]
    limits = [
        spike_limit(alpha, c, sigma2) if alpha > 1 + math.sqrt(c) else edge
        for alpha in alphas
    ]

    table = pd.DataFrame(
        {
            "i": np.arange(1, k + 1),
            "mean_Sw": whitened.mean(axis=0),
            "sd_Sw": _sd(whitened),
            "mean_SRid": ideal.mean(axis=0),
            "sd_SRid": _sd(ideal),
            "alpha_i": alphas,
            "limit_i": limits,
        }
    )
    summary = summary_frame(
        {"c": c, "sigma2": sigma2, "xi": xi(C), "reps": config.reps}
    )
    return {"eigenvalues": table, "summary": summary}
