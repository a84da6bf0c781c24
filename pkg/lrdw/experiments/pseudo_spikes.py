from __future__ import annotations

__all__ = ["run_pseudo_spikes", "EDGE_MARGIN"]

from logging import Logger
from typing import Final, List, Tuple

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from ..covariance.estimators import ToeplitzEstimate, sample_cov, toeplitzify
from ..covariance.harness import run_replicates
from ..covariance.spectral import matrix_inv, matrix_inv_sqrt
from ..covariance.synth import (
    ColumnCovariance,
    DataMatrix,
    NoiseSpec,
    assemble_X,
    sample_noise,
)
from ..covariance.whiten import WhitenedCov, WhitenKind, dual_cov, mp_edges, whitened_cov
from ..utils.logger import void_logger
from .common import Sections, histogram_frame, row_covariance
from .config import ExperimentConfig

# an eigenvalue this far beyond the bulk edge counts as a pseudo-spike
EDGE_MARGIN: Final[float] = 0.1


def _whiten(X: DataMatrix, estimate: ToeplitzEstimate, biased: bool) -> WhitenedCov:
    """
    The M x M dual when N > M, S_w otherwise
    """
    kind = WhitenKind.BIASED if biased else WhitenKind.UNBIASED
    M, N = X.entries.shape
    if N > M:
        return dual_cov(X, matrix_inv_sqrt(estimate.to_hermitian()), kind=kind)
    return whitened_cov(X, matrix_inv(estimate.to_hermitian()), kind)


def run_pseudo_spikes(
    config: ExperimentConfig, logger: Logger = void_logger
) -> Sections:
    """
    Spectra of the biased and unbiased whitened covariances for white columns
    over a grid of N; the biased one grows eigenvalues beyond the
    Marcenko-Pastur edge when N / M is large.
    """
    M = config.M
    _, Rsqrt = row_covariance(config.a, M)
    noise = NoiseSpec(config.noise, config.seed)

    rows: List[dict] = []
    histograms: List[pd.DataFrame] = []
    for cell, N in enumerate(config.n_grid):
        logger.info(f"pseudo-spikes: M={M}, N={N}, a={config.a}")
        C = ColumnCovariance.identity(N)

        def _replicate(r: int) -> List[Tuple[float, NDArray]]:
            X = assemble_X(Rsqrt, sample_noise(noise, M, N, r, cell), C)
            S = sample_cov(X)
            covs = [
                _whiten(X, toeplitzify(S, biased=biased), biased)
                for biased in (True, False)
            ]
            return [(cov.c, cov.eigenvalues()) for cov in covs]

        results = run_replicates(_replicate, config.reps, config.threads, logger)
        for position, name in enumerate(("biased", "unbiased")):
            c = results[0][position][0]
            lower, upper = mp_edges(c)
            spectra: List[NDArray] = [res[position][1] for res in results]
            pooled = np.concatenate(spectra)
            lambda_max = float(np.mean([s[0] for s in spectra]))
            rows.append(
                {
                    "N": N,
                    "estimator": name,
                    "dual": N > M,
                    "c": c,
                    "lambda_minus": lower,
                    "lambda_plus": upper,
                    "lambda_max": lambda_max,
                    "ratio_to_edge": lambda_max / upper,
                    "beyond_edge": int(np.sum(pooled > upper + EDGE_MARGIN)),
                }
            )
            histograms.append(histogram_frame(pooled, config.bins, N=N, estimator=name))

    return {
        "histogram": pd.concat(histograms, ignore_index=True),
        "summary": pd.DataFrame(rows),
    }
