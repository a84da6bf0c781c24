from __future__ import annotations

__all__ = ["run_pca_demo", "mixing_matrix", "MIXING_VARIANCES"]

import math
from logging import Logger
from typing import Final, Sequence

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from ..covariance.spectral import matrix_inv, matrix_inv_sqrt
from ..covariance.synth import Stream, assemble_from_signal, replicate_rng, signal_plus_noise
from ..covariance.whiten import (
    PUBLISHED_GAMMAS,
    WhitenKind,
    eigvec_alignment,
    fix_phase,
    pca_compress,
    report_spikes,
    whiten_data,
    whitened_cov,
)
from ..utils.logger import void_logger
from .common import Sections, resolve_gammas, row_covariance, summary_frame
from .config import ExperimentConfig

MIXING_VARIANCES: Final = (0.1, 0.2, 0.3)


def mixing_matrix(
    N: int, seed: int, variances: Sequence[float] = MIXING_VARIANCES
) -> NDArray[np.float64]:
    """
    N x p matrix whose k-th column is drawn from N(0, variances[k] I)
    """
    rng = replicate_rng(seed, 0, Stream.MIXING)
    scales = np.sqrt(np.asarray(variances, dtype=np.float64))
    return rng.standard_normal((N, len(scales))) * scales[None, :]


def run_pca_demo(config: ExperimentConfig, logger: Logger = void_logger) -> Sections:
    """
    PCA of a long memory signal-plus-noise matrix: principal component series
    from the estimated whitening against those from the true R.
    Without given or calibrated thresholds the published ones are used; an
    empty spike list switches the signal off.
    """
    M, N = config.M, config.N
    if config.gammas is None and config.calibrate_reps is None:
        gammas = PUBLISHED_GAMMAS
    else:
        gammas, _ = resolve_gammas(config, logger)

    if config.spikes is not None and len(config.spikes) == 0:
        A = np.zeros((N, 0))
    else:
        A = mixing_matrix(N, config.seed)
    singular = np.linalg.svd(A, compute_uv=False) if A.size else np.zeros(0)
    logger.info(f"pca-demo: M={M}, N={N}, singular values of A {singular.round(2)}")

    R, Rsqrt = row_covariance(config.a, M)
    R_h = R.to_hermitian()
    Y, _ = signal_plus_noise(A, math.sqrt(config.sigma2), M, config.seed)
    X = assemble_from_signal(Rsqrt, Y)

    Sw, estimate = whiten_data(X)
    S_rid = whitened_cov(X, matrix_inv(R_h), WhitenKind.IDEAL)
    report = report_spikes(Sw.eigenvalues(), gammas, Sw.c, config.k_max)
    p_hat = report.p_hat
    logger.info(f"pca-demo: detected {p_hat} component(s)")

    _, V_rid = S_rid.top_eigenpairs(p_hat)
    V_rid = fix_phase(V_rid)
    X_w, _ = pca_compress(
        X, Sw, p_hat, matrix_inv_sqrt(estimate.to_hermitian()), reference=V_rid
    )
    X_rid, _ = pca_compress(X, S_rid, p_hat, matrix_inv_sqrt(R_h))

    _, V_w = Sw.top_eigenpairs(p_hat)
    difference = np.abs(X_w - X_rid)
    series = pd.concat(
        [
            pd.DataFrame(
                {
                    "pc": k + 1,
                    "t": np.arange(M),
                    "xw_real": X_w[k].real,
                    "xrid_real": X_rid[k].real,
                    "diff_modulus": difference[k],
                }
            )
            for k in range(p_hat)
        ],
        ignore_index=True,
    )

    metrics = {
        "p_hat": p_hat,
        "sigma_hat": report.sigma_hat,
        "sup_diff_over_sup_pc": float(difference.max() / np.abs(X_rid).max()),
    }
    for k in range(p_hat):
        metrics[f"alpha_hat_{k + 1}"] = report.alpha_hats[k]
        metrics[f"alignment_{k + 1}"] = eigvec_alignment(V_w[:, k], V_rid[:, k])
    for k, s in enumerate(singular):
        metrics[f"singular_value_{k + 1}"] = float(s)

    return {"series": series, "summary": summary_frame(metrics)}
