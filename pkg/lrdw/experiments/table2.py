from __future__ import annotations

__all__ = ["run_table2", "draw_spikes", "SPIKE_COUNT_MEAN", "SPIKE_RANGE"]

from dataclasses import dataclass
from logging import Logger
from typing import Final, Tuple

import numpy as np
import pandas as pd

from ..covariance.errors import NoDetection
from ..covariance.harness import run_replicates
from ..covariance.synth import (
    ColumnCovariance,
    NoiseSpec,
    Stream,
    draw_data_matrix,
    replicate_rng,
)
from ..covariance.whiten import SpikeReport, report_spikes, whiten_data
from ..utils.logger import void_logger
from .common import Sections, histogram_frame, resolve_gammas, row_covariance, summary_frame
from .config import ExperimentConfig

SPIKE_COUNT_MEAN: Final[float] = 4.0
SPIKE_RANGE: Final[Tuple[float, float]] = (3.0, 10.0)


def draw_spikes(seed: int, replicate: int) -> Tuple[float, ...]:
    """
    p ~ Poisson(4) spikes placed uniformly on [3, 10], each from its own sub-stream
    """
    p = int(replicate_rng(seed, replicate, Stream.SPIKE_COUNT).poisson(SPIKE_COUNT_MEAN))
    alphas = replicate_rng(seed, replicate, Stream.SPIKE_POSITION).uniform(
        *SPIKE_RANGE, size=p
    )
    return tuple(sorted(alphas.tolist(), reverse=True))


@dataclass(frozen=True)
class _Outcome:
    alphas: Tuple[float, ...]
    report: SpikeReport | None

    @property
    def p(self) -> int:
        return len(self.alphas)

    @property
    def p_hat(self) -> int | None:
        return None if self.report is None else self.report.p_hat


def run_table2(config: ExperimentConfig, logger: Logger = void_logger) -> Sections:
    """
    Accuracy of the spike count p-hat and of the spike strengths alpha-hat over
    random spiked models. A fixed spike list in the configuration replaces the
    random draw.
    """
    M, N = config.M, config.N
    gammas, calibrated = resolve_gammas(config, logger)
    logger.info(f"table2: M={M}, N={N}, a={config.a}, thresholds {tuple(gammas)}")

    _, Rsqrt = row_covariance(config.a, M)
    noise = NoiseSpec(config.noise, config.seed)

    def _replicate(r: int) -> _Outcome:
        alphas = (
            tuple(sorted(config.spikes, reverse=True))
            if config.spikes is not None
            else draw_spikes(config.seed, r)
        )
        C = ColumnCovariance(alphas=alphas, sigma2=config.sigma2, N=N)
        _, X = draw_data_matrix(Rsqrt, noise, C, r)
        Sw, _ = whiten_data(X)
        try:
            report = report_spikes(Sw.eigenvalues(), gammas, Sw.c, config.k_max)
        except NoDetection:
            logger.debug(f"replicate {r}: no detection")
            report = None
        return _Outcome(alphas, report)

    outcomes = run_replicates(_replicate, config.reps, config.threads, logger)

    replicates = pd.DataFrame(
        {
            "replicate": np.arange(config.reps),
            "p_true": [o.p for o in outcomes],
            "p_hat": pd.array([o.p_hat for o in outcomes], dtype="Int64"),
            "sigma_hat": [np.nan if o.report is None else o.report.sigma_hat for o in outcomes],
        }
    )

    spikes = pd.DataFrame(
        [
            {
                "replicate": r,
                "i": i + 1,
                "alpha": alpha,
                "alpha_hat": alpha_hat,
                "re": alpha_hat / alpha - 1.0,
                "clamped": clamped,
            }
            for r, o in enumerate(outcomes)
            if o.p_hat == o.p != 0
            for i, (alpha, alpha_hat, clamped) in enumerate(
                zip(o.alphas, o.report.alpha_hats, o.report.clamped)
            )
        ],
        columns=["replicate", "i", "alpha", "alpha_hat", "re", "clamped"],
    )

    reps = config.reps
    p_true = np.array([o.p for o in outcomes])
    detected = np.array([o.p_hat is not None for o in outcomes])
    p_hat = np.array([-1 if o.p_hat is None else o.p_hat for o in outcomes])
    equal, above, below = (
        detected & (p_hat == p_true),
        detected & (p_hat > p_true),
        detected & (p_hat < p_true),
    )
    re = spikes["re"].to_numpy(dtype=np.float64)

    summary = summary_frame(
        {
            "replicates": reps,
            "p_hat_eq_p": equal.sum() / reps,
            "p_hat_eq_p_nonzero": (equal & (p_true != 0)).sum() / reps,
            "p_hat_eq_p_zero": (equal & (p_true == 0)).sum() / reps,
            "p_hat_gt_p": above.sum() / reps,
            "p_hat_gt_p_nonzero": (above & (p_true != 0)).sum() / reps,
            "p_hat_gt_p_zero": (above & (p_true == 0)).sum() / reps,
            "p_hat_lt_p": below.sum() / reps,
            "no_detection": (~detected).sum() / reps,
            "re_count": re.size,
            "re_mean": re.mean() if re.size else np.nan,
            "re_sd": re.std(ddof=1) if re.size > 1 else np.nan,
            "re_abs_mean": np.abs(re).mean() if re.size else np.nan,
            "clamped": int(spikes["clamped"].sum()),
            "gamma1": gammas.g1,
            "gamma2": gammas.g2,
            "gamma3": gammas.g3,
            "calibrate_reps": np.nan if calibrated is None else calibrated,
        }
    )
    return {
        "replicates": replicates,
        "spikes": spikes,
        "re-histogram": histogram_frame(re, config.bins),
        "summary": summary,
    }
