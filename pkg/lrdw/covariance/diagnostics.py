from __future__ import annotations

__all__ = [
    "ConsistencyReport",
    "TrQ2Profile",
    "ratio_esd",
    "ratio_deviation",
    "sqrt_ratio_deviation",
    "norm_deviation",
    "spectral_norm_power",
    "esd_distance",
    "consistency_report",
    "tapered_target",
    "build_Q",
    "trQ2_profile",
    "var_upsilon0_oracle",
    "lmax_ratio_biased",
]

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg as sp_linalg
from scipy import stats as sp_stats

from .errors import DimensionMismatch, NotPositiveDefinite
from .spectral import (
    TOL_PD,
    DensityEvaluator,
    HermitianMatrix,
    SpectralModel,
    ToeplitzHerm,
    as_hermitian,
    build_toeplitz,
    esd,
    matrix_inv_sqrt,
    matrix_sqrt,
)
from .trig import fejer_weights


@dataclass(frozen=True, eq=False)
class ConsistencyReport:
    ratio_dev: float
    norm_dev: float
    esd_ratio: NDArray[np.float64]
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))


def _require_pd(R: HermitianMatrix) -> None:
    w = R.eigvalsh()
    if not (w[-1] > 0 and w[0] > TOL_PD * w[-1]):
        raise NotPositiveDefinite("reference matrix is not positive definite", w[0], w[-1])


def _pair(Rhat: Any, R: Any) -> Tuple[HermitianMatrix, HermitianMatrix]:
    Rh, Rm = as_hermitian(Rhat), as_hermitian(R)
    if Rh.M != Rm.M:
        raise DimensionMismatch(f"estimate is {Rh.M}x{Rh.M}, reference is {Rm.M}x{Rm.M}")
    return Rh, Rm


def ratio_esd(Rhat: Any, R: Any) -> NDArray[np.float64]:
    """
    Ascending eigenvalues of R^{-1/2} Rhat R^{-1/2}, solved as the generalized
    problem Rhat v = lambda R v.
    """
    Rh, Rm = _pair(Rhat, R)
    _require_pd(Rm)
    try:
        return sp_linalg.eigh(Rh.entries, Rm.entries, eigvals_only=True)
    except sp_linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"generalized eigensolve failed: {e}") from e


def ratio_deviation(Rhat: Any, R: Any, xi: float) -> float:
    """
    || R^{-1/2} Rhat R^{-1/2} - xi I || in spectral norm
    """
    values = ratio_esd(Rhat, R)
    return float(max(abs(values[-1] - xi), abs(values[0] - xi)))


def sqrt_ratio_deviation(Rhat: Any, R: Any, xi: float) -> float:
    """
    || Rhat^{1/2} R^{-1/2} - sqrt(xi) I ||; the square-root form of ratio consistency
    """
    Rh, Rm = _pair(Rhat, R)
    product = matrix_sqrt(Rh).entries @ matrix_inv_sqrt(Rm).entries
    product -= math.sqrt(xi) * np.eye(Rh.M)
    return float(np.linalg.norm(product, 2))


def norm_deviation(Rhat: Any, R: Any, xi: float) -> float:
    """
    || Rhat - xi R || in spectral norm, from a full symmetric eigensolve
    """
    Rh, Rm = _pair(Rhat, R)
    w = sp_linalg.eigh(Rh.entries - xi * Rm.entries, eigvals_only=True)
    return float(max(abs(w[0]), abs(w[-1])))


def spectral_norm_power(
    A: Any, iters: int = 5000, tol: float = 1e-12, seed: int = 0
) -> float:
    """
    Power-iteration estimate of the spectral norm of a Hermitian matrix.
    Cross-check for norm_deviation.
    """
    entries = as_hermitian(A).entries
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(entries.shape[0])
    v /= np.linalg.norm(v)

    estimate = 0.0
    for _ in range(iters):
        w = entries @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - estimate) <= tol * norm:
            return norm
        estimate = norm
    return estimate


def esd_distance(A: Any, B: Any) -> float:
    """
    Kolmogorov-Smirnov distance between the ESDs of two Hermitian matrices
    """
    return float(sp_stats.ks_2samp(esd(A), esd(B)).statistic)


def consistency_report(Rhat: Any, R: Any, xi: float, **meta) -> ConsistencyReport:
    values = ratio_esd(Rhat, R)
    return ConsistencyReport(
        ratio_dev=float(max(abs(values[-1] - xi), abs(values[0] - xi))),
        norm_dev=norm_deviation(Rhat, R, xi),
        esd_ratio=values,
        meta=meta,
    )


def tapered_target(R: ToeplitzHerm) -> ToeplitzHerm:
    """
    The deterministic biased target ((1 - |i-j|/M) r_{i-j})
    """
    return ToeplitzHerm(fejer_weights(R.M) * R.first_row)


# ===== Q_M(theta) oracles =====


def _lag_matrix(M: int) -> NDArray[np.float64]:
    idx = np.arange(M, dtype=np.float64)
    return idx[:, None] - idx[None, :]


def _b_matrix(M: int) -> NDArray[np.float64]:
    return 1.0 / (M - np.abs(_lag_matrix(M)))


def _modulated_b(M: int, theta: float) -> NDArray:
    """
    D B D^H with D = diag(e^{i k theta})
    """
    lag = _lag_matrix(M)
    if theta == 0.0:
        return _b_matrix(M)
    return _b_matrix(M) * np.exp(1j * theta * lag)


def build_Q(R: ToeplitzHerm, theta: float) -> HermitianMatrix:
    """
    Q_M(theta) = R^{1/2} D B D^H R^{1/2}, B_ij = 1 / (M - |i - j|)
    """
    Rs = matrix_sqrt(R.to_hermitian()).entries
    return HermitianMatrix(Rs @ _modulated_b(R.M, theta) @ Rs, check=False)


@dataclass(frozen=True, eq=False)
class TrQ2Profile:
    thetas: NDArray[np.float64]
    values: NDArray[np.float64]
    skipped: Tuple[float, ...] = ()

    @property
    def max(self) -> float:
        return float(np.max(self.values))


def trQ2_profile(
    R: ToeplitzHerm, f: DensityEvaluator, thetas: ArrayLike
) -> TrQ2Profile:
    """
    tr Q_M(theta)^2 / (f(theta)^2 log^2 M) over a grid of frequencies.
    tr Q^2 is the squared Frobenius norm of the explicitly formed Q.

    :param R: the Toeplitz covariance, M >= 2
    :param f: density evaluator matching R
    :param thetas: frequencies
    :return: the profile; frequencies where f vanishes or is not finite are skipped
    """
    M = R.M
    if M < 2:
        raise ValueError("the tr Q^2 profile needs M >= 2")

    grid = np.atleast_1d(np.asarray(thetas, dtype=np.float64))
    with np.errstate(divide="ignore", invalid="ignore"):
        density = np.asarray(f(grid), dtype=np.float64)

    Rs = matrix_sqrt(R.to_hermitian()).entries
    log2 = math.log(M) ** 2
    kept, values, skipped = [], [], []
    for theta, f_theta in zip(grid, density):
        if not np.isfinite(f_theta) or f_theta <= 0:
            skipped.append(float(theta))
            continue
        Q = Rs @ _modulated_b(M, float(theta)) @ Rs
        values.append(float(np.linalg.norm(Q, "fro") ** 2) / (f_theta**2 * log2))
        kept.append(float(theta))

    return TrQ2Profile(
        thetas=np.asarray(kept), values=np.asarray(values), skipped=tuple(skipped)
    )


def var_upsilon0_oracle(R: ToeplitzHerm) -> float:
    """
    tr (B_M R_M)^2, the N-free factor of var Upsilon-hat_M(0)
    """
    if R.M < 2:
        raise ValueError("the variance oracle needs M >= 2")
    BR = _b_matrix(R.M) @ R.dense()
    return float(np.real(np.sum(BR * BR.T)))


def _lambda_max(T: ToeplitzHerm) -> float:
    M = T.M
    return float(
        sp_linalg.eigh(T.dense(), eigvals_only=True, subset_by_index=[M - 1, M - 1])[0]
    )


def lmax_ratio_biased(model: SpectralModel, M: int) -> float:
    """
    lambda_max(R^b_M) / lambda_max(R_M) for the Fejer-tapered target R^b_M
    """
    if M == 1:
        return 1.0
    R = build_toeplitz(model, M)
    return _lambda_max(tapered_target(R)) / _lambda_max(R)
