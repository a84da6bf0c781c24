from __future__ import annotations

__all__ = [
    "WhitenKind",
    "WhitenedCov",
    "Gammas",
    "AlphaEstimate",
    "SpikeReport",
    "PUBLISHED_GAMMAS",
    "whitened_cov",
    "whiten_data",
    "ideal_cov",
    "dual_cov",
    "mp_edges",
    "mp_density",
    "mp_atom",
    "spike_limit",
    "calibrate_gammas",
    "detect_p",
    "detect_p_single",
    "estimate_sigma",
    "estimate_alphas",
    "report_spikes",
    "fix_phase",
    "eigvec_alignment",
    "pca_compress",
]

import enum
import math
from dataclasses import dataclass
from logging import Logger
from typing import Any, Final, NamedTuple, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg as sp_linalg

from ..utils.logger import void_logger
from .errors import (
    DimensionMismatch,
    EmptySignal,
    NoDetection,
    NonPositiveEigenvalue,
    NotPositiveDefinite,
    SubcriticalSpike,
)
from .estimators import ToeplitzEstimate, sample_cov, toeplitzify
from .harness import run_replicates
from .spectral import (
    TOL_PD,
    HermitianMatrix,
    SpectralModel,
    build_toeplitz,
    matrix_inv,
    matrix_sqrt,
)
from .synth import (
    ColumnCovariance,
    DataMatrix,
    NoiseKind,
    NoiseSpec,
    Stream,
    assemble_X,
    sample_noise,
)

DEFAULT_K_MAX: Final[int] = 50


class WhitenKind(enum.Enum):
    UNBIASED = "unbiased-whiten"
    BIASED = "biased-whiten"
    IDEAL = "ideal-rid"


@dataclass(frozen=True, eq=False)
class WhitenedCov:
    """
    Whitened sample covariance with its aspect ratio c = dimension / samples
    """

    entries: HermitianMatrix
    c: float
    source: WhitenKind

    @property
    def dim(self) -> int:
        return self.entries.M

    def eigenvalues(self) -> NDArray[np.float64]:
        """
        :return: eigenvalues in descending order
        """
        return self.entries.eigvalsh()[::-1]

    def top_eigenvalues(self, k: int) -> NDArray[np.float64]:
        k = min(k, self.dim)
        w = sp_linalg.eigh(
            self.entries.entries,
            eigvals_only=True,
            subset_by_index=[self.dim - k, self.dim - 1],
        )
        return w[::-1]

    def top_eigenpairs(self, k: int) -> Tuple[NDArray[np.float64], NDArray]:
        w, V = self.entries.eigh()
        return w[::-1][:k], V[:, ::-1][:, :k]


class Gammas(NamedTuple):
    g1: float
    g2: float
    g3: float


# thresholds reported for M = 833 samples, N = 500 variates, a = 0.7
PUBLISHED_GAMMAS: Final[Gammas] = Gammas(1.04418, 1.0353, 1.0294)


def _entries(X: DataMatrix | Any) -> NDArray:
    return X.entries if isinstance(X, DataMatrix) else np.asarray(X)


def _require_pd(A: HermitianMatrix, what: str) -> None:
    w = A.eigvalsh()
    if not (w[-1] > 0 and w[0] > TOL_PD * w[-1]):
        raise NotPositiveDefinite(f"{what} is not positive definite", w[0], w[-1])


def whitened_cov(
    X: DataMatrix | Any,
    Rhat_inv: HermitianMatrix,
    kind: WhitenKind = WhitenKind.UNBIASED,
) -> WhitenedCov:
    """
    S_w = M^{-1} X^H Rhat^{-1} X

    :param X: M x N data
    :param Rhat_inv: inverse of the row covariance estimate
    :param kind: provenance tag
    :return: the N x N whitened covariance with c = N / M
    """
    entries = _entries(X)
    M, N = entries.shape
    if Rhat_inv.M != M:
        raise DimensionMismatch(f"Rhat^-1 is {Rhat_inv.M}x{Rhat_inv.M}, X has M={M}")
    _require_pd(Rhat_inv, "inverse row covariance estimate")

    Sw = entries.conj().T @ Rhat_inv.entries @ entries / M
    return WhitenedCov(HermitianMatrix(Sw, check=False), c=N / M, source=kind)


def whiten_data(
    X: DataMatrix | Any, biased: bool = False
) -> Tuple[WhitenedCov, ToeplitzEstimate]:
    """
    S -> Rhat -> Rhat^{-1} -> S_w on one data matrix
    """
    estimate = toeplitzify(sample_cov(X), biased=biased)
    Rhat_inv = matrix_inv(estimate.to_hermitian())
    kind = WhitenKind.BIASED if biased else WhitenKind.UNBIASED
    return whitened_cov(X, Rhat_inv, kind), estimate


def ideal_cov(Z: ArrayLike, C: ColumnCovariance) -> WhitenedCov:
    """
    S_Rid = M^{-1} C^{1/2} Z^H Z C^{1/2}, the whitened covariance under a known R
    """
    Z = np.asarray(Z)
    M, N = Z.shape
    if N != C.N:
        raise DimensionMismatch(f"Z has N={N}, C has N={C.N}")
    W = Z * np.sqrt(C.diagonal)[None, :]
    return WhitenedCov(
        HermitianMatrix(W.conj().T @ W / M, check=False),
        c=N / M,
        source=WhitenKind.IDEAL,
    )


def dual_cov(
    X: DataMatrix | Any,
    Rhat_inv_sqrt: HermitianMatrix,
    C: ColumnCovariance | None = None,
    kind: WhitenKind = WhitenKind.BIASED,
) -> WhitenedCov:
    """
    N^{-1} Rhat^{-1/2} X C X^H Rhat^{-1/2}, the M x M dual of S_w.
    Its Marcenko-Pastur ratio is M / N.
    """
    entries = _entries(X)
    M, N = entries.shape
    if Rhat_inv_sqrt.M != M:
        raise DimensionMismatch(f"Rhat^-1/2 is {Rhat_inv_sqrt.M}, X has M={M}")

    W = Rhat_inv_sqrt.entries @ entries
    if C is not None:
        W = W * np.sqrt(C.diagonal)[None, :]
    return WhitenedCov(
        HermitianMatrix(W @ W.conj().T / N, check=False), c=M / N, source=kind
    )


# ===== Marcenko-Pastur =====


def mp_edges(c: float) -> Tuple[float, float]:
    if not c > 0:
        raise ValueError(f"aspect ratio must be positive, got {c}")
    root = math.sqrt(c)
    return (1.0 - root) ** 2, (1.0 + root) ** 2


def mp_density(c: float, lam: ArrayLike) -> float | NDArray[np.float64]:
    """
    Continuous part of the Marcenko-Pastur law; the atom at zero for c > 1 is
    reported by mp_atom.
    """
    lower, upper = mp_edges(c)
    x = np.asarray(lam, dtype=np.float64)
    inside = (x > lower) & (x < upper) & (x > 0)
    out = np.zeros_like(x)
    xi = x[inside]
    out[inside] = np.sqrt((upper - xi) * (xi - lower)) / (2.0 * math.pi * c * xi)
    return float(out) if out.ndim == 0 else out


def mp_atom(c: float) -> float:
    return max(0.0, 1.0 - 1.0 / c)


def spike_limit(alpha: float, c: float, sigma2: float = 1.0) -> float:
    """
    Almost sure limit sigma2 (alpha + c alpha / (alpha - 1)) of a supercritical spike.

    :raise SubcriticalSpike: when alpha <= 1 + sqrt(c)
    """
    if alpha <= 1.0 + math.sqrt(c):
        raise SubcriticalSpike(
            f"spike {alpha} does not exceed the detection edge 1 + sqrt({c})"
        )
    return sigma2 * (alpha + c * alpha / (alpha - 1.0))


# ===== threshold calibration and detection =====


def calibrate_gammas(
    M: int,
    N: int,
    reps: int,
    seed: int,
    *,
    a: float = 0.7,
    model: SpectralModel | None = None,
    noise: NoiseKind = NoiseKind.GAUSSIAN_COMPLEX,
    threads: int = 1,
    logger: Logger = void_logger,
) -> Gammas:
    """
    Largest eigenvalue ratios lambda_i / lambda_{i+1}, i = 1..3, of S_w over
    replicates of the spike-free model, each one whitened with its own estimate.

    :param M: samples per variate (rows of X)
    :param N: number of variates (dimension of S_w)
    :param reps: calibration replicates
    :param seed: base seed; calibration draws from its own sub-stream
    :return: the three thresholds
    """
    if reps < 1:
        raise ValueError(f"calibration needs at least one replicate, got {reps}")
    if N < 4:
        raise ValueError(f"calibration needs N >= 4, got {N}")

    model = model or SpectralModel.time_domain(a)
    Rsqrt = matrix_sqrt(build_toeplitz(model, M).to_hermitian())
    C = ColumnCovariance.identity(N)
    spec = NoiseSpec(noise, seed)
    logger.info(f"calibrating thresholds at M={M}, N={N} over {reps} replicates")

    def _replicate(r: int) -> NDArray[np.float64]:
        Z = sample_noise(spec, M, N, r, stream=Stream.CALIBRATION)
        Sw, _ = whiten_data(assemble_X(Rsqrt, Z, C))
        top = Sw.top_eigenvalues(4)
        return top[:-1] / top[1:]

    ratios = np.vstack(run_replicates(_replicate, reps, threads, logger))
    gammas = Gammas(*(float(g) for g in ratios.max(axis=0)))
    logger.info(f"calibrated thresholds {tuple(gammas)}")
    return gammas


def _checked_eigs(eigs: ArrayLike, needed: int) -> NDArray[np.float64]:
    values = np.asarray(eigs, dtype=np.float64)
    if values.ndim != 1:
        raise ValueError("eigenvalues must be a vector")
    if np.any(np.diff(values) > 0):
        raise ValueError("eigenvalues must be sorted in descending order")
    if values.size < needed:
        raise ValueError(f"need at least {needed} eigenvalues, got {values.size}")
    return values


def detect_p(
    eigs: ArrayLike, gammas: Sequence[float], k_max: int = DEFAULT_K_MAX
) -> int:
    """
    Smallest k with lambda_{k+1}/lambda_{k+2} < g1, lambda_{k+2}/lambda_{k+3} < g2
    and lambda_{k+3}/lambda_{k+4} < g3 (eigenvalues 1-indexed, descending).

    :raise NoDetection: no k <= k_max passes the three tests
    :raise NonPositiveEigenvalue: a compared eigenvalue is not positive
    """
    g1, g2, g3 = gammas
    values = _checked_eigs(eigs, 4)
    limit = min(k_max, values.size - 4)
    used = values[: limit + 4]
    if np.any(used <= 0):
        raise NonPositiveEigenvalue("eigenvalue ratios need positive eigenvalues")

    ratios = used[:-1] / used[1:]
    for k in range(limit + 1):
        if ratios[k] < g1 and ratios[k + 1] < g2 and ratios[k + 2] < g3:
            return k
    raise NoDetection(f"no gap closes within the first {limit} eigenvalues")


def detect_p_single(
    eigs: ArrayLike, gamma1: float, k_max: int = DEFAULT_K_MAX
) -> int:
    """
    One-ratio variant: smallest k with lambda_{k+1}/lambda_{k+2} < gamma1
    """
    values = _checked_eigs(eigs, 2)
    limit = min(k_max, values.size - 2)
    used = values[: limit + 2]
    if np.any(used <= 0):
        raise NonPositiveEigenvalue("eigenvalue ratios need positive eigenvalues")

    ratios = used[:-1] / used[1:]
    for k in range(limit + 1):
        if ratios[k] < gamma1:
            return k
    raise NoDetection(f"no gap closes within the first {limit} eigenvalues")


def estimate_sigma(eigs: ArrayLike, p_hat: int, c: float) -> float:
    """
    sigma-hat = sqrt(lambda_{p+1}) / (1 + sqrt(c)), the bulk edge read backwards
    """
    values = np.asarray(eigs, dtype=np.float64)
    if p_hat < 0 or p_hat >= values.size:
        raise IndexError(f"p_hat={p_hat} leaves no bulk eigenvalue in {values.size}")
    edge = values[p_hat]
    if edge <= 0:
        raise NonPositiveEigenvalue(f"bulk edge eigenvalue {edge} is not positive")
    return math.sqrt(edge) / (1.0 + math.sqrt(c))


class AlphaEstimate(NamedTuple):
    values: Tuple[float, ...]
    clamped: Tuple[bool, ...]


def estimate_alphas(
    eigs: ArrayLike, p_hat: int, sigma_hat: float, c: float
) -> AlphaEstimate:
    """
    Inverts lambda = sigma^2 (alpha + c alpha / (alpha - 1)) for each of the
    p_hat leading eigenvalues, taking the root above 1 + sqrt(c).
    Eigenvalues without such a root, either through a negative discriminant or
    a root below the edge, clamp the estimate to 1 + sqrt(c) and flag it.
    """
    values = np.asarray(eigs, dtype=np.float64)
    if p_hat > values.size:
        raise IndexError(f"p_hat={p_hat} exceeds {values.size} eigenvalues")

    edge = 1.0 + math.sqrt(c)
    alphas, clamped = [], []
    for lam in values[:p_hat]:
        x = lam / sigma_hat**2
        b = 1.0 - c + x
        disc = b * b - 4.0 * x
        root = 0.5 * (b + math.sqrt(disc)) if disc >= 0 else -math.inf
        alphas.append(max(root, edge))
        clamped.append(root < edge)
    return AlphaEstimate(values=tuple(alphas), clamped=tuple(clamped))


@dataclass(frozen=True, eq=False)
class SpikeReport:
    p_hat: int
    sigma_hat: float
    alpha_hats: Tuple[float, ...]
    gammas: Gammas
    eigenvalues: NDArray[np.float64]
    clamped: Tuple[bool, ...] = ()


def report_spikes(
    eigs: ArrayLike, gammas: Sequence[float], c: float, k_max: int = DEFAULT_K_MAX
) -> SpikeReport:
    values = np.asarray(eigs, dtype=np.float64)
    p_hat = detect_p(values, gammas, k_max)
    sigma_hat = estimate_sigma(values, p_hat, c)
    alphas = estimate_alphas(values, p_hat, sigma_hat, c)
    return SpikeReport(
        p_hat=p_hat,
        sigma_hat=sigma_hat,
        alpha_hats=alphas.values,
        gammas=Gammas(*gammas),
        eigenvalues=values,
        clamped=alphas.clamped,
    )


# ===== PCA =====


def fix_phase(V: ArrayLike) -> NDArray:
    """
    Rotates every column so that its largest-modulus coordinate is real positive
    """
    V = np.array(V)
    if V.ndim == 1:
        return fix_phase(V[:, None])[:, 0]
    rows = np.argmax(np.abs(V), axis=0)
    pivots = V[rows, np.arange(V.shape[1])]
    return V / (pivots / np.abs(pivots))[None, :]


def eigvec_alignment(u: ArrayLike, v: ArrayLike) -> float:
    """
    min over |rho| = 1 of || u - rho v || for unit-normalized u and v
    """
    u = np.asarray(u) / np.linalg.norm(u)
    v = np.asarray(v) / np.linalg.norm(v)
    overlap = abs(np.vdot(v, u))
    return math.sqrt(max(0.0, 2.0 - 2.0 * overlap))


def pca_compress(
    X: DataMatrix | Any,
    Sw: WhitenedCov,
    p_hat: int,
    Rhat_inv_sqrt: HermitianMatrix,
    reference: ArrayLike | None = None,
) -> Tuple[NDArray, NDArray]:
    """
    Principal component series of X* from the top p_hat eigenvectors of S_w.
    With a reference (N x p_hat), every eigenvector is rotated by the unit
    phase that best matches the corresponding reference column instead.

    :return: (Xhat_w, Yhat_w), both p_hat x M; Xhat_w* = V^H X* and
             Yhat_w = Xhat_w* Rhat^{-1/2}
    :raise EmptySignal: when p_hat = 0
    """
    if p_hat < 1:
        raise EmptySignal("no principal component to compress onto")

    entries = _entries(X)
    if entries.shape[1] != Sw.dim:
        raise DimensionMismatch(f"X has N={entries.shape[1]}, S_w is {Sw.dim}x{Sw.dim}")

    _, V = Sw.top_eigenpairs(p_hat)
    if reference is None:
        V = fix_phase(V)
    else:
        overlap = np.sum(V.conj() * np.asarray(reference)[:, :p_hat], axis=0)
        modulus = np.abs(overlap)
        phase = np.where(modulus > 0, overlap / np.where(modulus > 0, modulus, 1.0), 1.0)
        V = V * phase[None, :]
    Xhat = V.conj().T @ entries.conj().T
    return Xhat, Xhat @ Rhat_inv_sqrt.entries
