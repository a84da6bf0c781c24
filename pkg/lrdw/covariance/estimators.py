from __future__ import annotations

__all__ = [
    "ToeplitzEstimate",
    "sample_cov",
    "toeplitzify",
    "upsilon",
    "upsilon_fejer",
]

from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray

from .spectral import HermitianMatrix, ToeplitzHerm, as_hermitian
from .synth import DataMatrix
from .trig import upsilon, upsilon_fejer


@dataclass(frozen=True, eq=False)
class ToeplitzEstimate:
    """
    Toeplitzified covariance estimate; r_hat holds lags 0 .. M-1 and the
    negative lags follow by conjugation.
    """

    r_hat: NDArray
    biased: bool
    xi_used: float | None = None

    @property
    def M(self) -> int:
        return len(self.r_hat)

    @property
    def toeplitz(self) -> ToeplitzHerm:
        return ToeplitzHerm(self.r_hat)

    def to_hermitian(self) -> HermitianMatrix:
        return self.toeplitz.to_hermitian()


def sample_cov(X: DataMatrix | Any) -> HermitianMatrix:
    """
    S = N^{-1} X X^H

    :param X: M x N data (a DataMatrix or a plain array)
    :return: the M x M sample covariance
    """
    entries = X.entries if isinstance(X, DataMatrix) else np.asarray(X)
    N = entries.shape[1]
    if N < 1:
        raise ValueError("sample covariance needs at least one column")
    return HermitianMatrix(entries @ entries.conj().T / N, check=False)


def toeplitzify(S: HermitianMatrix | Any, biased: bool) -> ToeplitzEstimate:
    """
    Averages the k-th subdiagonal of S (entries S_{i+k, i}) for every lag k.

    Only the lower triangle is read. The unbiased estimate divides each sum by
    the diagonal length M - k, the biased one by M.
    Direct O(M^2); an FFT of the data columns would give O(N M log M).
    """
    entries = as_hermitian(S).entries
    M = entries.shape[0]

    sums = np.empty(M, dtype=entries.dtype)
    for k in range(M):
        # contiguous copies keep numpy on pairwise summation
        sums[k] = np.ascontiguousarray(np.diagonal(entries, offset=-k)).sum()

    divisors = np.full(M, float(M)) if biased else M - np.arange(M, dtype=np.float64)
    return ToeplitzEstimate(r_hat=sums / divisors, biased=biased)
