from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from numpy.typing import NDArray

from ..covariance.spectral import HermitianMatrix

_FIXTURES = Path(__file__).parent / "fixtures"


@lru_cache(maxsize=None)
def _load_thresholds() -> Mapping[str, Any]:
    with (_FIXTURES / "thresholds.json").open(encoding="utf-8") as f:
        return json.load(f)


def thresholds(name: str) -> Mapping[str, Any]:
    return _load_thresholds()[name]


def random_hermitian(rng: np.random.Generator, M: int, complex_: bool = True) -> NDArray:
    A = rng.standard_normal((M, M))
    if complex_:
        A = A + 1j * rng.standard_normal((M, M))
    return (A + A.conj().T) / 2


def random_psd(rng: np.random.Generator, M: int, floor: float = 0.1) -> HermitianMatrix:
    A = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    return HermitianMatrix(A @ A.conj().T / M + floor * np.eye(M))


def random_unitary(rng: np.random.Generator, M: int) -> NDArray:
    A = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    Q, R = np.linalg.qr(A)
    return Q * (np.diag(R) / np.abs(np.diag(R)))[None, :]


def relative_error(actual: NDArray, expected: NDArray) -> float:
    return float(np.linalg.norm(actual - expected) / np.linalg.norm(expected))
