from __future__ import annotations

__all__ = [
    "NoiseKind",
    "NoiseSpec",
    "Normalization",
    "ColumnCovariance",
    "DataMatrix",
    "Stream",
    "replicate_rng",
    "sample_noise",
    "xi",
    "assemble_X",
    "assemble_from_signal",
    "draw_data_matrix",
    "signal_plus_noise",
]

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionMismatch
from .spectral import HermitianMatrix

_SEED_MASK = (1 << 64) - 1


class NoiseKind(enum.Enum):
    GAUSSIAN_REAL = "gaussian-real"
    GAUSSIAN_COMPLEX = "gaussian-complex"
    SPHERICAL_REAL = "spherical-real"
    SPHERICAL_COMPLEX = "spherical-complex"

    @property
    def is_complex(self) -> bool:
        return self in (NoiseKind.GAUSSIAN_COMPLEX, NoiseKind.SPHERICAL_COMPLEX)

    @property
    def is_spherical(self) -> bool:
        return self in (NoiseKind.SPHERICAL_REAL, NoiseKind.SPHERICAL_COMPLEX)


class Stream(enum.IntEnum):
    NOISE = 0
    SIGNAL = 1
    SPIKE_COUNT = 2
    SPIKE_POSITION = 3
    MIXING = 4
    CALIBRATION = 5


def replicate_rng(
    seed: int, replicate: int, stream: Stream | int = Stream.NOISE, *tags: int
) -> np.random.Generator:
    """
    Counter-based generator keyed by (seed, replicate, stream, *tags).
    Two calls with the same key produce the same stream on any thread.
    """
    key = np.random.SeedSequence(
        entropy=int(seed) & _SEED_MASK,
        spawn_key=(int(replicate), int(stream), *(int(t) for t in tags)),
    )
    return np.random.Generator(np.random.Philox(key))


@dataclass(frozen=True)
class NoiseSpec:
    kind: NoiseKind = NoiseKind.GAUSSIAN_COMPLEX
    seed: int = 0


def sample_noise(
    spec: NoiseSpec,
    M: int,
    N: int,
    replicate: int = 0,
    *tags: int,
    stream: Stream = Stream.NOISE,
) -> NDArray:
    """
    Draws the M x N noise matrix Z with E|Z_mn|^2 = 1.

    Complex kinds split the unit variance evenly between real and imaginary
    parts; spherical kinds rescale Gaussian columns to norm sqrt(M).
    """
    if M < 1 or N < 1:
        raise ValueError(f"noise dimensions must be positive, got {M}x{N}")

    rng = replicate_rng(spec.seed, replicate, stream, *tags)
    if spec.kind.is_complex:
        z = (
            rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N))
        ) / math.sqrt(2.0)
    else:
        z = rng.standard_normal((M, N))

    if spec.kind.is_spherical:
        z *= math.sqrt(M) / np.linalg.norm(z, axis=0, keepdims=True)
    return z


class Normalization(enum.Enum):
    NONE = "none"
    TRACE_N = "trace-n"


@dataclass(frozen=True, eq=False)
class ColumnCovariance:
    """
    Diagonal C_N = sigma2 * diag(alpha_1, .., alpha_p, 1, .., 1).
    TRACE_N rescales the diagonal so that tr C_N = N.
    """

    alphas: Tuple[float, ...] = ()
    sigma2: float = 1.0
    normalize: Normalization = Normalization.NONE
    N: int = 1

    def __post_init__(self):
        alphas = tuple(sorted((float(a) for a in self.alphas), reverse=True))
        if any(a <= 1.0 for a in alphas):
            raise ValueError(f"spike strengths must exceed 1, got {alphas}")
        if len(alphas) > self.N:
            raise ValueError(f"{len(alphas)} spikes do not fit in N={self.N}")
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        object.__setattr__(self, "alphas", alphas)

    @classmethod
    def identity(cls, N: int) -> ColumnCovariance:
        return cls(N=N)

    @property
    def p(self) -> int:
        return len(self.alphas)

    @property
    def zeta(self) -> float:
        return (sum(self.alphas) + self.N - self.p) / self.N

    @property
    def effective_sigma2(self) -> float:
        if self.normalize is Normalization.TRACE_N:
            return 1.0 / self.zeta
        return self.sigma2

    @property
    def diagonal(self) -> NDArray[np.float64]:
        base = np.ones(self.N, dtype=np.float64)
        base[: self.p] = self.alphas
        return self.effective_sigma2 * base

    def as_dict(self) -> dict:
        return {
            "alphas": list(self.alphas),
            "sigma2": self.sigma2,
            "normalize": self.normalize.value,
            "N": self.N,
        }


def xi(C: ColumnCovariance) -> float:
    return float(np.mean(C.diagonal))


@dataclass(frozen=True, eq=False)
class DataMatrix:
    entries: NDArray
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if np.ndim(self.entries) != 2:
            raise DimensionMismatch("data matrix must be two dimensional")
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))
        for name, size in (("M", self.M), ("N", self.N)):
            if name in self.meta and self.meta[name] != size:
                raise DimensionMismatch(
                    f"meta says {name}={self.meta[name]} but entries have {size}"
                )

    @property
    def M(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]


def assemble_X(
    Rsqrt: HermitianMatrix, Z: ArrayLike, C: ColumnCovariance, **meta
) -> DataMatrix:
    """
    X = R^{1/2} Z C^{1/2}
    """
    Z = np.asarray(Z)
    if Z.ndim != 2 or Z.shape[0] != Rsqrt.M or Z.shape[1] != C.N:
        raise DimensionMismatch(
            f"R^(1/2) is {Rsqrt.M}x{Rsqrt.M}, Z is {Z.shape}, C has N={C.N}"
        )
    entries = (Rsqrt.entries @ Z) * np.sqrt(C.diagonal)[None, :]
    return DataMatrix(entries, {"M": Z.shape[0], "N": Z.shape[1], **meta})


def assemble_from_signal(Rsqrt: HermitianMatrix, Y: ArrayLike, **meta) -> DataMatrix:
    """
    X = R^{1/2} Y^H for an N x M signal-plus-noise matrix Y
    """
    Y = np.asarray(Y)
    if Y.ndim != 2 or Y.shape[1] != Rsqrt.M:
        raise DimensionMismatch(f"Y is {Y.shape} but R^(1/2) is {Rsqrt.M}x{Rsqrt.M}")
    return DataMatrix(
        Rsqrt.entries @ Y.conj().T, {"M": Y.shape[1], "N": Y.shape[0], **meta}
    )


def draw_data_matrix(
    Rsqrt: HermitianMatrix,
    noise: NoiseSpec,
    C: ColumnCovariance,
    replicate: int,
    *tags: int,
) -> Tuple[NDArray, DataMatrix]:
    Z = sample_noise(noise, Rsqrt.M, C.N, replicate, *tags)
    X = assemble_X(
        Rsqrt,
        Z,
        C,
        seed=noise.seed,
        replicate=replicate,
        noise=noise.kind.value,
        column_covariance=C.as_dict(),
    )
    return Z, X


def signal_plus_noise(
    A: ArrayLike, sigma: float, M: int, seed: int, replicate: int = 0
) -> Tuple[NDArray[np.complex128], ColumnCovariance]:
    """
    Y = A m + sigma n with complex standard Gaussian m (p x M) and n (N x M).

    :param A: N x p mixing matrix
    :param sigma: noise standard deviation
    :param M: number of time samples
    :return: Y (N x M) and the diagonal covariance carrying the eigenvalues of
             A A^H + sigma^2 I
    """
    A = np.asarray(A)
    if A.ndim == 1:
        A = A[:, None]
    N, p = A.shape
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")

    spec = NoiseSpec(NoiseKind.GAUSSIAN_COMPLEX, seed)
    Y = sigma * sample_noise(spec, N, M, replicate)
    if p:
        Y = Y + A @ sample_noise(spec, p, M, replicate, stream=Stream.SIGNAL)

    singular = np.linalg.svd(A, compute_uv=False) if p else np.zeros(0)
    strength = singular**2 / sigma**2
    alphas = tuple(1.0 + s for s in strength if s > 1e-12)
    return Y, ColumnCovariance(alphas=alphas, sigma2=sigma**2, N=N)

