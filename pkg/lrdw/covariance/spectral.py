from __future__ import annotations

__all__ = [
    "ModelKind",
    "SpectralModel",
    "ToeplitzHerm",
    "HermitianMatrix",
    "SzegoReference",
    "RatioBounds",
    "DensityEvaluator",
    "TOL_PD",
    "TOL_PSD",
    "autocov",
    "autocov_sequence",
    "build_toeplitz",
    "toeplitz_matvec",
    "as_hermitian",
    "matrix_function",
    "matrix_sqrt",
    "matrix_inv_sqrt",
    "matrix_inv",
    "esd",
    "density_evaluator",
    "szego_reference",
    "spectrum_ratio_bounds",
]

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Final, NamedTuple, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import fft as sp_fft
from scipy import linalg as sp_linalg
from scipy import special as sp_special
from scipy import stats as sp_stats

from .errors import (
    DimensionMismatch,
    InvalidModel,
    NotHermitian,
    NotPositiveDefinite,
    QuadratureError,
)
from .trig import upsilon_fejer

TOL_PD: Final[float] = 1e-12
TOL_PSD: Final[float] = 1e-10
TOL_HERMITIAN: Final[float] = 1e-10

QUADRATURE_RTOL: Final[float] = 1e-8
_QUADRATURE_ATOL: Final[float] = 1e-13
_GL_ORDER: Final[int] = 16
_LAG_BLOCK: Final[int] = 64
_MAX_REFINEMENTS: Final[int] = 5
_MAX_LAG: Final[int] = 2**31
_POLYLOG_TERMS: Final[int] = 64
_NEAR_ZERO_DECADES: Final[int] = 12

DensityEvaluator = Callable[[NDArray[np.float64]], NDArray[np.float64]]


class ModelKind(enum.Enum):
    TIME_DOMAIN = "time"
    FREQUENCY_DOMAIN = "frequency"
    WHITE = "white"


@dataclass(frozen=True)
class SpectralModel:
    """
    Long-range-dependent row model.

    TIME_DOMAIN fixes r_k = (1 + |k|)^{-(1 - a)} with a configurable r_0,
    FREQUENCY_DOMAIN fixes the density f(x) = |x|^{-a} on [-pi, pi], and
    WHITE is r_k = r0 * delta_k (f constant), handy for identity sanity runs.
    """

    kind: ModelKind
    a: float = 0.5
    r0: float = 1.0
    quadrature_points: int = 256

    def __post_init__(self):
        if not isinstance(self.kind, ModelKind):
            raise InvalidModel(f"unknown model kind {self.kind!r}")
        if not 0.0 < self.a < 1.0:
            raise InvalidModel(f"LRD exponent a must lie in (0, 1), got {self.a}")
        if not self.r0 > 0.0:
            raise InvalidModel(f"r0 must be positive, got {self.r0}")
        if int(self.quadrature_points) < 1:
            raise InvalidModel(
                f"quadrature_points must be positive, got {self.quadrature_points}"
            )

    @classmethod
    def time_domain(cls, a: float, r0: float = 1.0) -> SpectralModel:
        return cls(kind=ModelKind.TIME_DOMAIN, a=a, r0=r0)

    @classmethod
    def frequency_domain(cls, a: float, quadrature_points: int = 256) -> SpectralModel:
        return cls(
            kind=ModelKind.FREQUENCY_DOMAIN, a=a, quadrature_points=quadrature_points
        )

    @classmethod
    def white(cls, r0: float = 1.0) -> SpectralModel:
        return cls(kind=ModelKind.WHITE, r0=r0)

    @property
    def density_lower_bound(self) -> float:
        """
        A positive lower bound of the spectral density
        """
        match self.kind:
            case ModelKind.TIME_DOMAIN:
                # convexity of (1 + k)^{a - 1} bounds f below by r0 - 2^a + 3^{a-1}
                return self.r0 - 2.0**self.a + 3.0 ** (self.a - 1.0)
            case ModelKind.FREQUENCY_DOMAIN:
                return math.pi ** (-self.a)
            case _:
                return self.r0

    @property
    def singularity_exponent(self) -> float:
        """
        Order of the pole of f at zero, f(x) ~ C |x|^{-exponent}
        """
        return 0.0 if self.kind is ModelKind.WHITE else self.a

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "a": self.a,
            "r0": self.r0,
            "quadrature_points": self.quadrature_points,
        }


# ===== Fourier coefficients =====


def _gauss_legendre_panels(
    lo: float, hi: float, panels: int
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    nodes, weights = np.polynomial.legendre.leggauss(_GL_ORDER)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


def _fourier_block(
    a: float, lags: NDArray[np.float64], delta: float, base_panels: int, level: int
) -> NDArray[np.float64]:
    """
    (1/pi) int_0^pi x^{-a} cos(k x) dx for every k in lags.
    [0, delta] is mapped through u = x^{1-a}, where x^{-a} dx = du / (1 - a).
    """
    k_max = float(lags.max()) if lags.size else 0.0
    power = 1.0 / (1.0 - a)
    scale = 2**level

    # at most ~2 radians of phase per panel
    head_panels = scale * (4 + math.ceil(k_max * power * delta / 2.0))
    tail_panels = scale * (base_panels + math.ceil(k_max * math.pi / 2.0))

    u, wu = _gauss_legendre_panels(0.0, delta ** (1.0 - a), head_panels)
    head = np.cos(np.multiply.outer(lags, u**power)) @ wu / (1.0 - a)

    x, wx = _gauss_legendre_panels(delta, math.pi, tail_panels)
    tail = np.cos(np.multiply.outer(lags, x)) @ (wx * x ** (-a))

    return (head + tail) / math.pi


def _frequency_coefficients(model: SpectralModel, lags: NDArray[np.int64]) -> NDArray:
    delta = math.pi / model.quadrature_points
    out = np.empty(lags.size, dtype=np.float64)
    for start in range(0, lags.size, _LAG_BLOCK):
        block = np.abs(lags[start : start + _LAG_BLOCK]).astype(np.float64)
        previous = _fourier_block(model.a, block, delta, model.quadrature_points, 0)
        for level in range(1, _MAX_REFINEMENTS + 1):
            current = _fourier_block(
                model.a, block, delta, model.quadrature_points, level
            )
            gap = np.abs(current - previous)
            if np.all(gap <= QUADRATURE_RTOL * np.abs(current) + _QUADRATURE_ATOL):
                break
            previous = current
        else:
            worst = int(block[np.argmax(gap)])
            raise QuadratureError(
                f"Fourier coefficient at lag {worst} did not converge after "
                f"{_MAX_REFINEMENTS} refinements (a={model.a})"
            )
        out[start : start + block.size] = current
    return out


def autocov_sequence(model: SpectralModel, M: int) -> NDArray[np.float64]:
    """
    Lags r_0 .. r_{M-1} of the model.

    :param model: the spectral model
    :param M: number of lags
    :return: real vector of length M
    """
    if M < 1:
        raise ValueError(f"M must be positive, got {M}")

    lags = np.arange(M, dtype=np.int64)
    match model.kind:
        case ModelKind.TIME_DOMAIN:
            seq = (1.0 + lags) ** (model.a - 1.0)
            seq[0] = model.r0
            return seq
        case ModelKind.FREQUENCY_DOMAIN:
            return _frequency_coefficients(model, lags)
        case _:
            seq = np.zeros(M, dtype=np.float64)
            seq[0] = model.r0
            return seq


def autocov(model: SpectralModel, k: int) -> float:
    if abs(k) >= _MAX_LAG:
        raise ValueError(f"lag {k} out of range")

    match model.kind:
        case ModelKind.TIME_DOMAIN:
            return model.r0 if k == 0 else float((1.0 + abs(k)) ** (model.a - 1.0))
        case ModelKind.FREQUENCY_DOMAIN:
            return float(_frequency_coefficients(model, np.array([abs(k)]))[0])
        case _:
            return model.r0 if k == 0 else 0.0


# ===== matrices =====


def _readonly(array: NDArray) -> NDArray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ToeplitzHerm:
    """
    Hermitian Toeplitz matrix stored by its lags; entry (i, j) is r_{i-j}
    and r_{-k} = conj(r_k).
    """

    first_row: NDArray = field()

    def __post_init__(self):
        row = np.array(self.first_row)
        if row.ndim != 1 or row.size == 0:
            raise DimensionMismatch("first_row must be a non-empty vector")
        if not np.iscomplexobj(row):
            row = row.astype(np.float64)
        elif abs(row[0].imag) > TOL_HERMITIAN * max(abs(row[0]), 1.0):
            raise NotHermitian(f"lag-0 entry must be real, got {row[0]}")
        else:
            row[0] = row[0].real
        object.__setattr__(self, "first_row", _readonly(row))

    @property
    def M(self) -> int:
        return self.first_row.size

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.first_row)

    def dense(self) -> NDArray:
        return sp_linalg.toeplitz(self.first_row, np.conj(self.first_row))

    def to_hermitian(self) -> HermitianMatrix:
        return HermitianMatrix(self.dense())

    def scaled(self, factor: float) -> ToeplitzHerm:
        return ToeplitzHerm(self.first_row * factor)

    def matvec(self, v: ArrayLike) -> NDArray:
        return toeplitz_matvec(self, v)


class HermitianMatrix:
    """
    Dense Hermitian matrix with a compute-once eigendecomposition.
    The cache is installed by a single assignment, so racing threads at worst
    repeat the same deterministic solve.
    """

    __slots__ = ["_entries", "_eig"]

    def __init__(self, entries: ArrayLike, *, check: bool = True) -> None:
        array = np.array(entries)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got {array.shape}")
        if not np.iscomplexobj(array):
            array = array.astype(np.float64)

        if check:
            scale = np.linalg.norm(array)
            skew = np.linalg.norm(array - array.conj().T)
            if skew > TOL_HERMITIAN * scale:
                raise NotHermitian(
                    f"matrix is not Hermitian: relative skew {skew / scale:.3e}"
                )

        self._entries: NDArray = _readonly(0.5 * (array + array.conj().T))
        self._eig: Tuple[NDArray, NDArray] | None = None

    @property
    def entries(self) -> NDArray:
        return self._entries

    @property
    def M(self) -> int:
        return self._entries.shape[0]

    def eigh(self) -> Tuple[NDArray[np.float64], NDArray]:
        """
        :return: ascending eigenvalues and orthonormal eigenvectors (columns)
        """
        if self._eig is None:
            w, v = sp_linalg.eigh(self._entries)
            self._eig = (_readonly(w), _readonly(v))
        return self._eig

    def eigvalsh(self) -> NDArray[np.float64]:
        if self._eig is not None:
            return self._eig[0]
        return sp_linalg.eigh(self._entries, eigvals_only=True)

    def __repr__(self):
        return f"HermitianMatrix(M={self.M}, dtype={self._entries.dtype})"


def as_hermitian(obj: Any) -> HermitianMatrix:
    if isinstance(obj, HermitianMatrix):
        return obj
    if hasattr(obj, "to_hermitian"):
        return obj.to_hermitian()
    return HermitianMatrix(obj)


def build_toeplitz(model: SpectralModel, M: int) -> ToeplitzHerm:
    return ToeplitzHerm(autocov_sequence(model, M))


def toeplitz_matvec(T: ToeplitzHerm, v: ArrayLike) -> NDArray:
    """
    T @ v through a circulant embedding of length >= 2M - 1.
    v may be a vector or an M x K block.
    """
    v = np.asarray(v)
    M = T.M
    if v.shape[0] != M:
        raise DimensionMismatch(f"vector of length {v.shape[0]} against M={M}")

    L = sp_fft.next_fast_len(2 * M - 1)
    r = T.first_row
    column = np.zeros(L, dtype=np.complex128)
    column[:M] = r
    if M > 1:
        column[L - M + 1 :] = np.conj(r[1:][::-1])

    spectrum = sp_fft.fft(column)
    if v.ndim == 2:
        spectrum = spectrum[:, None]
    padded = sp_fft.fft(v, n=L, axis=0)
    out = sp_fft.ifft(spectrum * padded, axis=0)[:M]

    if T.is_real and not np.iscomplexobj(v):
        return out.real
    return out


# ===== matrix functions =====


def matrix_function(
    A: HermitianMatrix, fn: Callable[[NDArray], NDArray], require_pd: bool
) -> HermitianMatrix:
    """
    V fn(lambda) V^H on a positive semi-definite A.

    :param A: the matrix
    :param fn: elementwise function of the clamped eigenvalues
    :param require_pd: demand lambda_min > TOL_PD * lambda_max
    :return: the resulting Hermitian matrix
    :raise NotPositiveDefinite: on indefinite input, or singular input when require_pd
    """
    w, V = A.eigh()
    lambda_min, lambda_max = float(w[0]), float(w[-1])

    if require_pd and not (lambda_max > 0 and lambda_min > TOL_PD * lambda_max):
        raise NotPositiveDefinite(
            "matrix is not positive definite", lambda_min, lambda_max
        )
    if lambda_min < -TOL_PSD * max(lambda_max, 0.0) or (
        lambda_max <= 0 and lambda_min < 0
    ):
        raise NotPositiveDefinite(
            "matrix is not positive semi-definite", lambda_min, lambda_max
        )

    values = fn(np.clip(w, 0.0, None))
    result = HermitianMatrix((V * values) @ V.conj().T, check=False)
    order = np.argsort(values, kind="stable")
    result._eig = (_readonly(values[order]), _readonly(V[:, order]))
    return result


def matrix_sqrt(A: HermitianMatrix) -> HermitianMatrix:
    return matrix_function(A, np.sqrt, require_pd=False)


def matrix_inv_sqrt(A: HermitianMatrix) -> HermitianMatrix:
    return matrix_function(A, lambda w: 1.0 / np.sqrt(w), require_pd=True)


def matrix_inv(A: HermitianMatrix) -> HermitianMatrix:
    return matrix_function(A, np.reciprocal, require_pd=True)


def esd(A: Any) -> NDArray[np.float64]:
    """
    Ascending eigenvalues of a Hermitian matrix (or anything coercible to one)
    """
    return as_hermitian(A).eigvalsh()


# ===== densities and Szego =====


def _wrapped_abs(theta: ArrayLike) -> NDArray[np.float64]:
    return np.abs(np.angle(np.exp(1j * np.asarray(theta, float))))


def _time_domain_density(model: SpectralModel) -> DensityEvaluator:
    """
    Exact density of r_k = (1 + |k|)^{a-1}.

    sum_{k>=1} (1+k)^{a-1} e^{ik x} = e^{-ix} Li_{1-a}(e^{ix}) - 1, and on |x| <= pi
    Li_s(e^{ix}) = Gamma(1-s) (-ix)^{s-1} + sum_j zeta(s-j) (ix)^j / j!.
    """
    s = 1.0 - model.a
    j = np.arange(_POLYLOG_TERMS)
    # highest power first for polyval
    coefficients = (sp_special.zeta(s - j) / sp_special.factorial(j))[::-1]
    pole = sp_special.gamma(model.a) * np.exp(0.5j * math.pi * model.a)

    def _polylog_density(theta):
        x = _wrapped_abs(theta)
        out = np.full(x.shape, np.inf)
        nz = x > 0
        z = 1j * x[nz]
        li = pole * x[nz] ** (-model.a) + np.polyval(coefficients, z)
        out[nz] = model.r0 - 2.0 + 2.0 * (np.exp(-z) * li).real
        return out

    return _polylog_density


def density_evaluator(model: SpectralModel, order: int = None) -> DensityEvaluator:
    """
    Pointwise spectral density.

    :param model: the spectral model
    :param order: when given for a TIME_DOMAIN model, the Fejer mean over that
                  many lags replaces the exact density
    :return: a vectorized function of theta, +inf at the pole
    """
    match model.kind:
        case ModelKind.FREQUENCY_DOMAIN:

            def _power_law(theta):
                with np.errstate(divide="ignore"):
                    return _wrapped_abs(theta) ** (-model.a)

            return _power_law
        case ModelKind.TIME_DOMAIN:
            if order is None:
                return _time_domain_density(model)
            if order < 1:
                raise ValueError(f"Fejer order must be positive, got {order}")
            seq = autocov_sequence(model, order)
            return lambda theta: np.asarray(upsilon_fejer(seq, theta), float)
        case _:
            return lambda theta: np.full(np.shape(theta), model.r0, dtype=float)


@dataclass(frozen=True, eq=False)
class SzegoReference:
    samples: NDArray[np.float64]
    eigenvalues: NDArray[np.float64]
    ks_distance: float

    def quantiles(self, levels: ArrayLike) -> NDArray[np.float64]:
        # the samples sit at grid midpoints, so Hazen positions are exact there
        return np.quantile(self.samples, levels, method="hazen")


def szego_reference(model: SpectralModel, M: int, grid: int) -> SzegoReference:
    """
    Reference distribution of f(theta) for theta uniform on (-pi, pi) and its
    Kolmogorov-Smirnov distance to the ESD of R_M.
    Every model here is even in theta, so the midpoint grid covers (0, pi).
    """
    if grid < M:
        raise ValueError(f"grid ({grid}) must be at least M ({M})")

    thetas = (np.arange(grid) + 0.5) * math.pi / grid
    samples = np.sort(density_evaluator(model)(thetas))
    eigenvalues = esd(build_toeplitz(model, M))
    ks = sp_stats.ks_2samp(eigenvalues, samples).statistic
    return SzegoReference(
        samples=_readonly(samples),
        eigenvalues=eigenvalues,
        ks_distance=float(ks),
    )


class RatioBounds(NamedTuple):
    lo: float
    hi: float
    spec_ok: bool


def spectrum_ratio_bounds(
    T1: ToeplitzHerm,
    T2: ToeplitzHerm,
    f1: DensityEvaluator,
    f2: DensityEvaluator,
    grid: int = 4096,
    exponents: Tuple[float, float] | None = None,
) -> RatioBounds:
    """
    Checks that the spectrum of T1 T2^{-1} lies within [ess inf f1/f2, ess sup f1/f2].

    The ratio is sampled on a midpoint grid of (-pi, pi), at pi, and on a
    geometric ladder towards zero. When f1 and f2 have poles at zero the ladder
    never reaches the limit, so pass their orders as `exponents`: a stronger
    pole in f1 sends hi to +inf, a stronger pole in f2 sends lo to 0.

    :param grid: even number of midpoints on (-pi, pi); zero is never sampled
    :param exponents: pole orders of f1 and f2 at zero, see
                      SpectralModel.singularity_exponent
    :raise NotPositiveDefinite: when T2 is not invertible
    """
    if T1.M != T2.M:
        raise DimensionMismatch(f"T1 is {T1.M}x{T1.M}, T2 is {T2.M}x{T2.M}")

    grid += grid % 2
    ladder = math.pi * np.logspace(-_NEAR_ZERO_DECADES, 0, 8 * _NEAR_ZERO_DECADES) / grid
    thetas = np.concatenate(
        [
            (np.arange(grid) + 0.5) * (2.0 * math.pi / grid) - math.pi,
            [math.pi],
            ladder,
            -ladder,
        ]
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.asarray(f1(thetas), float) / np.asarray(f2(thetas), float)
    ratio = ratio[np.isfinite(ratio)]
    lo, hi = float(ratio.min()), float(ratio.max())
    eps = 1e-8 * float(np.abs(ratio).max())

    if exponents is not None:
        e1, e2 = exponents
        if e1 > e2:
            hi = math.inf
        elif e1 < e2:
            lo = 0.0

    dense2 = T2.dense()
    w2 = sp_linalg.eigh(dense2, eigvals_only=True)
    if not (w2[-1] > 0 and w2[0] > TOL_PD * w2[-1]):
        raise NotPositiveDefinite("T2 is not positive definite", w2[0], w2[-1])

    try:
        values = sp_linalg.eigh(T1.dense(), dense2, eigvals_only=True)
    except sp_linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"generalized eigensolve failed: {e}") from e

    ok = bool(np.all(values >= lo - eps) and np.all(values <= hi + eps))
    return RatioBounds(lo=lo, hi=hi, spec_ok=ok)
