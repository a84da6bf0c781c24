from __future__ import annotations

__all__ = ["upsilon", "upsilon_fejer", "fejer_weights"]

from typing import Final

import numpy as np
from numpy.typing import ArrayLike, NDArray

_THETA_BLOCK: Final[int] = 256


def fejer_weights(M: int) -> NDArray[np.float64]:
    """
    Cesaro weights 1 - k/M for k = 0 .. M-1
    """
    return 1.0 - np.arange(M, dtype=np.float64) / M


def _hermitian_poly(
    seq: ArrayLike, theta: ArrayLike, weights: NDArray | None
) -> NDArray[np.complex128]:
    r = np.asarray(seq)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("lag sequence must be a non-empty vector")

    if weights is not None:
        r = r * weights

    thetas = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    flat = thetas.ravel()
    k = np.arange(r.size, dtype=np.float64)
    out = np.empty(flat.size, dtype=np.complex128)

    # negative lags carry conj(r_k) e^{-ik theta}
    for start in range(0, flat.size, _THETA_BLOCK):
        block = flat[start : start + _THETA_BLOCK]
        phase = np.exp(1j * np.multiply.outer(block, k))
        out[start : start + block.size] = phase @ r + np.conj(phase[:, 1:]) @ np.conj(
            r[1:]
        )

    return out.reshape(thetas.shape)


def upsilon(seq: ArrayLike, theta: ArrayLike) -> complex | NDArray[np.complex128]:
    """
    Evaluates the trigonometric polynomial sum_{|n|<M} r_n e^{in theta}
    with r_{-n} = conj(r_n).

    :param seq: lags r_0 .. r_{M-1}
    :param theta: a frequency or an array of them
    :return: complex value(s); imaginary part vanishes up to rounding
    """
    values = _hermitian_poly(seq, theta, None)
    return complex(values[0]) if np.ndim(theta) == 0 else values


def upsilon_fejer(seq: ArrayLike, theta: ArrayLike) -> float | NDArray[np.float64]:
    """
    Fejer (Cesaro) mean sum_{|k|<M} (1 - |k|/M) r_k e^{ik theta}.
    Nonnegative whenever r is a positive semi-definite sequence.
    """
    r = np.asarray(seq)
    values = _hermitian_poly(r, theta, fejer_weights(r.size)).real
    return float(values[0]) if np.ndim(theta) == 0 else values
