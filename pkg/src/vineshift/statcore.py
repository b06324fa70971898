"""Scalar statistical primitives.

Standard-normal special functions, one-dimensional Gaussian kernel
density models with Silverman bandwidths, rank transforms, and an
O(n log n) Kendall rank correlation. Everything here is a pure function
of its inputs; fitted kernel models are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr, ndtri
from scipy.stats import rankdata

from .errors import DegenerateDataError, InsufficientDataError

_SQRT_2PI = np.sqrt(2.0 * np.pi)

# Largest number of matrix entries evaluated at once by the kernel sums.
# Keeps peak memory of (points x centers) broadcasts around 32 MB.
_CHUNK_ENTRIES = 4_000_000


def _as_float_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def std_normal_pdf(x):
    """Standard Gaussian density exp(-x^2/2)/sqrt(2*pi)."""
    arr, scalar = _as_float_array(x)
    out = np.exp(-0.5 * arr * arr) / _SQRT_2PI
    return float(out) if scalar else out


def std_normal_cdf(x):
    """Standard Gaussian cdf. Accepts +-inf, mapping to 1/0."""
    arr, scalar = _as_float_array(x)
    out = ndtr(arr)
    return float(out) if scalar else out


def std_normal_quantile(p):
    """Inverse standard Gaussian cdf on the open interval (0, 1)."""
    arr, scalar = _as_float_array(p)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("quantile argument must lie strictly in (0, 1)")
    out = ndtri(arr)
    return float(out) if scalar else out


def silverman_bandwidth(sample, dim: int = 1) -> float:
    """Rule-of-thumb bandwidth sigma * (4/(dim+2))^(1/(dim+4)) * n^(-1/(dim+4)).

    dim is the dimension of the estimation space the kernel lives in:
    1 for marginal densities, 2 when the coordinate belongs to a
    bivariate copula estimate. sigma is the sample standard deviation
    (ddof=1).
    """
    arr = np.asarray(sample, dtype=float).ravel()
    n = arr.size
    if n < 2:
        raise InsufficientDataError("silverman_bandwidth needs at least 2 points")
    if dim < 1:
        raise ValueError("dim must be a positive integer")
    sigma = float(np.std(arr, ddof=1))
    if sigma == 0.0:
        raise DegenerateDataError("zero-variance sample has no usable bandwidth")
    return sigma * (4.0 / (dim + 2.0)) ** (1.0 / (dim + 4.0)) * n ** (-1.0 / (dim + 4.0))


@dataclass(frozen=True)
class GaussianKernel1D:
    """Gaussian kernel mixture with one common bandwidth.

    pdf(x)  = (1/(n h)) sum_i phi((x - c_i)/h)
    cdf(x)  = (1/n) sum_i Phi((x - c_i)/h)
    """

    centers: np.ndarray
    bandwidth: float

    def __post_init__(self):
        object.__setattr__(self, "centers", np.asarray(self.centers, dtype=float).ravel())
        if self.centers.size == 0:
            raise ValueError("centers must be non-empty")
        if not self.bandwidth > 0.0:
            raise ValueError("bandwidth must be positive")

    @classmethod
    def fit(cls, data) -> "GaussianKernel1D":
        """Fit with the Silverman dim=1 bandwidth."""
        arr = np.asarray(data, dtype=float).ravel()
        return cls(arr, silverman_bandwidth(arr, dim=1))

    def _std_resid(self, x: np.ndarray) -> np.ndarray:
        return (x[..., None] - self.centers) / self.bandwidth

    def pdf(self, x):
        arr, scalar = _as_float_array(x)
        out = np.empty(arr.shape, dtype=float)
        flat_in = arr.reshape(-1)
        flat_out = out.reshape(-1)
        step = max(1, _CHUNK_ENTRIES // self.centers.size)
        for lo in range(0, flat_in.size, step):
            t = self._std_resid(flat_in[lo:lo + step])
            flat_out[lo:lo + step] = np.exp(-0.5 * t * t).sum(axis=-1)
        out /= self.centers.size * self.bandwidth * _SQRT_2PI
        return float(out) if scalar else out

    def logpdf(self, x):
        """log pdf via the max-shift trick; finite for any finite x."""
        arr, scalar = _as_float_array(x)
        out = np.empty(arr.shape, dtype=float)
        flat_in = arr.reshape(-1)
        flat_out = out.reshape(-1)
        step = max(1, _CHUNK_ENTRIES // self.centers.size)
        for lo in range(0, flat_in.size, step):
            e = -0.5 * self._std_resid(flat_in[lo:lo + step]) ** 2
            m = e.max(axis=-1)
            flat_out[lo:lo + step] = m + np.log(np.exp(e - m[..., None]).sum(axis=-1))
        out -= np.log(self.centers.size * self.bandwidth * _SQRT_2PI)
        return float(out) if scalar else out

    def cdf(self, x):
        arr, scalar = _as_float_array(x)
        out = np.empty(arr.shape, dtype=float)
        flat_in = arr.reshape(-1)
        flat_out = out.reshape(-1)
        step = max(1, _CHUNK_ENTRIES // self.centers.size)
        for lo in range(0, flat_in.size, step):
            flat_out[lo:lo + step] = ndtr(self._std_resid(flat_in[lo:lo + step])).mean(axis=-1)
        return float(out) if scalar else out

    def quantile(self, p):
        """Inverse cdf by bracketed root search, accurate to ~1e-12 in x."""
        arr, scalar = _as_float_array(p)
        if np.any(arr <= 0.0) or np.any(arr >= 1.0):
            raise ValueError("quantile argument must lie strictly in (0, 1)")
        lo = float(self.centers.min()) - 10.0 * self.bandwidth
        hi = float(self.centers.max()) + 10.0 * self.bandwidth
        flat = arr.reshape(-1)
        out = np.empty(flat.shape, dtype=float)
        for i, pi in enumerate(flat):
            a, b = lo, hi
            while self.cdf(a) > pi:
                a -= 10.0 * self.bandwidth
            while self.cdf(b) < pi:
                b += 10.0 * self.bandwidth
            out[i] = brentq(lambda t: self.cdf(t) - pi, a, b, xtol=1e-12, rtol=8.9e-16)
        out = out.reshape(arr.shape)
        return float(out) if scalar else out


def _merge_count(values) -> int:
    """Count strict inversions of a Python list by bottom-up merge sort."""
    src = list(values)
    n = len(src)
    dst = src[:]
    inversions = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if src[j] < src[i]:
                    inversions += mid - i
                    dst[k] = src[j]
                    j += 1
                else:
                    dst[k] = src[i]
                    i += 1
                k += 1
            while i < mid:
                dst[k] = src[i]
                i += 1
                k += 1
            while j < hi:
                dst[k] = src[j]
                j += 1
                k += 1
        src, dst = dst, src
        width *= 2
    return inversions


def _tie_pair_count(values: np.ndarray) -> int:
    _, counts = np.unique(values, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def kendall_tau(x, y) -> float:
    """Kendall tau-a in O(n log n).

    tau_a = (concordant - discordant) / (n(n-1)/2); tied pairs add zero
    to the numerator while the denominator stays at the full pair count.
    Sorting by (x, y) and counting strict inversions of the y sequence
    gives the discordant count; tie corrections come from group counts:

        num = N - 2*discordant - T_x - T_y + T_xy

    with N = n(n-1)/2 and T_* the numbers of pairs tied in x, in y, and
    in both. Matches the O(n^2) sign-count definition exactly.
    """
    xa = np.asarray(x, dtype=float).ravel()
    ya = np.asarray(y, dtype=float).ravel()
    if xa.size != ya.size:
        raise ValueError("x and y must have the same length")
    n = xa.size
    if n < 2:
        raise InsufficientDataError("kendall_tau needs at least 2 observations")
    npairs = n * (n - 1) // 2
    order = np.lexsort((ya, xa))
    discordant = _merge_count(ya[order].tolist())
    t_x = _tie_pair_count(xa)
    t_y = _tie_pair_count(ya)
    _, joint_counts = np.unique(np.column_stack([xa, ya]), axis=0, return_counts=True)
    t_xy = int((joint_counts * (joint_counts - 1) // 2).sum())
    numerator = npairs - 2 * discordant - t_x - t_y + t_xy
    return numerator / npairs


def pseudo_observations(column) -> np.ndarray:
    """Map a raw column through its own fitted kernel cdf.

    Returns values strictly inside (0, 1). Raises DegenerateDataError
    for zero-variance input.
    """
    arr = np.asarray(column, dtype=float).ravel()
    if arr.size < 2:
        raise InsufficientDataError("pseudo_observations needs at least 2 rows")
    model = GaussianKernel1D.fit(arr)
    return model.cdf(arr)


def rank_pseudo_observations(column) -> np.ndarray:
    """Map a raw column to r_i/(n+1) with average ranks for ties.

    Exactly invariant under strictly increasing transforms of the input,
    which makes copula fits independent of the marginal scale.
    """
    arr = np.asarray(column, dtype=float).ravel()
    if arr.size < 2:
        raise InsufficientDataError("rank_pseudo_observations needs at least 2 rows")
    if np.all(arr == arr[0]):
        raise DegenerateDataError("zero-variance column has no ranks to spread")
    return rankdata(arr, method="average") / (arr.size + 1.0)


__all__ = [
    "GaussianKernel1D",
    "kendall_tau",
    "pseudo_observations",
    "rank_pseudo_observations",
    "silverman_bandwidth",
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_quantile",
]
