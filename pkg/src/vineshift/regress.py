"""Conditional-density regression on top of a fitted vine.

The conditional density of the target given features keeps only the
factors that involve the target variable; feature-only factors are
constant in y and cancel when the product is normalized over a grid:

    p(y | x)  ~  p_y(y) * prod_{edges e with y in N(e)} c_e(...)

The grid spans the target marginal's [0.001, 0.999] quantile range
expanded by 10 percent, and normalization is trapezoidal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import Dataset
from .errors import DegenerateDataError, SchemaError
from .rvine import VineModel, _split_conditioned


@dataclass(frozen=True)
class YGrid:
    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float).ravel())
        if self.points.size < 33:
            raise ValueError("grid needs at least 33 points")
        if np.any(np.diff(self.points) <= 0.0):
            raise ValueError("grid points must be strictly increasing")


@dataclass(frozen=True)
class RegressionMetrics:
    nmse: float
    tll: float


def _require_target(vine: VineModel) -> int:
    if vine.target_index is None:
        raise ValueError("model has no target variable configured")
    return int(vine.target_index)


def default_grid(vine: VineModel, n_points: int = 257) -> YGrid:
    """Grid over the target marginal's expanded quantile range (raw units)."""
    y = _require_target(vine)
    marg = vine.marginals[y]
    lo = marg.quantile(0.001)
    hi = marg.quantile(0.999)
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    if vine.norm_mean is not None:
        lo = vine.norm_mean[y] + vine.norm_std[y] * lo
        hi = vine.norm_mean[y] + vine.norm_std[y] * hi
    return YGrid(np.linspace(lo, hi, n_points))


def feature_indices(vine: VineModel) -> list:
    y = _require_target(vine)
    return [i for i in range(vine.dim) if i != y]


def conditional_density_batch(vine: VineModel, X_feat, grid: YGrid) -> np.ndarray:
    """Normalized conditional densities, one row per feature vector.

    X_feat columns follow the model's variable order with the target
    column removed. Output row r integrates to 1 over grid.points by the
    trapezoid rule.
    """
    y = _require_target(vine)
    feats = feature_indices(vine)
    Xf = np.atleast_2d(np.asarray(X_feat, dtype=float))
    if Xf.shape[1] != len(feats):
        raise ValueError(f"expected {len(feats)} feature columns, got {Xf.shape[1]}")
    m = Xf.shape[0]
    g = grid.points.size

    # Internal (normalized) coordinates.
    gy = grid.points
    if vine.norm_mean is not None:
        gy = (gy - vine.norm_mean[y]) / vine.norm_std[y]
    rows = np.zeros((m, vine.dim))
    rows[:, feats] = Xf
    rows_int = vine._to_internal(rows)

    # Pseudo-observations: features once per test row, grid once per point.
    u_feat = np.empty((m, vine.dim))
    for i in feats:
        u_feat[:, i] = vine.marginals[i].cdf(rows_int[:, i])
    u_grid = vine.marginals[y].cdf(gy)

    # Walk the trees keeping two array shapes: length m for values with
    # no grid dependence, length m*g (grid index fastest) once the target
    # enters an edge's constraint. Only consumers of the target ever need
    # the expanded shape, so feature-only h-functions run on m rows.
    trees = vine.trees
    needed = [[set() for _ in t.edges] for t in trees]
    for t_idx in range(1, len(trees)):
        prev = trees[t_idx - 1]
        for edge in trees[t_idx].edges:
            for var, e_idx in _split_conditioned(prev, edge).items():
                needed[t_idx - 1][e_idx].add(var)

    def expand(a):
        return np.repeat(a, g) if a.size == m else a

    u_grid_tiled = np.tile(u_grid, m)
    logd = np.tile(vine.marginals[y].logpdf(gy), m)
    samples: list[list[dict]] = []
    for t_idx, tree in enumerate(trees):
        tree_samples = []
        for e_idx, edge in enumerate(tree.edges):
            j, k = edge.conditioned
            if t_idx == 0:
                s1 = u_grid_tiled if j == y else u_feat[:, j]
                s2 = u_grid_tiled if k == y else u_feat[:, k]
            else:
                owner = _split_conditioned(trees[t_idx - 1], edge)
                s1 = samples[t_idx - 1][owner[j]][j]
                s2 = samples[t_idx - 1][owner[k]][k]
            if y in edge.constraint:
                s1, s2 = expand(s1), expand(s2)
                logd = logd + edge.copula.log_density(s1, s2)
            want = needed[t_idx][e_idx]
            vals = {}
            if j in want:
                vals[j] = edge.copula.cdf_u_given_v(s1, s2)
            if k in want:
                vals[k] = edge.copula.cdf_v_given_u(s1, s2)
            tree_samples.append(vals)
        samples.append(tree_samples)
    logd = logd.reshape(m, g)

    logd -= logd.max(axis=1, keepdims=True)
    dens = np.exp(logd)
    dens /= np.trapezoid(dens, grid.points, axis=1)[:, None]
    return dens


def conditional_density(vine: VineModel, x_feat, grid: YGrid) -> np.ndarray:
    """Normalized conditional density of the target for one feature vector."""
    return conditional_density_batch(vine, np.asarray(x_feat, dtype=float)[None, :], grid)[0]


def predict_means(vine: VineModel, X_feat, grid: YGrid | None = None,
                  point: str = "mean") -> np.ndarray:
    """Point predictions from the conditional density (mean or median)."""
    if grid is None:
        grid = default_grid(vine)
    dens = conditional_density_batch(vine, X_feat, grid)
    if point == "mean":
        return np.trapezoid(dens * grid.points, grid.points, axis=1)
    if point == "median":
        half = np.concatenate([np.zeros((dens.shape[0], 1)),
                               np.cumsum((dens[:, 1:] + dens[:, :-1]) * 0.5
                                         * np.diff(grid.points), axis=1)], axis=1)
        out = np.empty(dens.shape[0])
        for r in range(dens.shape[0]):
            out[r] = np.interp(0.5, half[r], grid.points)
        return out
    raise ValueError("point must be 'mean' or 'median'")


def predict_mean(vine: VineModel, x_feat, grid: YGrid | None = None) -> float:
    return float(predict_means(vine, np.asarray(x_feat, dtype=float)[None, :], grid)[0])


def nmse(predictions, truth) -> float:
    """Mean squared error over the population variance of the truth."""
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(truth, dtype=float).ravel()
    if p.size != t.size or p.size < 2:
        raise ValueError("predictions and truth must have equal length >= 2")
    var = float(np.var(t))
    if var == 0.0:
        raise DegenerateDataError("truth has zero variance; NMSE undefined")
    return float(np.mean((p - t) ** 2) / var)


def test_log_likelihood(vine: VineModel, test) -> float:
    """Mean log density over test rows."""
    if isinstance(test, Dataset):
        if test.names != vine.variable_names:
            raise SchemaError("test columns do not match the model's variables")
        X = test.X
    else:
        X = np.asarray(test, dtype=float)
    values = vine.log_density(X)
    return float(np.mean(values))


def evaluate(vine: VineModel, test: Dataset,
             grid: YGrid | None = None) -> RegressionMetrics:
    """NMSE of conditional-mean predictions plus mean test log density."""
    y = _require_target(vine)
    if isinstance(test, Dataset):
        if test.names != vine.variable_names:
            raise SchemaError("test columns do not match the model's variables")
        X = test.X
    else:
        X = np.asarray(test, dtype=float)
    feats = feature_indices(vine)
    if grid is None:
        grid = default_grid(vine)
    preds = predict_means(vine, X[:, feats], grid)
    return RegressionMetrics(nmse=nmse(preds, X[:, y]),
                             tll=float(np.mean(vine.log_density(X))))


__all__ = [
    "RegressionMetrics",
    "YGrid",
    "conditional_density",
    "conditional_density_batch",
    "default_grid",
    "evaluate",
    "feature_indices",
    "nmse",
    "predict_mean",
    "predict_means",
    "test_log_likelihood",
]
