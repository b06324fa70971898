"""Regular-vine structure learning and density evaluation.

A fitted model factorizes a d-dimensional density into d marginal kernel
densities and a hierarchy of bivariate copulas indexed by the edges of
trees T_1 ... T_t (t = truncation level):

    p(x) = prod_i p_i(x_i) * prod_trees prod_edges c_{jk|D(e)}(. , .)

Tree T_1 spans the variables; its edges are chosen by a maximum spanning
tree on absolute Kendall tau weights (Prim's algorithm). Each later tree
spans the previous tree's edges, joining only pairs of edges that share
a node (proximity condition), with the set algebra

    N(e) = N(e1) | N(e2)   constraint set
    D(e) = N(e1) & N(e2)   conditioning set
    C(e) = N(e1) ^ N(e2)   conditioned pair

Copula arguments above T_1 are conditional cdfs obtained from the
h-functions of the parent edges; the copula's functional form ignores
the conditioning values (simplified-vine assumption). Edges beyond the
truncation level behave as independence copulas and are not stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bicopula import GaussianCopula, IndependenceCopula, KernelCopula
from .errors import DegenerateDataError, InsufficientDataError, StructureError
from .statcore import GaussianKernel1D, kendall_tau, rank_pseudo_observations


def prim_max_spanning_tree(weights: np.ndarray, valid: np.ndarray | None = None,
                           edge_key=None) -> list[tuple[int, int]]:
    """Maximum spanning tree over nodes 0..m-1 by Prim's algorithm.

    weights: symmetric (m, m) matrix. valid: optional boolean mask of
    allowed edges. Ties are broken by the smallest edge_key(i, j)
    (default: the sorted index pair), which makes the result
    deterministic for equal weights.
    """
    m = weights.shape[0]
    if edge_key is None:
        edge_key = lambda i, j: (min(i, j), max(i, j))
    in_tree = [0]
    outside = set(range(1, m))
    edges: list[tuple[int, int]] = []
    while outside:
        best = None
        for i in in_tree:
            for j in outside:
                if valid is not None and not valid[i, j]:
                    continue
                cand = (weights[i, j], edge_key(i, j), i, j)
                if best is None or cand[0] > best[0] or (cand[0] == best[0] and cand[1] < best[1]):
                    best = cand
        if best is None:
            raise StructureError("candidate graph is disconnected")
        _, _, i, j = best
        edges.append((min(i, j), max(i, j)))
        in_tree.append(j)
        outside.remove(j)
    return edges


@dataclass
class VineEdge:
    """One pair-copula factor.

    conditioned: the ordered pair C(e); conditioning: D(e); node_pair:
    indices of the two nodes this edge joins in its own tree (needed to
    apply the proximity condition one level up); copula: fitted model or
    None before fitting; weight: |tau| at selection time.
    """

    conditioned: tuple[int, int]
    conditioning: frozenset
    node_pair: tuple[int, int]
    copula: object = None
    weight: float = 0.0

    def __post_init__(self):
        self.conditioned = (int(self.conditioned[0]), int(self.conditioned[1]))
        self.conditioning = frozenset(int(i) for i in self.conditioning)
        if len(self.conditioned) != 2 or self.conditioned[0] == self.conditioned[1]:
            raise StructureError("conditioned set must contain exactly 2 variables")
        if set(self.conditioned) & self.conditioning:
            raise StructureError("conditioned and conditioning sets must be disjoint")

    @property
    def constraint(self) -> frozenset:
        return frozenset(self.conditioned) | self.conditioning

    def label(self) -> str:
        j, k = self.conditioned
        if self.conditioning:
            cond = ",".join(str(i) for i in sorted(self.conditioning))
            return f"{j},{k}|{cond}"
        return f"{j},{k}"


@dataclass
class VineTree:
    level: int
    nodes: list
    edges: list

    def __post_init__(self):
        if len(self.edges) != len(self.nodes) - 1:
            raise StructureError(
                f"tree level {self.level}: {len(self.nodes)} nodes need "
                f"{len(self.nodes) - 1} edges, got {len(self.edges)}")


def build_first_tree(pseudo: np.ndarray) -> VineTree:
    """Maximum spanning tree over variables, weighted by |kendall_tau|."""
    U = np.asarray(pseudo, dtype=float)
    n, d = U.shape
    if d < 2:
        raise ValueError("need at least 2 variables")
    if n < 2:
        raise InsufficientDataError("need at least 2 rows")
    W = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1, d):
            W[i, j] = W[j, i] = abs(kendall_tau(U[:, i], U[:, j]))
    pairs = prim_max_spanning_tree(W)
    edges = [VineEdge(conditioned=(i, j), conditioning=frozenset(),
                      node_pair=(i, j), weight=float(W[i, j]))
             for i, j in pairs]
    return VineTree(level=1, nodes=[frozenset([i]) for i in range(d)], edges=edges)


def _split_conditioned(prev: VineTree, edge: VineEdge):
    """Map each conditioned variable of edge to the parent edge it came from."""
    p, q = edge.node_pair
    np_set = prev.edges[p].constraint
    nq_set = prev.edges[q].constraint
    out = {}
    for var in edge.conditioned:
        if var in np_set and var not in nq_set:
            out[var] = p
        elif var in nq_set and var not in np_set:
            out[var] = q
        else:
            raise StructureError(f"variable {var} is not private to either parent edge")
    return out


def build_next_tree(prev: VineTree, cond_samples: list[dict]) -> VineTree:
    """Build tree level prev.level+1 from conditional pseudo-observations.

    cond_samples[i][v] holds the sample of P(x_v | constraint(e_i) - v)
    for each conditioned variable v of prev.edges[i]. Candidate edges
    join prev-edges sharing a node; weights are |kendall_tau| of the two
    conditional samples identified by the constraint-set algebra.
    """
    m = len(prev.edges)
    if m < 2:
        raise ValueError("previous tree needs at least 2 edges")
    W = np.zeros((m, m))
    valid = np.zeros((m, m), dtype=bool)
    meta = {}
    for p in range(m):
        for q in range(p + 1, m):
            e1, e2 = prev.edges[p], prev.edges[q]
            if not set(e1.node_pair) & set(e2.node_pair):
                continue
            sym = e1.constraint ^ e2.constraint
            if len(sym) != 2:
                raise StructureError("node-sharing edges must differ in exactly 2 variables")
            a = next(iter(e1.constraint - e2.constraint))
            b = next(iter(e2.constraint - e1.constraint))
            if a not in cond_samples[p] or b not in cond_samples[q]:
                raise StructureError("missing conditional sample for candidate edge")
            W[p, q] = W[q, p] = abs(kendall_tau(cond_samples[p][a], cond_samples[q][b]))
            valid[p, q] = valid[q, p] = True
            meta[(p, q)] = (a, b)

    def key(i, j):
        p, q = min(i, j), max(i, j)
        a, b = meta[(p, q)]
        return tuple(sorted((a, b)))

    pairs = prim_max_spanning_tree(W, valid=valid, edge_key=key)
    edges = []
    for p, q in pairs:
        e1, e2 = prev.edges[p], prev.edges[q]
        conditioned = tuple(sorted(e1.constraint ^ e2.constraint))
        conditioning = e1.constraint & e2.constraint
        edges.append(VineEdge(conditioned=conditioned, conditioning=conditioning,
                              node_pair=(p, q), weight=float(W[p, q])))
    return VineTree(level=prev.level + 1,
                    nodes=[e.constraint for e in prev.edges],
                    edges=edges)


def propagate_arguments(trees: list, U: np.ndarray, copula_of=None) -> list:
    """Argument samples (edge, s1, s2) for every stored edge.

    U is an (n, d) matrix of pseudo-observations; columns that are
    entirely nan mark variables absent from the data, and any edge whose
    constraint touches one yields (edge, None, None). copula_of lets a
    caller propagate h-values through substitute copulas (the adaptation
    engine walks with its freshly refitted ones); default is each edge's
    own copula.
    """
    if copula_of is None:
        copula_of = lambda e: e.copula
    nan_cols = {i for i in range(U.shape[1]) if np.any(np.isnan(U[:, i]))}
    out = []
    samples: list[list[dict]] = []
    for t_idx, tree in enumerate(trees):
        tree_samples = []
        last = t_idx == len(trees) - 1
        for edge in tree.edges:
            j, k = edge.conditioned
            if tree.level == 1:
                if j in nan_cols or k in nan_cols:
                    s1 = s2 = None
                else:
                    s1, s2 = U[:, j], U[:, k]
            else:
                prev = trees[t_idx - 1]
                owner = _split_conditioned(prev, edge)
                s1 = samples[t_idx - 1][owner[j]].get(j)
                s2 = samples[t_idx - 1][owner[k]].get(k)
                if s1 is None or s2 is None:
                    s1 = s2 = None
            out.append((edge, s1, s2))
            if not last and s1 is not None:
                cop = copula_of(edge)
                tree_samples.append({j: cop.cdf_u_given_v(s1, s2),
                                     k: cop.cdf_v_given_u(s1, s2)})
            else:
                tree_samples.append({})
        samples.append(tree_samples)
    return out


def _fit_edge_copula(family: str, s1: np.ndarray, s2: np.ndarray, gamma: float):
    if family == "kernel":
        return KernelCopula.fit(s1, s2, gamma=gamma)
    if family == "gaussian":
        return GaussianCopula.fit(s1, s2)
    raise ValueError(f"unknown copula family '{family}'")


@dataclass
class VineModel:
    """Fitted truncated regular vine."""

    marginals: list
    trees: list
    variable_names: list
    target_index: int | None = None
    norm_mean: np.ndarray | None = None
    norm_std: np.ndarray | None = None
    fit_metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.marginals)

    @property
    def truncation(self) -> int:
        return len(self.trees)

    # -- normalization plumbing ------------------------------------------

    def _to_internal(self, X: np.ndarray) -> np.ndarray:
        if self.norm_mean is None:
            return X
        return (X - self.norm_mean) / self.norm_std

    def _log_jacobian(self) -> float:
        if self.norm_mean is None:
            return 0.0
        return -float(np.log(self.norm_std).sum())

    # -- propagation of copula arguments ---------------------------------

    def _propagate(self, U: np.ndarray):
        return propagate_arguments(self.trees, U)

    # -- evaluation -------------------------------------------------------

    def log_density(self, X) -> np.ndarray | float:
        """Row-wise log density; finite for all finite inputs."""
        arr = np.asarray(X, dtype=float)
        scalar = arr.ndim == 1
        rows = np.atleast_2d(arr)
        if rows.shape[1] != self.dim:
            raise ValueError(f"expected {self.dim} columns, got {rows.shape[1]}")
        Z = self._to_internal(rows)
        logp = np.zeros(Z.shape[0])
        U = np.empty_like(Z)
        for i, marg in enumerate(self.marginals):
            logp += marg.logpdf(Z[:, i])
            U[:, i] = marg.cdf(Z[:, i])
        for edge, s1, s2 in self._propagate(U):
            logp += edge.copula.log_density(s1, s2)
        logp += self._log_jacobian()
        return float(logp[0]) if scalar else logp

    def conditional_cdf(self, var: int, value: float, conditioning: dict | None = None) -> float:
        """P(X_var <= value | X_s = x_s for every s in conditioning).

        Evaluates the recursion P(j|S) = h of the edge (j,k|S-k) applied
        to P(j|S-k) and P(k|S-k), bottoming out at the marginal kernel
        cdf. The conditioning set must be derivable from the stored
        trees, otherwise a StructureError is raised.
        """
        cond = dict(conditioning or {})
        if var in cond:
            raise ValueError("query variable cannot appear in the conditioning set")
        base = {}
        for i, x in {var: value, **cond}.items():
            z = x if self.norm_mean is None else (x - self.norm_mean[i]) / self.norm_std[i]
            base[int(i)] = float(self.marginals[i].cdf(z))
        memo: dict = {}

        def rec(j: int, S: frozenset) -> float:
            if not S:
                return base[j]
            key = (j, S)
            if key in memo:
                return memo[key]
            if len(S) > len(self.trees):
                raise StructureError("conditioning set deeper than the stored trees")
            result = None
            for edge in self.trees[len(S) - 1].edges:
                a, b = edge.conditioned
                if a == j and b in S and edge.conditioning == S - {b}:
                    u = rec(j, S - {b})
                    v = rec(b, S - {b})
                    result = float(edge.copula.cdf_u_given_v(u, v))
                    break
                if b == j and a in S and edge.conditioning == S - {a}:
                    u = rec(a, S - {a})
                    v = rec(j, S - {a})
                    result = float(edge.copula.cdf_v_given_u(u, v))
                    break
            if result is None:
                raise StructureError(
                    f"conditional of {j} given {sorted(S)} is not derivable from the fitted trees")
            memo[key] = result
            return result

        return rec(int(var), frozenset(int(i) for i in cond))


def fit_vine(data, truncation: int = 1, family: str = "kernel", gamma: float = 0.0,
             variable_names=None, target_index: int | None = None,
             normalize: bool = False, seed: int | None = None) -> VineModel:
    """Fit marginals, pseudo-observations and trees T_1..truncation.

    Fitting is deterministic; seed is only recorded in the metadata so
    experiment harnesses can stamp their provenance.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise ValueError("data must be a 2-d array")
    n, d = X.shape
    if n < 20:
        raise InsufficientDataError(f"need at least 20 rows, got {n}")
    if d < 2:
        raise ValueError("need at least 2 variables")
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    names = list(variable_names) if variable_names is not None else [f"x{i}" for i in range(d)]
    if len(names) != d:
        raise ValueError("variable_names length must match column count")
    for i in range(d):
        if np.all(X[:, i] == X[0, i]):
            raise DegenerateDataError(f"column '{names[i]}' has zero variance")

    norm_mean = norm_std = None
    if normalize:
        norm_mean = X.mean(axis=0)
        norm_std = X.std(axis=0)
        X = (X - norm_mean) / norm_std

    marginals = [GaussianKernel1D.fit(X[:, i]) for i in range(d)]
    U = np.column_stack([rank_pseudo_observations(X[:, i]) for i in range(d)])

    trees = []
    tree = build_first_tree(U)
    levels = min(truncation, d - 1)
    # conditional-cdf samples feed the next tree's tau matrix; computing
    # them for a tree nothing builds on would cost O(n^2) per edge for no
    # benefit, so the last fitted level skips them
    cond_samples: list[dict] = []
    for edge in tree.edges:
        j, k = edge.conditioned
        edge.copula = _fit_edge_copula(family, U[:, j], U[:, k], gamma)
        if levels > 1:
            cond_samples.append({
                j: edge.copula.cdf_u_given_v(U[:, j], U[:, k]),
                k: edge.copula.cdf_v_given_u(U[:, j], U[:, k]),
            })
    trees.append(tree)
    for level in range(2, levels + 1):
        prev = trees[-1]
        tree = build_next_tree(prev, cond_samples)
        new_samples = []
        for edge in tree.edges:
            owner = _split_conditioned(prev, edge)
            j, k = edge.conditioned
            s1 = cond_samples[owner[j]][j]
            s2 = cond_samples[owner[k]][k]
            edge.copula = _fit_edge_copula(family, s1, s2, gamma)
            if level < levels:
                new_samples.append({
                    j: edge.copula.cdf_u_given_v(s1, s2),
                    k: edge.copula.cdf_v_given_u(s1, s2),
                })
        cond_samples = new_samples
        trees.append(tree)

    for t in trees:
        if len(t.edges) != d - t.level:
            raise StructureError(f"tree level {t.level} has {len(t.edges)} edges, expected {d - t.level}")

    return VineModel(marginals=marginals, trees=trees, variable_names=names,
                     target_index=target_index, norm_mean=norm_mean, norm_std=norm_std,
                     fit_metadata={"n": int(n), "seed": seed, "truncation": int(truncation),
                                   "family": family})
