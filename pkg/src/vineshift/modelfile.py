"""Versioned JSON persistence for fitted vine models.

The document is deterministic: keys are sorted, floats carry Python's
shortest round-trip repr, and the creation timestamp is preserved on
every subsequent save, so save -> load -> save is byte-identical. A
fresh model is stamped from SOURCE_DATE_EPOCH when set and 0 otherwise;
wall-clock time would break the rule that equal seeds produce equal
files. Kernel models store their support points, so size is O(n d).
"""

from __future__ import annotations

import json
import os

import numpy as np

from .bicopula import GaussianCopula, IndependenceCopula, KernelCopula
from .errors import ParseError, StructureError
from .rvine import VineEdge, VineModel, VineTree
from .statcore import GaussianKernel1D

FORMAT = "vineshift-model"
FORMAT_VERSION = 1


def _floats(a) -> list:
    return [float(x) for x in np.asarray(a, dtype=float).ravel()]


def _copula_doc(cop) -> dict:
    if isinstance(cop, KernelCopula):
        return {"family": "kernel",
                "z_centers": _floats(cop.z_centers),
                "w_centers": _floats(cop.w_centers),
                "sigma_z": float(cop.sigma_z),
                "sigma_w": float(cop.sigma_w),
                "gamma": float(cop.gamma)}
    if isinstance(cop, GaussianCopula):
        return {"family": "gaussian", "rho": float(cop.rho)}
    if isinstance(cop, IndependenceCopula):
        return {"family": "independence"}
    raise TypeError(f"cannot serialize copula of type {type(cop).__name__}")


def _copula_from(doc: dict):
    fam = doc.get("family")
    if fam == "kernel":
        return KernelCopula(np.asarray(doc["z_centers"], dtype=float),
                            np.asarray(doc["w_centers"], dtype=float),
                            float(doc["sigma_z"]), float(doc["sigma_w"]),
                            float(doc["gamma"]))
    if fam == "gaussian":
        return GaussianCopula(float(doc["rho"]))
    if fam == "independence":
        return IndependenceCopula()
    raise ParseError(f"unknown copula family {fam!r}")


def model_to_doc(model: VineModel) -> dict:
    meta = dict(model.fit_metadata)
    created = meta.pop("created", None)
    if created is None:
        created = int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    return {
        "format": FORMAT,
        "format_version": FORMAT_VERSION,
        "created": int(created),
        "variable_names": [str(s) for s in model.variable_names],
        "target_index": None if model.target_index is None else int(model.target_index),
        "normalization": None if model.norm_mean is None else {
            "mean": _floats(model.norm_mean), "std": _floats(model.norm_std)},
        "fit_metadata": meta,
        "marginals": [{"centers": _floats(m.centers), "bandwidth": float(m.bandwidth)}
                      for m in model.marginals],
        "trees": [
            {"level": int(t.level),
             "nodes": [sorted(int(v) for v in node) for node in t.nodes],
             "edges": [{"conditioned": [int(v) for v in e.conditioned],
                        "conditioning": sorted(int(v) for v in e.conditioning),
                        "node_pair": [int(v) for v in e.node_pair],
                        "weight": float(e.weight),
                        "copula": _copula_doc(e.copula)}
                       for e in t.edges]}
            for t in model.trees],
    }


def model_from_doc(doc) -> VineModel:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ParseError("not a vineshift model file")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {doc.get('format_version')!r}")
    try:
        names = [str(s) for s in doc["variable_names"]]
        marginals = [GaussianKernel1D(np.asarray(m["centers"], dtype=float),
                                      float(m["bandwidth"]))
                     for m in doc["marginals"]]
        trees = []
        for t in doc["trees"]:
            edges = [VineEdge(conditioned=tuple(e["conditioned"]),
                              conditioning=frozenset(e["conditioning"]),
                              node_pair=tuple(e["node_pair"]),
                              copula=_copula_from(e["copula"]),
                              weight=float(e["weight"]))
                     for e in t["edges"]]
            trees.append(VineTree(level=int(t["level"]),
                                  nodes=[frozenset(v) for v in t["nodes"]],
                                  edges=edges))
        norm = doc.get("normalization")
        meta = dict(doc.get("fit_metadata") or {})
        meta["created"] = int(doc["created"])
        ti = doc.get("target_index")
        model = VineModel(
            marginals=marginals, trees=trees, variable_names=names,
            target_index=None if ti is None else int(ti),
            norm_mean=None if norm is None else np.asarray(norm["mean"], dtype=float),
            norm_std=None if norm is None else np.asarray(norm["std"], dtype=float),
            fit_metadata=meta)
    except (KeyError, TypeError, ValueError, StructureError) as exc:
        raise ParseError(f"malformed model file: {exc}") from None

    d = len(names)
    if len(model.marginals) != d:
        raise ParseError("marginal count does not match variable names")
    if not model.trees or len(model.trees) > d - 1:
        raise ParseError(f"expected between 1 and {d - 1} trees, found {len(model.trees)}")
    for lvl, t in enumerate(model.trees, start=1):
        if t.level != lvl or len(t.edges) != d - lvl:
            raise ParseError(f"tree {lvl} is inconsistent with {d} variables")
    if model.target_index is not None and not 0 <= model.target_index < d:
        raise ParseError(f"target_index {model.target_index} out of range")
    if model.norm_mean is not None and (model.norm_mean.size != d
                                        or model.norm_std.size != d):
        raise ParseError("normalization vectors do not match variable count")
    return model


def save(model: VineModel, path) -> None:
    text = json.dumps(model_to_doc(model), sort_keys=True, indent=2) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load(path) -> VineModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from None
    return model_from_doc(doc)


__all__ = ["FORMAT", "FORMAT_VERSION", "load", "model_from_doc", "model_to_doc", "save"]
