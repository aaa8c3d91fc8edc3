"""Versioned JSON serialization for fitted classifiers.

The payload carries the estimator type, its hyperparameters, and the
fitted state, so a saved model restores to an object that scores
identically. Arrays are stored as nested lists.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .base import ConstantClassifier, Standardizer
from .ffp import FfpClassifier
from .softmax import SoftmaxRegression
from .svm import LinearSvmClassifier
from .trees import ForestClassifier, TreeClassifier, TreeNode

__all__ = ["save_model", "load_model", "model_to_dict", "model_from_dict"]

FORMAT = "cogspeech-model"
VERSION = 1


def _scaler_to_dict(scaler: Standardizer) -> dict:
    return {"mean": scaler.mean_.tolist(), "scale": scaler.scale_.tolist()}


def _scaler_from_dict(payload: dict) -> Standardizer:
    scaler = Standardizer()
    scaler.mean_ = np.array(payload["mean"])
    scaler.scale_ = np.array(payload["scale"])
    return scaler


def _node_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"probs": node.probs.tolist()}
    return {
        "probs": node.probs.tolist(),
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(payload: dict) -> TreeNode:
    node = TreeNode(probs=np.array(payload["probs"]))
    if "feature" in payload:
        node.feature = payload["feature"]
        node.threshold = payload["threshold"]
        node.left = _node_from_dict(payload["left"])
        node.right = _node_from_dict(payload["right"])
    return node


def model_to_dict(model) -> dict:
    """Serialize a fitted classifier to a JSON-compatible dict."""
    params = model.get_params()
    if isinstance(model, LinearSvmClassifier):
        state = {
            "coef": model.coef_.tolist(),
            "intercept": model.intercept_.tolist(),
            "scaler": _scaler_to_dict(model.scaler_),
        }
        kind = "linear_svm"
    elif isinstance(model, SoftmaxRegression):
        state = {"weights": model.weights_.tolist()}
        kind = "softmax"
    elif isinstance(model, FfpClassifier):
        state = {
            "fingerprints": [
                {str(f): mu for f, mu in fp.items()} for fp in model.fingerprints_
            ],
            "scaler": _scaler_to_dict(model.scaler_),
            "n_features": model.n_features_,
        }
        kind = "ffp"
    elif isinstance(model, ForestClassifier):
        state = {
            "trees": [_node_to_dict(t) for t in model.trees_],
            "n_features": model.n_features_,
        }
        kind = "forest"
    elif isinstance(model, TreeClassifier):
        state = {"root": _node_to_dict(model.root_), "n_features": model.n_features_}
        kind = "tree"
    elif isinstance(model, ConstantClassifier):
        state = {"n_features": model.n_features_}
        kind = "constant"
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return {"format": FORMAT, "version": VERSION, "type": kind, "params": params, "state": state}


_CONSTRUCTORS = {
    "linear_svm": LinearSvmClassifier,
    "softmax": SoftmaxRegression,
    "ffp": FfpClassifier,
    "tree": TreeClassifier,
    "forest": ForestClassifier,
    "constant": ConstantClassifier,
}


def model_from_dict(payload: dict):
    """Restore a fitted classifier saved by :func:`model_to_dict`."""
    if payload.get("format") != FORMAT:
        raise ValueError(f"not a {FORMAT} payload")
    if payload.get("version") != VERSION:
        raise ValueError(f"unsupported model version {payload.get('version')!r}")
    kind = payload["type"]
    model = _CONSTRUCTORS[kind](**payload["params"])
    state = payload["state"]
    if kind == "linear_svm":
        model.coef_ = np.array(state["coef"])
        model.intercept_ = np.array(state["intercept"])
        model.scaler_ = _scaler_from_dict(state["scaler"])
    elif kind == "softmax":
        model.weights_ = np.array(state["weights"])
    elif kind == "ffp":
        model.fingerprints_ = [
            {int(f): mu for f, mu in fp.items()} for fp in state["fingerprints"]
        ]
        model.scaler_ = _scaler_from_dict(state["scaler"])
        model.n_features_ = state["n_features"]
    elif kind == "tree":
        model.root_ = _node_from_dict(state["root"])
        model.n_features_ = state["n_features"]
    elif kind == "forest":
        model.trees_ = [_node_from_dict(t) for t in state["trees"]]
        model.n_features_ = state["n_features"]
    elif kind == "constant":
        model.n_features_ = state["n_features"]
    return model


def save_model(model, path: Path | str) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model)), encoding="utf-8")


def load_model(path: Path | str):
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
