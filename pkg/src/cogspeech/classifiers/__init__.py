"""The classifier zoo: linear SVM, decision tree, random forest, fuzzy
fingerprints, and multinomial logistic regression, all emitting per-class
soft decisions."""

from .base import (
    ConstantClassifier,
    Dataset,
    ScoreKind,
    SoftDecision,
    SoftScoreClassifier,
    Standardizer,
)
from .ffp import FfpClassifier
from .io import load_model, model_from_dict, model_to_dict, save_model
from .softmax import DivergenceError, SoftmaxRegression, softmax_gradient, softmax_loss
from .svm import LinearSvmClassifier
from .trees import ForestClassifier, TreeClassifier

__all__ = [
    "ConstantClassifier",
    "Dataset",
    "ScoreKind",
    "SoftDecision",
    "SoftScoreClassifier",
    "Standardizer",
    "LinearSvmClassifier",
    "TreeClassifier",
    "ForestClassifier",
    "FfpClassifier",
    "SoftmaxRegression",
    "DivergenceError",
    "softmax_loss",
    "softmax_gradient",
    "save_model",
    "load_model",
    "model_to_dict",
    "model_from_dict",
]
