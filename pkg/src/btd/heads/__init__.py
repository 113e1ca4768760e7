from .features import extract_features, feature_dim
from .rbf import RBFModel, SingularModelError, rbf_predict, train_rbf
from .tree import DecisionTree, InternalNode, LeafNode, dt_leaf, dt_predict, train_dt

__all__ = [
    "DecisionTree",
    "InternalNode",
    "LeafNode",
    "RBFModel",
    "SingularModelError",
    "dt_leaf",
    "dt_predict",
    "extract_features",
    "feature_dim",
    "rbf_predict",
    "train_dt",
    "train_rbf",
]
