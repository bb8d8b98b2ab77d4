"""Regressors trained on log price, plus grid search and persistence."""

from .gbdt import (GbdtModel, GbdtParams, Tree, find_best_split, gbdt_fit,
                   gbdt_predict)
from .grid import grid_search
from .mlp import MlpModel, loss_and_grads, mlp_fit, mlp_predict
from .registry import (MODEL_SCHEMA_VERSION, fit_model, model_from_doc,
                       model_to_doc, predict_model, resolve_params)
from .ridge import RidgeModel, ridge_fit, ridge_predict

__all__ = [
    "GbdtModel", "GbdtParams", "Tree", "find_best_split", "gbdt_fit",
    "gbdt_predict", "grid_search", "MlpModel", "loss_and_grads", "mlp_fit",
    "mlp_predict", "MODEL_SCHEMA_VERSION", "fit_model", "model_from_doc",
    "model_to_doc", "predict_model", "resolve_params", "RidgeModel",
    "ridge_fit", "ridge_predict",
]
