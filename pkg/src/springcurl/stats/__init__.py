"""Questionnaire transforms and the mixed-model analysis pipeline."""
from .transforms import holm_adjust, loc_transform, normalize_likert
from .design import (ModelSpec, MODEL_FAMILIES, behavior_model, build_design,
                     cross, interact, learning_model, mains, training_model,
                     transfer_model)
from .lmm import (LmmFit, compare_models, fit_lmm, format_comparison,
                  format_fit)
from .predict import contrast, marginal_prediction
from .datasets import analysis_rows, center_traits, rows_from_csv, TRAIT_COLUMNS

__all__ = [
    "holm_adjust", "loc_transform", "normalize_likert",
    "ModelSpec", "MODEL_FAMILIES", "behavior_model", "build_design", "cross",
    "interact", "learning_model", "mains", "training_model", "transfer_model",
    "LmmFit", "compare_models", "fit_lmm", "format_comparison", "format_fit",
    "contrast", "marginal_prediction",
    "analysis_rows", "center_traits", "rows_from_csv", "TRAIT_COLUMNS",
]
