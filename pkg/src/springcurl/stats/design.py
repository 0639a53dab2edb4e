"""Fixed-effect design construction.

Models are lists of terms, each term a tuple of variable names whose
encoded columns are multiplied together. Categorical variables are
treatment-coded against declared reference levels (linear spring,
baseline stage); everything else enters numerically.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InvalidInputError, ModelSpecError

Term = tuple[str, ...]

CATEGORICAL_LEVELS = {
    "SpringType": ("LS", "GS", "AGS"),
    "Condition": ("LS", "GS", "AGS"),
    "Stage": ("BL", "STR", "LTR"),
}

# canonical within-term ordering (and table row ordering)
_VARIABLE_ORDER = (
    "SpringType", "Condition", "Stage", "TransTask", "TrialNumber",
    "ShotNumber", "FS_c", "CH_c", "CU_c", "BO_c", "AC_c", "LOC_c",
)


def _canonical(term: Sequence[str]) -> Term:
    def key(v):
        return _VARIABLE_ORDER.index(v) if v in _VARIABLE_ORDER else len(_VARIABLE_ORDER)
    return tuple(sorted(term, key=key))


def _dedupe(terms: list[Term]) -> list[Term]:
    seen = set()
    out = []
    for t in terms:
        t = _canonical(t)
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def interact(left: list[Term], right: list[Term]) -> list[Term]:
    """R-style ':' between two term lists."""
    return _dedupe([l + r for l in left for r in right])


def cross(left: list[Term], right: list[Term]) -> list[Term]:
    """R-style '*': main effects plus all interactions."""
    return _dedupe(list(left) + list(right) + interact(left, right))


def mains(*names: str) -> list[Term]:
    return [(n,) for n in names]


@dataclass(frozen=True)
class ModelSpec:
    """Fixed-effect terms plus the random-intercept grouping column."""

    terms: tuple[Term, ...]
    group: str = "ID"
    intercept: bool = True
    name: str = "model"

    @classmethod
    def build(cls, terms: list[Term], name: str = "model", group: str = "ID") -> "ModelSpec":
        return cls(terms=tuple(_dedupe(terms)), group=group, name=name)


def training_model(traits: Sequence[str] = ("FS_c",), name: str = "training") -> ModelSpec:
    """SpringType x TrialNumber x traits."""
    terms = cross(cross(mains("SpringType"), mains("TrialNumber")), mains(*traits))
    return ModelSpec.build(terms, name=name)


def behavior_model(traits: Sequence[str] = ("FS_c", "CH_c"), name: str = "behavior") -> ModelSpec:
    """(traits...) x (SpringType x TrialNumber)."""
    inner = cross(mains("SpringType"), mains("TrialNumber"))
    return ModelSpec.build(cross(mains(*traits), inner), name=name)


def learning_model(traits: Sequence[str] = ("FS_c", "CU_c"), name: str = "learning") -> ModelSpec:
    """(traits...) x (Condition x Stage + TrialNumber) + Stage x TrialNumber."""
    inner = cross(mains("Condition"), mains("Stage")) + mains("TrialNumber")
    terms = cross(mains(*traits), _dedupe(inner)) + cross(mains("Stage"), mains("TrialNumber"))
    return ModelSpec.build(terms, name=name)


def transfer_model(name: str = "transfer") -> ModelSpec:
    """TransTask x Stage x TrialNumber x ShotNumber (full factorial)."""
    terms = cross(cross(cross(mains("TransTask"), mains("Stage")),
                        mains("TrialNumber")), mains("ShotNumber"))
    return ModelSpec.build(terms, name=name)


MODEL_FAMILIES = {
    "training": training_model,
    "behavior": behavior_model,
    "learning": learning_model,
    "transfer": transfer_model,
}


def _encode_variable(var: str, rows: Sequence[dict]) -> list[tuple[str, np.ndarray]]:
    """Columns for one variable: dummies for categoricals, values otherwise."""
    if var in CATEGORICAL_LEVELS:
        levels = CATEGORICAL_LEVELS[var]
        values = [row[var] for row in rows]
        for v in values:
            if v not in levels:
                raise ModelSpecError(f"unknown {var} level {v!r}")
        return [
            (f"{var}[{lvl}]", np.array([1.0 if v == lvl else 0.0 for v in values]))
            for lvl in levels[1:]
        ]
    try:
        col = np.array([float(row[var]) for row in rows])
    except KeyError:
        raise ModelSpecError(f"variable {var!r} missing from the dataset")
    return [(var, col)]


def build_design(spec: ModelSpec, rows: Sequence[dict]) -> tuple[np.ndarray, list[str]]:
    """Design matrix and column names; raises on rank deficiency,
    naming the aliased columns."""
    if not rows:
        raise ModelSpecError("empty dataset")
    names: list[str] = []
    columns: list[np.ndarray] = []
    if spec.intercept:
        names.append("(Intercept)")
        columns.append(np.ones(len(rows)))
    for term in spec.terms:
        encoded = [_encode_variable(var, rows) for var in term]
        combos = [([], np.ones(len(rows)))]
        for var_cols in encoded:
            combos = [(labels + [label], col * values)
                      for labels, col in combos
                      for label, values in var_cols]
        for labels, col in combos:
            names.append(":".join(labels))
            columns.append(col)
    X = np.column_stack(columns)
    rank = np.linalg.matrix_rank(X)
    if rank < X.shape[1]:
        aliased = []
        prev_rank = 0
        for j in range(X.shape[1]):
            r = np.linalg.matrix_rank(X[:, : j + 1])
            if r == prev_rank:
                aliased.append(names[j])
            prev_rank = r
        raise ModelSpecError(f"rank-deficient design; aliased columns: {aliased}")
    return X, names


def encode_point(spec: ModelSpec, point: dict, names: Sequence[str]) -> np.ndarray:
    """Design row for one covariate point.

    Unspecified continuous covariates sit at 0 (their centered mean),
    unspecified categoricals at the reference level.
    """
    for var, value in point.items():
        if var in CATEGORICAL_LEVELS and value not in CATEGORICAL_LEVELS[var]:
            raise InvalidInputError(f"unknown {var} level {value!r}")
    row = dict(point)
    for term in spec.terms:
        for var in term:
            if var in row:
                continue
            row[var] = CATEGORICAL_LEVELS[var][0] if var in CATEGORICAL_LEVELS else 0.0
    X, built_names = build_design_single(spec, row)
    if list(built_names) != list(names):
        raise InvalidInputError("covariate point does not match the fitted design")
    return X


def build_design_single(spec: ModelSpec, row: dict) -> tuple[np.ndarray, list[str]]:
    names: list[str] = []
    values: list[float] = []
    if spec.intercept:
        names.append("(Intercept)")
        values.append(1.0)
    for term in spec.terms:
        combos = [([], 1.0)]
        for var in term:
            if var in CATEGORICAL_LEVELS:
                levels = CATEGORICAL_LEVELS[var]
                var_cols = [(f"{var}[{lvl}]", 1.0 if row[var] == lvl else 0.0)
                            for lvl in levels[1:]]
            else:
                var_cols = [(var, float(row[var]))]
            combos = [(labels + [label], val * v)
                      for labels, val in combos for label, v in var_cols]
        for labels, val in combos:
            names.append(":".join(labels))
            values.append(val)
    return np.array(values), names
