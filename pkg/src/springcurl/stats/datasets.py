"""Analysis datasets: per-shot rows joined with centered trait scores."""
from __future__ import annotations

import csv
import io
from typing import Sequence

from ..errors import InvalidInputError
from ..metrics import ShotRecord
from ..session_io import dataset_rows
from ..subjects import TraitProfile

TRAIT_COLUMNS = {
    "FS_c": "free_spirit",
    "CH_c": "challenge",
    "CU_c": "curiosity",
    "BO_c": "boredom",
    "AC_c": "achiever",
    "LOC_c": "locus_of_control",
}

_NUMERIC_CSV_COLUMNS = {
    "TrialNumber": int, "ShotNumber": int, "TransTask": int, "dirChanges": int,
    "absForceErr": float, "signedForceErr": float, "absElongErr": float,
    "pathLenMm": float, "logAbsForceErr": float, "logAbsElongErr": float,
    "releaseForceN": float, "releaseElongMm": float,
}


def center_traits(rows: list[dict]) -> list[dict]:
    """Center the trait covariates to dataset mean zero, in place."""
    if not rows:
        return rows
    for column in TRAIT_COLUMNS:
        if column not in rows[0]:
            continue
        mean = sum(r[column] for r in rows) / len(rows)
        for r in rows:
            r[column] = r[column] - mean
    return rows


def analysis_rows(records: Sequence[ShotRecord], kind: str,
                  traits_by_id: dict[str, TraitProfile]) -> list[dict]:
    """Dataset rows for one model family, with centered trait columns."""
    rows = dataset_rows(records, kind)
    for row in rows:
        pid = row["ID"]
        if pid not in traits_by_id:
            raise InvalidInputError(f"no trait profile for participant {pid!r}")
        traits = traits_by_id[pid]
        for column, attr in TRAIT_COLUMNS.items():
            row[column] = getattr(traits, attr)
    return center_traits(rows)


def rows_from_csv(text: str, traits_by_id: dict[str, TraitProfile] | None = None) -> list[dict]:
    """Parse an exported dataset CSV back into analysis rows."""
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for raw in reader:
        row: dict = dict(raw)
        for column, cast in _NUMERIC_CSV_COLUMNS.items():
            if column in row and row[column] != "":
                row[column] = cast(float(row[column]))
        rows.append(row)
    if traits_by_id is not None:
        for row in rows:
            traits = traits_by_id.get(row["ID"])
            if traits is None:
                raise InvalidInputError(f"no trait profile for participant {row['ID']!r}")
            for column, attr in TRAIT_COLUMNS.items():
                row[column] = getattr(traits, attr)
        center_traits(rows)
    return rows
