"""CSV ingestion driven by a dataset specification document.

A ``DatasetSpec`` declares everything needed to turn a raw CSV into a
modeling table: the target column, the positive-class value, which feature
columns use zero as a missing-value code, an optional label-recode map with
labels to drop, identifier columns to exclude, and per-column value recodes
for string-coded features.  Specs are JSON-serializable; three ready-made
specs cover the standard diabetes benchmarks.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from ._validation import InvalidInputError

__all__ = ["DatasetSpec", "DatasetTable", "load_dataset", "builtin_spec", "BUILTIN_SPECS"]


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    target_column: str
    positive_label: object = 1
    zero_coded_columns: tuple = ()
    label_recode: dict | None = None
    drop_labels: tuple = ()
    drop_columns: tuple = ()
    value_recode: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "zero_coded_columns", tuple(self.zero_coded_columns))
        object.__setattr__(self, "drop_labels", tuple(self.drop_labels))
        object.__setattr__(self, "drop_columns", tuple(self.drop_columns))
        if not self.target_column:
            raise InvalidInputError("dataset spec needs a target_column")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "target_column": self.target_column,
            "positive_label": self.positive_label,
            "zero_coded_columns": list(self.zero_coded_columns),
            "label_recode": self.label_recode,
            "drop_labels": list(self.drop_labels),
            "drop_columns": list(self.drop_columns),
            "value_recode": self.value_recode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSpec":
        try:
            return cls(
                name=d.get("name", "dataset"),
                target_column=d["target_column"],
                positive_label=d.get("positive_label", 1),
                zero_coded_columns=tuple(d.get("zero_coded_columns", ())),
                label_recode=d.get("label_recode"),
                drop_labels=tuple(d.get("drop_labels", ())),
                drop_columns=tuple(d.get("drop_columns", ())),
                value_recode=d.get("value_recode", {}),
            )
        except KeyError as exc:
            raise InvalidInputError(f"dataset spec missing field {exc}") from None

    @classmethod
    def from_json(cls, path) -> "DatasetSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class DatasetTable:
    name: str
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    spec: DatasetSpec

    @property
    def class_counts(self) -> dict:
        classes, counts = np.unique(self.labels, return_counts=True)
        return {c: int(k) for c, k in zip(classes.tolist(), counts.tolist())}


def _coerce_label(raw: str):
    try:
        f = float(raw)
    except ValueError:
        return raw
    if f == int(f):
        return int(f)
    return f


def load_dataset(path, spec: DatasetSpec) -> DatasetTable:
    """Read a header-rowed CSV into a DatasetTable as ``spec`` directs.

    Rows whose label is in ``drop_labels`` are removed; ``label_recode``
    maps the remaining labels (an unmapped label is an error).  Unparseable
    feature cells raise with 1-based row and column-name coordinates.
    """
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InvalidInputError(f"{path}: empty file") from None
        if spec.target_column not in header:
            raise InvalidInputError(
                f"{path}: target column {spec.target_column!r} not in header {header}"
            )
        target_idx = header.index(spec.target_column)
        dropped = set(spec.drop_columns) | {spec.target_column}
        unknown_drops = set(spec.drop_columns) - set(header)
        if unknown_drops:
            raise InvalidInputError(f"{path}: drop_columns not in header: {sorted(unknown_drops)}")
        feature_cols = [(i, name) for i, name in enumerate(header) if name not in dropped]
        recode = {str(k): v for k, v in (spec.label_recode or {}).items()}
        drop_labels = {str(v) for v in spec.drop_labels}

        rows = []
        labels = []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InvalidInputError(
                    f"{path}: row {row_no} has {len(row)} fields, header has {len(header)}"
                )
            raw_label = row[target_idx].strip()
            if raw_label in drop_labels:
                continue
            if recode:
                if raw_label not in recode:
                    raise InvalidInputError(
                        f"{path}: row {row_no}: unknown label {raw_label!r} "
                        f"(recode map covers {sorted(recode)})"
                    )
                labels.append(recode[raw_label])
            else:
                labels.append(_coerce_label(raw_label))
            values = []
            for col_idx, name in feature_cols:
                cell = row[col_idx].strip()
                recoded = spec.value_recode.get(name)
                if recoded is not None and cell in recoded:
                    values.append(float(recoded[cell]))
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise InvalidInputError(
                        f"{path}: row {row_no}, column {name!r}: cannot parse {cell!r}"
                    ) from None
            rows.append(values)

    if not rows:
        raise InvalidInputError(f"{path}: no data rows after filtering")
    features = np.asarray(rows, dtype=np.float64)
    labels_arr = np.asarray(labels)
    return DatasetTable(
        name=spec.name,
        features=features,
        labels=labels_arr,
        feature_names=tuple(name for _, name in feature_cols),
        spec=spec,
    )


def _pima_spec() -> DatasetSpec:
    return DatasetSpec(
        name="pima",
        target_column="Outcome",
        positive_label=1,
        zero_coded_columns=("Glucose", "BloodPressure", "SkinThickness", "Insulin", "BMI"),
    )


def _iraqi_spec() -> DatasetSpec:
    return DatasetSpec(
        name="iraqi",
        target_column="CLASS",
        positive_label=1,
        label_recode={"N": 0, "Y": 1},
        drop_labels=("P",),
        drop_columns=("ID", "No_Pation"),
        value_recode={"Gender": {"F": 0, "M": 1, "f": 0, "m": 1}},
    )


def _cdc_spec() -> DatasetSpec:
    return DatasetSpec(
        name="cdc",
        target_column="Diabetes_binary",
        positive_label=1,
    )


BUILTIN_SPECS = {
    "pima": _pima_spec,
    "iraqi": _iraqi_spec,
    "cdc": _cdc_spec,
}


def builtin_spec(name: str) -> DatasetSpec:
    try:
        return BUILTIN_SPECS[name.lower()]()
    except KeyError:
        raise InvalidInputError(
            f"unknown builtin dataset spec {name!r}; available: {sorted(BUILTIN_SPECS)}"
        ) from None
