from dataclasses import dataclass

import numpy as np

from src.expfam.expfam import BERNOULLI, LOGNORMAL, NORMAL, POISSON, FamilyKind, categorical
from src.utils.errors import DataError, InvalidParameterError

KINDS = ("real", "positive_real", "count", "binary", "categorical")

POSITIVE_KINDS = (
    FamilyKind.LOGNORMAL,
    FamilyKind.GAMMA,
    FamilyKind.INVERSE_GAUSSIAN,
    FamilyKind.INVERSE_GAMMA,
    FamilyKind.EXPONENTIAL,
    FamilyKind.RAYLEIGH,
)


def split_kind(text):
    """'categorical(3)' -> ('categorical', 3); 'real' -> ('real', None)."""
    text = text.strip().lower()
    if text.startswith("categorical(") and text.endswith(")"):
        inside = text[len("categorical("):-1].strip()
        if not inside.isdigit():
            raise InvalidParameterError(f"categorical kind needs an integer K: {text!r}", field="kind")
        return "categorical", int(inside)
    if text not in KINDS:
        raise InvalidParameterError(f"unknown column kind {text!r}", field="kind")
    return text, None


def default_family(kind, k=None):
    if kind == "real":
        return NORMAL
    if kind == "positive_real":
        return LOGNORMAL
    if kind == "count":
        return POISSON
    if kind == "binary":
        return BERNOULLI
    return categorical(k)


def kind_accepts(kind, family):
    if kind == "real":
        return family.kind is FamilyKind.NORMAL
    if kind == "positive_real":
        return family.kind in POSITIVE_KINDS
    expected = {"count": FamilyKind.POISSON, "binary": FamilyKind.BERNOULLI, "categorical": FamilyKind.CATEGORICAL}
    return family.kind is expected[kind]


def kind_of_family(family):
    """Column kind that generated data from the family falls under."""
    kind = family.kind
    if kind is FamilyKind.NORMAL:
        return "real"
    if kind in POSITIVE_KINDS:
        return "positive_real"
    if kind is FamilyKind.POISSON:
        return "count"
    if kind is FamilyKind.BERNOULLI:
        return "binary"
    return "categorical"


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str
    family: object
    trick: object = None
    scaling_method: str = "none"
    omega: float = 1.0
    categories: tuple | None = None
    source: str | None = None

    @property
    def source_column(self):
        return self.source or self.name


@dataclass(frozen=True)
class Column:
    spec: ColumnSpec
    values: np.ndarray
    mask: np.ndarray

    @property
    def present(self):
        return self.values[self.mask]


@dataclass(frozen=True)
class DatasetFrame:
    columns: tuple
    n_rows: int

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        for column in self.columns:
            if len(column.values) != self.n_rows or len(column.mask) != self.n_rows:
                raise DataError(f"column length does not match {self.n_rows} rows", column=column.spec.name)

    @property
    def names(self):
        return [column.spec.name for column in self.columns]

    @property
    def specs(self):
        return [column.spec for column in self.columns]

    def column(self, name):
        for column in self.columns:
            if column.spec.name == name:
                return column
        raise DataError(f"no column named {name!r}", column=name)

    def with_columns(self, columns):
        return DatasetFrame(columns, self.n_rows)


def make_column(spec, values, mask=None):
    values = np.asarray(values, dtype=float)
    if mask is None:
        mask = ~np.isnan(values)
    mask = np.asarray(mask, dtype=bool)
    values = np.where(mask, values, np.nan)
    return Column(spec, values, mask)
