import os
import csv
import json
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from src.dataio.frame import (
    ColumnSpec,
    DatasetFrame,
    default_family,
    kind_accepts,
    make_column,
    split_kind,
)
from src.expfam.expfam import (
    BERNOULLI,
    GAMMA,
    CanonicalParams,
    Family,
    FamilyKind,
    NaturalParams,
    categorical,
    from_natural,
    to_natural,
    unscale_natural,
)
from src.scaler.scaler import ScalingTarget
from src.tricks.tricks import (
    DEFAULT_DELTA,
    NoiseConfig,
    TrickRecord,
    recover_bernoulli,
    recover_categorical,
    recover_poisson,
)
from src.utils.errors import (
    DataError,
    DegenerateColumnError,
    InvalidCategoryError,
    InvalidCountError,
    LipstdError,
    MetadataMismatchError,
    ParseError,
    UsageError,
)

logger = logging.getLogger(__name__)

METADATA_VERSION = "1"
FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class ColumnMetadata:
    name: str
    source: str
    kind: str
    family: Family
    method: str
    omega: float
    target: float | None = None
    achieved: dict | None = None
    local: dict | None = None
    categories: tuple | None = None
    warnings: tuple = ()


@dataclass(frozen=True)
class ScalingMetadata:
    version: str
    target: ScalingTarget
    method: str
    trick: str
    columns: tuple
    tricks: tuple = field(default_factory=tuple)

    def column(self, name):
        for column in self.columns:
            if column.name == name:
                return column
        raise MetadataMismatchError(f"no column {name!r} in the metadata", column=name)

    def trick_for(self, source):
        for record in self.tricks:
            if record.source_column == source:
                return record
        return None

    @property
    def sources(self):
        seen = []
        for column in self.columns:
            if column.source not in seen:
                seen.append(column.source)
        return seen


################################################ reading ################################################

def _numeric(tokens):
    """Tokens as floats; NaN where a token is not a finite number."""
    values = pd.to_numeric(pd.Series(tokens, dtype=object), errors="coerce").to_numpy(dtype=float)
    values[~np.isfinite(values)] = np.nan
    return values


def infer_kind(values):
    present = [token.strip() for token in values if token.strip() != ""]
    if not present:
        raise DegenerateColumnError("column has no present values", statistic=0)

    numbers = _numeric(present)
    if np.any(np.isnan(numbers)):
        return f"categorical({len(set(present))})"

    distinct = np.unique(numbers)
    if set(distinct) <= {0.0, 1.0}:
        return "binary"
    if np.all(distinct >= 0) and np.all(np.floor(distinct) == distinct) and len(distinct) > 2:
        return "count"
    if np.all(distinct > 0):
        return "positive_real"
    return "real"


def sort_categories(tokens):
    """Ascending order; numeric order when every token is a number."""
    distinct = sorted(set(tokens))
    numbers = _numeric(distinct)
    if not np.any(np.isnan(numbers)):
        return tuple(token for _, token in sorted(zip(numbers, distinct)))
    return tuple(distinct)


def read_hints(path):
    try:
        with open(path, "r") as file:
            return json.load(file)
    except OSError as e:
        raise DataError(f"cannot read hints file {path}: {e}")
    except json.JSONDecodeError as e:
        raise ParseError(f"hints file {path} is not valid JSON: {e}")


def _normalize_hint(name, hint):
    """A hint as (kind, family or None, categories or None)."""
    if isinstance(hint, str):
        hint = {"kind": hint}
    if not isinstance(hint, dict) or "kind" not in hint:
        raise ParseError(f"hint must be a kind string or an object with 'kind', got {hint!r}", column=name)

    try:
        kind, _ = split_kind(hint["kind"])
        family = Family.parse(hint["family"]) if hint.get("family") else None
    except LipstdError as e:
        raise ParseError(str(e), column=name)

    categories = hint.get("categories")
    if categories is not None:
        if kind != "categorical":
            raise ParseError("categories are only allowed on categorical columns", column=name)
        categories = tuple(str(category) for category in categories)
    if family is not None and not kind_accepts(kind, family):
        raise ParseError(f"family {family} does not fit kind {kind}", column=name)
    return kind, family, categories


def _first_bad_row(tokens, bad):
    return int(np.flatnonzero(bad)[0]) + 1, tokens[int(np.flatnonzero(bad)[0])]


def parse_column(name, tokens, hint=None):
    tokens = [token.strip() for token in tokens]
    mask = np.array([token != "" for token in tokens], dtype=bool)

    if hint is not None:
        kind, family, categories = _normalize_hint(name, hint)
    else:
        kind, _ = split_kind(infer_kind(tokens))
        family, categories = None, None

    present_tokens = [token for token in tokens if token != ""]
    if not present_tokens:
        raise DegenerateColumnError("column has no present values", statistic=0, column=name)

    if kind == "categorical":
        if categories is None:
            categories = sort_categories(present_tokens)
        lookup = {token: code for code, token in enumerate(categories)}
        unknown = np.array([token != "" and token not in lookup for token in tokens])
        if np.any(unknown):
            row, token = _first_bad_row(tokens, unknown)
            raise InvalidCategoryError(f"row {row}: {token!r} is not one of the declared categories", column=name)
        if len(categories) < 2:
            raise DegenerateColumnError("categorical column has a single category", statistic=1, column=name)
        values = np.array([lookup.get(token, np.nan) for token in tokens], dtype=float)
        family = categorical(len(categories))
    else:
        values = _numeric(tokens)
        unparseable = mask & np.isnan(values)
        if np.any(unparseable):
            row, token = _first_bad_row(tokens, unparseable)
            raise ParseError(f"cannot read {token!r} as a number", row=row, column=name)
        if kind == "binary":
            bad = mask & ~np.isin(values, (0.0, 1.0))
            if np.any(bad):
                row, token = _first_bad_row(tokens, bad)
                raise InvalidCategoryError(f"row {row}: binary value must be 0 or 1, got {token!r}", column=name)
        if kind == "count":
            bad = mask & ((values < 0) | (np.floor(values) != values))
            if np.any(bad):
                row, token = _first_bad_row(tokens, bad)
                raise InvalidCountError(f"row {row}: count must be a non-negative integer, got {token!r}", column=name)
        family = family or default_family(kind)

    spec = ColumnSpec(name=name, kind=kind, family=family, categories=categories)
    return make_column(spec, values, mask)


def _check_row_widths(path, delimiter, header):
    with open(path, "r", newline="", encoding="utf-8") as file:
        records = (fields for fields in csv.reader(file, delimiter=delimiter) if fields)
        next(records, None)
        for row, fields in enumerate(records, start=1):
            if len(fields) < len(header):
                raise ParseError(
                    f"row has {len(fields)} fields, the header has {len(header)}", row=row, column=header[len(fields)]
                )
            if len(fields) > len(header):
                raise ParseError(f"row has {len(fields)} fields, the header has {len(header)}", row=row)


def read_csv(path, type_hints=None, delimiter=","):
    """Read a delimited file with a header row; empty cells are missing values.

    Every row must carry as many fields as the header.
    """
    if len(delimiter) != 1:
        raise UsageError(f"delimiter must be a single character, got {delimiter!r}")
    try:
        raw = pd.read_csv(path, sep=delimiter, dtype=str, keep_default_na=False, na_filter=False)
    except FileNotFoundError:
        raise DataError(f"input file not found: {path}")
    except pd.errors.EmptyDataError:
        raise ParseError(f"{path} has no header row")
    except pd.errors.ParserError as e:
        raise ParseError(f"{path}: {e}")
    except UnicodeDecodeError as e:
        raise ParseError(f"{path} is not UTF-8 text: {e}")

    # pandas pads short rows with "", which would read as missing cells
    _check_row_widths(path, delimiter, list(raw.columns))

    if isinstance(type_hints, (str, os.PathLike)):
        type_hints = read_hints(type_hints)
    type_hints = type_hints or {}
    for name in type_hints:
        if name not in raw.columns:
            raise ParseError("hints name a column that is not in the file", column=name)

    columns = [parse_column(name, raw[name].tolist(), type_hints.get(name)) for name in raw.columns]
    frame = DatasetFrame(columns, len(raw))
    logger.info(f"Read {len(raw)} rows and {len(columns)} columns from {path}")
    return frame


################################################ writing ################################################

def format_column(column):
    spec = column.spec
    if spec.family.kind is FamilyKind.CATEGORICAL and spec.categories is not None:
        return [spec.categories[int(value)] if present else "" for value, present in zip(column.values, column.mask)]
    return [FLOAT_FORMAT % value if present else "" for value, present in zip(column.values, column.mask)]


def write_frame(frame, path, delimiter=","):
    table = pd.DataFrame({column.spec.name: format_column(column) for column in frame.columns})
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        table.to_csv(path, sep=delimiter, index=False)
    except OSError as e:
        raise DataError(f"cannot write {path}: {e}")


def write_scaled(frame, metadata, out_data_path, out_meta_path, delimiter=","):
    write_frame(frame, out_data_path, delimiter)
    write_metadata(metadata, out_meta_path)
    logger.info(f"Wrote {len(frame.columns)} scaled columns to {out_data_path} and metadata to {out_meta_path}")


################################################ metadata ################################################

def _smoothness_dict(estimate):
    if estimate is None:
        return None
    return {"per_param": list(estimate.per_param), "total": estimate.total}


def build_metadata(frame, plans, records, target, method, trick):
    by_name = {plan.name: plan for plan in plans}
    columns = []
    for column in frame.columns:
        spec = column.spec
        plan = by_name[spec.name]
        result = plan.result
        columns.append(
            ColumnMetadata(
                name=spec.name,
                source=spec.source_column,
                kind=spec.kind,
                family=spec.family,
                method=plan.scaling_method,
                omega=plan.omega,
                target=result.target if result else None,
                achieved=_smoothness_dict(result.achieved) if result else None,
                local=_smoothness_dict(result.local) if result else None,
                categories=spec.categories,
                warnings=tuple(plan.warnings),
            )
        )
    return ScalingMetadata(METADATA_VERSION, target, method, trick, tuple(columns), tuple(records))


def _record_to_dict(record):
    return {
        "source_column": record.source_column,
        "trick": record.trick,
        "group": list(record.group),
        "original_family": str(record.original_family),
        "categories": list(record.categories) if record.categories is not None else None,
        "noise": {"beta_a": record.noise.beta_a, "beta_b": record.noise.beta_b, "seed": record.noise.seed},
    }


def metadata_to_dict(metadata):
    return {
        "version": metadata.version,
        "target": {
            "l_star": metadata.target.l_star,
            "alpha": metadata.target.alpha,
            "d_dims": metadata.target.d_dims,
        },
        "method": metadata.method,
        "trick": metadata.trick,
        "columns": [
            {
                "name": column.name,
                "source": column.source,
                "kind": column.kind,
                "family": str(column.family),
                "method": column.method,
                "omega": column.omega,
                "target": column.target,
                "achieved": column.achieved,
                "local": column.local,
                "categories": list(column.categories) if column.categories is not None else None,
                "warnings": list(column.warnings),
            }
            for column in metadata.columns
        ],
        "tricks": [_record_to_dict(record) for record in metadata.tricks],
    }


def metadata_from_dict(payload):
    version = str(payload.get("version", ""))
    if version.split(".")[0] != METADATA_VERSION:
        raise MetadataMismatchError(f"unsupported metadata version {version!r}")

    try:
        target_payload = payload["target"]
        target = ScalingTarget(target_payload["l_star"], target_payload.get("alpha"), target_payload.get("d_dims"))
        columns = tuple(
            ColumnMetadata(
                name=entry["name"],
                source=entry.get("source") or entry["name"],
                kind=entry["kind"],
                family=Family.parse(entry["family"]),
                method=entry.get("method", "none"),
                omega=float(entry["omega"]),
                target=entry.get("target"),
                achieved=entry.get("achieved"),
                local=entry.get("local"),
                categories=tuple(entry["categories"]) if entry.get("categories") is not None else None,
                warnings=tuple(entry.get("warnings", ())),
            )
            for entry in payload["columns"]
        )
        tricks = tuple(
            TrickRecord(
                source_column=entry["source_column"],
                trick=entry["trick"],
                group=tuple(entry["group"]),
                noise=NoiseConfig(**entry["noise"]),
                original_family=Family.parse(entry["original_family"]),
                categories=tuple(entry["categories"]) if entry.get("categories") is not None else None,
            )
            for entry in payload.get("tricks", ())
        )
    except (KeyError, TypeError) as e:
        raise MetadataMismatchError(f"metadata is missing a required field: {e}")
    except ValueError as e:
        raise MetadataMismatchError(f"metadata holds an unreadable value: {e}")
    return ScalingMetadata(version, target, payload.get("method", "none"), payload.get("trick", "none"), columns, tricks)


def write_metadata(metadata, path):
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as file:
            json.dump(metadata_to_dict(metadata), file, indent=2)
    except OSError as e:
        raise DataError(f"cannot write {path}: {e}")


def read_metadata(path):
    try:
        with open(path, "r") as file:
            payload = json.load(file)
    except OSError as e:
        raise DataError(f"cannot read metadata {path}: {e}")
    except json.JSONDecodeError as e:
        raise ParseError(f"metadata {path} is not valid JSON: {e}")
    return metadata_from_dict(payload)


################################################ parameters ################################################

def write_parameters(params, path):
    """Write natural or canonical parameters keyed by column name."""
    columns = {}
    for name, value in params.items():
        entry = {"family": str(value.family)}
        if isinstance(value, NaturalParams):
            entry["natural"] = list(value.values)
        else:
            entry["canonical"] = value.as_dict()
        columns[name] = entry
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as file:
            json.dump({"version": METADATA_VERSION, "columns": columns}, file, indent=2)
    except OSError as e:
        raise DataError(f"cannot write {path}: {e}")


def read_parameters(path, metadata=None):
    """Learned scaled-space parameters as NaturalParams keyed by column name.

    An entry's family defaults to the metadata's family for that column.
    """
    try:
        with open(path, "r") as file:
            payload = json.load(file)
    except OSError as e:
        raise DataError(f"cannot read parameters {path}: {e}")
    except json.JSONDecodeError as e:
        raise ParseError(f"parameters {path} are not valid JSON: {e}")

    params = {}
    for name, entry in payload.get("columns", {}).items():
        if entry.get("family"):
            try:
                family = Family.parse(entry["family"])
            except LipstdError as e:
                raise ParseError(str(e), column=name)
        elif metadata is not None:
            family = metadata.column(name).family
        else:
            raise MetadataMismatchError("parameter entry has no family", column=name)

        if "natural" in entry:
            params[name] = NaturalParams(family, entry["natural"])
        elif "canonical" in entry:
            canonical = entry["canonical"]
            values = [canonical[param] for param in family.param_names] if isinstance(canonical, dict) else canonical
            params[name] = to_natural(family, CanonicalParams(family, values))
        else:
            raise MetadataMismatchError("parameter entry needs 'natural' or 'canonical' values", column=name)
    return params


def _unscaled(column, scaled_params):
    if column.name not in scaled_params:
        raise MetadataMismatchError("no learned parameters for this column", column=column.name)
    nat = scaled_params[column.name]
    if nat.family != column.family:
        raise MetadataMismatchError(
            f"learned parameters are for {nat.family}, metadata says {column.family}", column=column.name
        )
    if column.family.is_continuous:
        return unscale_natural(column.family, nat, column.omega)
    return nat


def recover_parameters(metadata, scaled_params, delta=DEFAULT_DELTA):
    """Original-space parameters for every source column, discrete families restored."""
    recovered = {}
    for source in metadata.sources:
        columns = [column for column in metadata.columns if column.source == source]
        record = metadata.trick_for(source)
        try:
            natural = [_unscaled(column, scaled_params) for column in columns]
            if record is None:
                recovered[source] = from_natural(columns[0].family, natural[0])
            elif record.trick == "gamma":
                gamma = from_natural(GAMMA, natural[0])
                if record.original_family.kind is FamilyKind.BERNOULLI:
                    recovered[source] = CanonicalParams(BERNOULLI, (recover_bernoulli(gamma, record.noise),))
                else:
                    recovered[source] = CanonicalParams(
                        record.original_family, (recover_poisson(gamma, record.noise, delta),)
                    )
            else:
                if record.trick == "bernoulli_then_gamma":
                    means = [recover_bernoulli(from_natural(GAMMA, nat), record.noise) for nat in natural]
                else:
                    means = [from_natural(BERNOULLI, nat).values[0] for nat in natural]
                pi, degenerate = recover_categorical(means)
                if degenerate:
                    logger.warning(f"column '{source}': class means were all zero, using uniform probabilities")
                recovered[source] = CanonicalParams(record.original_family, pi)
        except LipstdError as error:
            raise error.with_column(source)

    logger.info(f"Recovered parameters for {len(recovered)} columns")
    return recovered
