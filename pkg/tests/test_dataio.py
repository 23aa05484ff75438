# tests/test_dataio.py
import json
from dataclasses import replace
import numpy as np
import pytest

from src.expfam.expfam import (
    BERNOULLI,
    EXPONENTIAL,
    GAMMA,
    INVERSE_GAMMA,
    INVERSE_GAUSSIAN,
    LOGNORMAL,
    NORMAL,
    POISSON,
    RAYLEIGH,
    CanonicalParams,
    fit_empirical,
    sample,
    to_natural,
    transform_data,
    unscale_natural,
)
from src.scaler.scaler import ScalingTarget, apply_plan, plan_dataset
from src.tricks.tricks import NoiseConfig, TrickRecord, expand_frame
from src.dataio.frame import ColumnSpec, DatasetFrame, make_column
from src.utils.errors import (
    DataError,
    DegenerateColumnError,
    InvalidCategoryError,
    InvalidCountError,
    MetadataMismatchError,
    ParseError,
    UsageError,
)


@pytest.fixture
def mod():
    import importlib
    return importlib.import_module("src.dataio.dataio")


def _write(path, text):
    path.write_text(text)
    return str(path)


def _metadata(mod):
    noise = NoiseConfig(seed=4)
    record = TrickRecord("c", "bernoulli_then_gamma", ("c#0", "c#1"), noise, mod.categorical(2), ("no", "yes"))
    columns = (
        mod.ColumnMetadata(
            name="x",
            source="x",
            kind="real",
            family=NORMAL,
            method="lip",
            omega=0.1 + 0.2,
            target=1 / 3,
            achieved={"per_param": [0.1, 0.2333333333333333], "total": 1 / 3},
            local={"per_param": [0.1, 0.2], "total": 0.30000000000000004},
        ),
        mod.ColumnMetadata("c#0", "c", "positive_real", GAMMA, "lip", 1.7320508075688772, categories=None),
        mod.ColumnMetadata("c#1", "c", "positive_real", GAMMA, "lip", 2.0 / 3.0, warnings=("closest omega",)),
    )
    target = ScalingTarget.from_learning_rate(1e-3, 2)
    return mod.ScalingMetadata(mod.METADATA_VERSION, target, "lip", "gamma", columns, (record,))


# ============================== BASIC BEHAVIOUR ==============================

@pytest.mark.parametrize(
    "tokens, kind",
    [
        (["1.5", "-2", "0"], "real"),
        (["0.5", "2", ""], "positive_real"),
        (["0", "3", "5"], "count"),
        (["0", "1", "", "1"], "binary"),
        (["a", "b", "a"], "categorical(2)"),
        (["1", "x", "2"], "categorical(3)"),
    ],
)
def test_infer_kind(mod, tokens, kind):
    assert mod.infer_kind(tokens) == kind


def test_sort_categories(mod):
    assert mod.sort_categories(["10", "9", "2", "9"]) == ("2", "9", "10")
    assert mod.sort_categories(["b", "a", "c"]) == ("a", "b", "c")


def test_read_csv_infers_and_marks_missing(mod, tmp_path):
    path = _write(tmp_path / "data.csv", "x,n,c,b\n1.5,0,red,1\n,3,blue,0\n-2.0,5,red,\n")
    frame = mod.read_csv(path)

    assert frame.n_rows == 3
    assert frame.names == ["x", "n", "c", "b"]
    x = frame.column("x")
    assert x.spec.family == NORMAL
    np.testing.assert_array_equal(x.mask, [True, False, True])
    assert np.isnan(x.values[1])

    assert frame.column("n").spec.family == POISSON
    c = frame.column("c")
    assert c.spec.categories == ("blue", "red")
    np.testing.assert_array_equal(c.values, [1, 0, 1])
    assert frame.column("b").spec.family == BERNOULLI


def test_read_csv_with_hints(mod, tmp_path):
    path = _write(tmp_path / "data.csv", "y,c\n1.5,lo\n2.5,hi\n4.0,lo\n")
    hints = {"y": {"kind": "positive_real", "family": "gamma"}, "c": {"kind": "categorical", "categories": ["lo", "mid", "hi"]}}
    frame = mod.read_csv(path, hints)

    assert frame.column("y").spec.family == GAMMA
    c = frame.column("c")
    assert c.spec.family == mod.categorical(3)
    np.testing.assert_array_equal(c.values, [0, 2, 0])


def test_read_csv_hints_file_and_delimiter(mod, tmp_path):
    path = _write(tmp_path / "data.tsv", "a\tb\n1\t2\n3\t4\n")
    hints = _write(tmp_path / "hints.json", json.dumps({"a": "real"}))
    frame = mod.read_csv(path, hints, delimiter="\t")
    assert frame.column("a").spec.kind == "real"
    assert frame.column("b").spec.kind == "positive_real"
    assert frame.column("b").spec.family == LOGNORMAL


def test_write_scaled_and_metadata_round_trip(mod, tmp_path):
    metadata = _metadata(mod)
    columns = [
        make_column(ColumnSpec("x", "real", NORMAL), [0.1, np.nan, 1 / 3]),
        make_column(ColumnSpec("n", "count", POISSON), [1, 2, 3]),
    ]
    frame = DatasetFrame(columns, 3)
    out = tmp_path / "out" / "scaled.csv"
    meta = tmp_path / "out" / "scaled.csv.meta.json"
    mod.write_scaled(frame, metadata, str(out), str(meta))

    rows = [line.split(",") for line in out.read_text().splitlines()]
    assert rows[0] == ["x", "n"]
    assert float(rows[1][0]) == 0.1 and rows[2][0] == "" and float(rows[3][0]) == 1 / 3
    assert [row[1] for row in rows[1:]] == ["1", "2", "3"]

    loaded = mod.read_metadata(str(meta))
    assert loaded == metadata
    assert loaded.column("x").omega == 0.1 + 0.2
    assert loaded.trick_for("c").categories == ("no", "yes")
    assert loaded.sources == ["x", "c"]


def test_metadata_ignores_unknown_keys(mod):
    payload = mod.metadata_to_dict(_metadata(mod))
    payload["producer"] = "someone else"
    payload["columns"][0]["notes"] = "extra"
    assert mod.metadata_from_dict(payload) == _metadata(mod)


def test_write_categorical_labels(mod, tmp_path):
    spec = ColumnSpec("c", "categorical", mod.categorical(2), categories=("no", "yes"))
    frame = DatasetFrame([make_column(spec, [1, np.nan, 0]), make_column(ColumnSpec("n", "count", POISSON), [4, 5, 6])], 3)
    out = tmp_path / "labels.csv"
    mod.write_frame(frame, str(out))
    assert out.read_text().splitlines() == ["c,n", "yes,4", ",5", "no,6"]


def test_recover_normal_example(mod):
    column = mod.ColumnMetadata("x", "x", "real", NORMAL, "lip", 2.0)
    metadata = mod.ScalingMetadata(mod.METADATA_VERSION, ScalingTarget(1.0), "lip", "none", (column,))
    learned = {"x": to_natural(NORMAL, CanonicalParams(NORMAL, (2.0, 4.0)))}

    recovered = mod.recover_parameters(metadata, learned)
    np.testing.assert_allclose(recovered["x"].values, (1.0, 1.0), rtol=1e-12)


def test_parameters_file_round_trip(mod, tmp_path):
    column = mod.ColumnMetadata("x", "x", "real", NORMAL, "lip", 2.0)
    metadata = mod.ScalingMetadata(mod.METADATA_VERSION, ScalingTarget(1.0), "lip", "none", (column,))
    path = _write(tmp_path / "learned.json", json.dumps({"columns": {"x": {"canonical": {"mu": 2.0, "sigma2": 4.0}}}}))
    params = mod.read_parameters(path, metadata)
    assert params["x"] == to_natural(NORMAL, CanonicalParams(NORMAL, (2.0, 4.0)))

    out = tmp_path / "recovered.json"
    mod.write_parameters(mod.recover_parameters(metadata, params), str(out))
    written = json.loads(out.read_text())["columns"]["x"]
    assert written["family"] == "normal"
    assert written["canonical"]["mu"] == pytest.approx(1.0)


@pytest.mark.parametrize(
    "family, canon",
    [
        (NORMAL, (1.5, 2.0)),
        (LOGNORMAL, (0.3, 0.5)),
        (GAMMA, (3.0, 2.0)),
        (INVERSE_GAUSSIAN, (1.0, 2.0)),
        (INVERSE_GAMMA, (5.0, 3.0)),
        (EXPONENTIAL, (0.7,)),
        (RAYLEIGH, (1.3,)),
    ],
)
def test_fit_on_scaled_data_unscales_to_direct_fit(mod, family, canon):
    rng = np.random.default_rng(11)
    data = sample(family, CanonicalParams(family, canon), 2000, rng)
    omega = 0.37
    direct = to_natural(family, fit_empirical(family, data))
    scaled = to_natural(family, fit_empirical(family, transform_data(family, data, omega)))
    np.testing.assert_allclose(unscale_natural(family, scaled, omega).values, direct.values, rtol=1e-8, atol=1e-10)


def test_recover_bernoulli_after_gamma_trick(mod):
    rng = np.random.default_rng(12)
    flips = rng.binomial(1, 0.3, 5000).astype(float)
    frame = DatasetFrame([make_column(ColumnSpec("b", "binary", BERNOULLI), flips)], 5000)
    expanded, records = expand_frame(frame, "gamma", NoiseConfig(seed=0))
    target = ScalingTarget.from_learning_rate(1e-3, 1)
    specs = [replace(spec, scaling_method="lip") for spec in expanded.specs]
    plans = plan_dataset(specs, expanded, target)
    scaled = apply_plan(expanded, plans)
    metadata = mod.build_metadata(scaled, plans, records, target, "lip", "gamma")

    column = scaled.column("b")
    learned = {"b": to_natural(GAMMA, fit_empirical(GAMMA, column.values, column.mask))}
    recovered = mod.recover_parameters(metadata, learned)
    assert recovered["b"].family == BERNOULLI
    assert recovered["b"].values[0] == pytest.approx(flips.mean(), abs=0.01)


def test_recover_categorical_after_bernoulli_then_gamma(mod):
    metadata = _metadata(mod)
    learned = {
        "x": to_natural(NORMAL, CanonicalParams(NORMAL, (0.0, 1.0))),
        "c#0": to_natural(GAMMA, CanonicalParams(GAMMA, (2.0, 2.0 / ((0.25 + 1.1 / 31.1) * 1.7320508075688772)))),
        "c#1": to_natural(GAMMA, CanonicalParams(GAMMA, (2.0, 2.0 / ((0.75 + 1.1 / 31.1) * (2.0 / 3.0))))),
    }
    recovered = mod.recover_parameters(metadata, learned)
    np.testing.assert_allclose(recovered["c"].values, (0.25, 0.75), rtol=1e-9)
    assert recovered["c"].family == mod.categorical(2)


# ============================== EDGE CASES ==============================

def test_unparseable_number_names_row_and_column(mod, tmp_path):
    path = _write(tmp_path / "data.csv", "x\n1.0\nabc\n")
    with pytest.raises(ParseError) as info:
        mod.read_csv(path, {"x": "real"})
    assert info.value.row == 2
    assert info.value.column == "x"


def test_ragged_row_is_a_parse_error(mod, tmp_path):
    path = _write(tmp_path / "data.csv", "a,b\n1,2\n3\n4,5\n")
    with pytest.raises(ParseError) as info:
        mod.read_csv(path)
    assert info.value.row == 2
    assert info.value.column == "b"


def test_empty_last_field_is_missing_not_ragged(mod, tmp_path):
    path = _write(tmp_path / "data.csv", "a,b\n1,2\n3,\n4,5\n")
    frame = mod.read_csv(path)
    assert list(frame.column("b").mask) == [True, False, True]


def test_row_with_extra_fields(mod, tmp_path):
    path = _write(tmp_path / "data.csv", "a,b\n1,2\n3,4,5\n")
    with pytest.raises(ParseError):
        mod.read_csv(path)


def test_non_utf8_input(mod, tmp_path):
    path = tmp_path / "latin1.csv"
    path.write_bytes("a,b\n1,café\n".encode("latin-1"))
    with pytest.raises(ParseError):
        mod.read_csv(str(path))


def test_delimiter_must_be_one_character(mod, tmp_path):
    path = _write(tmp_path / "data.csv", "a,b\n1,2\n3,4\n")
    with pytest.raises(UsageError):
        mod.read_csv(path, delimiter=";;")


def test_malformed_categorical_hint(mod, tmp_path):
    path = _write(tmp_path / "data.csv", "c,x\na,1\nb,2\n")
    with pytest.raises(ParseError) as info:
        mod.read_csv(path, {"c": "categorical(x)"})
    assert info.value.column == "c"


def test_hint_for_missing_column(mod, tmp_path):
    path = _write(tmp_path / "data.csv", "x\n1.0\n2.0\n")
    with pytest.raises(ParseError):
        mod.read_csv(path, {"y": "real"})


def test_undeclared_category(mod, tmp_path):
    path = _write(tmp_path / "data.csv", "c\na\nb\nz\n")
    with pytest.raises(InvalidCategoryError):
        mod.read_csv(path, {"c": {"kind": "categorical", "categories": ["a", "b"]}})


def test_bad_count_and_binary(mod):
    with pytest.raises(InvalidCountError):
        mod.parse_column("n", ["1", "2.5"], "count")
    with pytest.raises(InvalidCategoryError):
        mod.parse_column("b", ["0", "2"], "binary")


def test_hint_family_must_fit_kind(mod):
    with pytest.raises(ParseError):
        mod.parse_column("x", ["1", "2"], {"kind": "real", "family": "gamma"})


def test_empty_column(mod):
    with pytest.raises(DegenerateColumnError):
        mod.parse_column("x", ["", " "])


def test_missing_input_file(mod, tmp_path):
    with pytest.raises(DataError):
        mod.read_csv(str(tmp_path / "nope.csv"))


def test_unsupported_metadata_version(mod):
    payload = mod.metadata_to_dict(_metadata(mod))
    payload["version"] = "2"
    with pytest.raises(MetadataMismatchError):
        mod.metadata_from_dict(payload)


def test_metadata_missing_field(mod):
    payload = mod.metadata_to_dict(_metadata(mod))
    del payload["columns"][0]["omega"]
    with pytest.raises(MetadataMismatchError):
        mod.metadata_from_dict(payload)


def test_metadata_with_unreadable_values(mod):
    payload = mod.metadata_to_dict(_metadata(mod))
    payload["columns"][0]["family"] = "categorical(x)"
    with pytest.raises(MetadataMismatchError):
        mod.metadata_from_dict(payload)
    payload = mod.metadata_to_dict(_metadata(mod))
    payload["columns"][0]["omega"] = "wide"
    with pytest.raises(MetadataMismatchError):
        mod.metadata_from_dict(payload)


def test_recover_needs_every_column(mod):
    with pytest.raises(MetadataMismatchError) as info:
        mod.recover_parameters(_metadata(mod), {"x": to_natural(NORMAL, CanonicalParams(NORMAL, (0.0, 1.0)))})
    assert info.value.column == "c#0"


def test_recover_rejects_family_mismatch(mod):
    column = mod.ColumnMetadata("x", "x", "real", NORMAL, "lip", 2.0)
    metadata = mod.ScalingMetadata(mod.METADATA_VERSION, ScalingTarget(1.0), "lip", "none", (column,))
    with pytest.raises(MetadataMismatchError):
        mod.recover_parameters(metadata, {"x": to_natural(EXPONENTIAL, CanonicalParams(EXPONENTIAL, (1.0,)))})
