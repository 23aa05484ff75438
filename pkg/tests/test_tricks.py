# tests/test_tricks.py
import numpy as np
import pytest

from src.dataio.frame import ColumnSpec, DatasetFrame, make_column
from src.expfam.expfam import BERNOULLI, GAMMA, NORMAL, POISSON, CanonicalParams, categorical
from src.utils.errors import InvalidCategoryError, InvalidCountError, InvalidParameterError, UsageError


@pytest.fixture
def mod():
    import importlib
    return importlib.import_module("src.tricks.tricks")


def _gamma(alpha, beta):
    return CanonicalParams(GAMMA, (alpha, beta))


# ============================== BASIC BEHAVIOUR ==============================

def test_noise_expectation(mod):
    noise = mod.NoiseConfig()
    assert noise.expected == pytest.approx(1.1 / 31.1, rel=1e-15)


def test_beta_noise_stays_inside_unit_interval(mod):
    draws = mod.beta_noise(mod.NoiseConfig(seed=3), 50_000)
    assert np.all((draws > 0) & (draws < 1))
    assert draws.mean() == pytest.approx(1.1 / 31.1, abs=1e-3)


def test_bernoulli_trick_examples(mod):
    expanded = mod.apply_bernoulli_trick([0, 2, 1], 3)
    np.testing.assert_array_equal(expanded.T, [[1, 0, 0], [0, 0, 1], [0, 1, 0]])

    expanded = mod.apply_bernoulli_trick([1, np.nan, 0], 2)
    np.testing.assert_array_equal(expanded.T[0], [0, 1])
    assert np.all(np.isnan(expanded.T[1]))
    np.testing.assert_array_equal(expanded.T[2], [1, 0])


def test_gamma_trick_adds_noise_below_one(mod):
    noised, _ = mod.apply_gamma_trick([0.0, 0.0, 0.0], mod.NoiseConfig(seed=0))
    assert np.all((noised > 0) & (noised < 1))

    counts = np.array([0, 3, 1, 7, 2, np.nan])
    noised, _ = mod.apply_gamma_trick(counts, mod.NoiseConfig(seed=1))
    np.testing.assert_array_equal(np.floor(noised[:5]), counts[:5])
    assert np.isnan(noised[5])


def test_gamma_trick_mean_on_constant_column(mod):
    noised, params = mod.apply_gamma_trick(np.full(10_000, 5.0), mod.NoiseConfig(seed=2))
    assert noised.mean() == pytest.approx(5 + 1.1 / 31.1, abs=0.01)
    assert mod.gamma_mean(params) == pytest.approx(noised.mean(), rel=1e-10)


def test_gamma_trick_shape_above_one_for_shifted_counts(mod):
    rng = np.random.default_rng(4)
    counts = rng.poisson(5.0, 5000) + 1.0
    _, params = mod.apply_gamma_trick(counts, mod.NoiseConfig(seed=4))
    assert params.values[0] > 1.0


def test_gamma_trick_is_deterministic(mod):
    counts = np.arange(20, dtype=float)
    first, _ = mod.apply_gamma_trick(counts, mod.NoiseConfig(seed=9))
    second, _ = mod.apply_gamma_trick(counts, mod.NoiseConfig(seed=9))
    np.testing.assert_array_equal(first, second)
    third, _ = mod.apply_gamma_trick(counts, mod.NoiseConfig(seed=10))
    assert not np.array_equal(first, third)


def test_recovery_examples(mod):
    noise = mod.NoiseConfig()
    expected = 1.1 / 31.1
    assert mod.recover_bernoulli(_gamma(2.0, 2.0 / (0.3 + expected)), noise) == pytest.approx(0.3, abs=1e-12)
    assert mod.recover_poisson(_gamma(4.0, 4.0 / (3.0 + expected)), noise) == pytest.approx(3.0, abs=1e-12)


def test_recovery_clamps(mod):
    noise = mod.NoiseConfig()
    assert mod.recover_bernoulli(_gamma(1.0, 100.0), noise) == 0.0
    assert mod.recover_bernoulli(_gamma(3.0, 1.0), noise) == 1.0
    assert mod.recover_poisson(_gamma(1.0, 100.0), noise) == mod.DEFAULT_DELTA
    assert mod.recover_poisson(_gamma(1.0, 100.0), noise, delta=0.01) == 0.01


def test_recover_categorical(mod):
    probabilities, uniform = mod.recover_categorical([1.0, 3.0])
    np.testing.assert_allclose(probabilities, [0.25, 0.75])
    assert not uniform

    probabilities, uniform = mod.recover_categorical([0.0, 0.0, 0.0])
    np.testing.assert_allclose(probabilities, [1 / 3, 1 / 3, 1 / 3])
    assert uniform


def test_end_to_end_recovery_errors(mod):
    assert mod.end_to_end_recovery_error("bernoulli", mod.bernoulli_grid(), 10_000, 0) <= 0.02
    for grid in mod.poisson_grids():
        assert mod.end_to_end_recovery_error("poisson", grid, 10_000, 0) <= 0.15


def test_grids(mod):
    assert len(mod.bernoulli_grid()) == 51
    assert mod.bernoulli_grid()[-1] == 1.0
    coarse, fine = mod.poisson_grids()
    assert coarse[-1] == 50.0 and fine[-1] == 1.0


def test_expand_frame_names_and_records(mod):
    columns = [
        make_column(ColumnSpec("x", "real", NORMAL), [0.5, 1.5, -2.0, 3.0]),
        make_column(ColumnSpec("n", "count", POISSON), [0, 2, 1, 4]),
        make_column(ColumnSpec("c", "categorical", categorical(3), categories=("a", "b", "c")), [0, 2, 1, 2]),
    ]
    frame = DatasetFrame(columns, 4)
    expanded, records = mod.expand_frame(frame, "gamma", mod.NoiseConfig(seed=0))

    assert expanded.names == ["x", "n", "c#0", "c#1", "c#2"]
    assert [spec.source_column for spec in expanded.specs] == ["x", "n", "c", "c", "c"]
    assert expanded.column("x").spec.trick is None
    assert [record.trick for record in records] == ["gamma", "bernoulli_then_gamma"]
    assert records[1].group == ("c#0", "c#1", "c#2")
    assert records[1].categories == ("a", "b", "c")
    for name in ("n", "c#0", "c#1", "c#2"):
        assert expanded.column(name).spec.family == GAMMA
    np.testing.assert_array_equal(np.floor(expanded.column("c#2").values), [0, 1, 0, 1])


def test_expand_frame_bern_only_touches_categoricals(mod):
    columns = [
        make_column(ColumnSpec("n", "count", POISSON), [0, 2, 1]),
        make_column(ColumnSpec("c", "categorical", categorical(2)), [1, 0, 1]),
    ]
    expanded, records = mod.expand_frame(DatasetFrame(columns, 3), "bern", mod.NoiseConfig())
    assert expanded.names == ["n", "c#0", "c#1"]
    assert expanded.column("c#0").spec.family == BERNOULLI
    np.testing.assert_array_equal(expanded.column("c#1").values, [1, 0, 1])
    assert records[0].trick == "bernoulli"


def test_expand_frame_is_deterministic(mod):
    columns = [make_column(ColumnSpec("n", "count", POISSON), np.arange(30.0))]
    frame = DatasetFrame(columns, 30)
    first, _ = mod.expand_frame(frame, "gamma", mod.NoiseConfig(seed=5))
    second, _ = mod.expand_frame(frame, "gamma", mod.NoiseConfig(seed=5))
    np.testing.assert_array_equal(first.column("n").values, second.column("n").values)


# ============================== EDGE CASES ==============================

def test_bernoulli_trick_rejects_out_of_range_category(mod):
    with pytest.raises(InvalidCategoryError):
        mod.apply_bernoulli_trick([0, 7], 4)
    with pytest.raises(InvalidCategoryError):
        mod.apply_bernoulli_trick([0.5], 4)


def test_gamma_trick_rejects_bad_counts(mod):
    with pytest.raises(InvalidCountError):
        mod.apply_gamma_trick([1.0, -2.0], mod.NoiseConfig())
    with pytest.raises(InvalidCountError):
        mod.apply_gamma_trick([1.5, 2.0], mod.NoiseConfig())


def test_expand_frame_attaches_column_name(mod):
    columns = [make_column(ColumnSpec("bad", "count", POISSON), [1.0, -1.0, 2.0])]
    with pytest.raises(InvalidCountError) as info:
        mod.expand_frame(DatasetFrame(columns, 3), "gamma", mod.NoiseConfig())
    assert info.value.column == "bad"


def test_unknown_trick(mod):
    frame = DatasetFrame([make_column(ColumnSpec("x", "real", NORMAL), [1.0, 2.0])], 2)
    with pytest.raises(UsageError):
        mod.expand_frame(frame, "poisson", mod.NoiseConfig())


def test_delta_must_lie_in_unit_interval(mod):
    for delta in (0.0, 1.0, -0.5):
        with pytest.raises(InvalidParameterError):
            mod.recover_poisson(_gamma(2.0, 1.0), mod.NoiseConfig(), delta=delta)


def test_record_group_must_match_family(mod):
    with pytest.raises(InvalidParameterError):
        mod.TrickRecord("c", "bernoulli_then_gamma", ("c#0", "c#1"), mod.NoiseConfig(), categorical(3))
    with pytest.raises(InvalidParameterError):
        mod.TrickRecord("n", "gamma", ("n", "m"), mod.NoiseConfig(), POISSON)
    with pytest.raises(InvalidParameterError):
        mod.TrickRecord("n", "shuffle", ("n",), mod.NoiseConfig(), POISSON)


def test_invalid_noise(mod):
    with pytest.raises(InvalidParameterError):
        mod.NoiseConfig(beta_a=0.0)
    with pytest.raises(InvalidParameterError):
        mod.NoiseConfig(seed=-1)


def test_recover_categorical_needs_two_classes(mod):
    with pytest.raises(InvalidParameterError):
        mod.recover_categorical([1.0])
