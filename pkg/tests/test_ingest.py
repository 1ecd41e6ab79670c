import numpy as np
import pandas as pd
import pytest

from onlinetopo.ingest import (
    EmptySpanError,
    IngestError,
    NonMonotoneTimestampsError,
    ZeroVarianceError,
    ingest_csv,
    resample_and_normalize,
)


def test_uniform_input_passes_through():
    t = np.arange(0.0, 10.0, 2.0)
    v = np.array([1.0, 4.0, 2.0, 8.0, 5.0])
    names, grid, y, mean, std = resample_and_normalize({"a": (t, v)}, 2.0, normalize=False)
    np.testing.assert_array_equal(grid, t)
    np.testing.assert_array_equal(y[:, 0], v)


def test_midpoint_interpolation():
    _, grid, y, _, _ = resample_and_normalize({"a": (np.array([0.0, 10.0]), np.array([0.0, 10.0]))},
                                              5.0, normalize=False)
    np.testing.assert_allclose(grid, [0, 5, 10])
    assert y[1, 0] == 5.0


def test_interpolation_matches_dense_oracle():
    rng = np.random.default_rng(0)
    t = np.sort(rng.uniform(0, 100, 60))
    v = rng.normal(size=60)
    _, grid, y, _, _ = resample_and_normalize({"a": (t, v)}, 0.7, normalize=False)
    for g, val in zip(grid, y[:, 0]):
        k = np.searchsorted(t, g, side="right") - 1
        k = min(k, len(t) - 2)
        w = (g - t[k]) / (t[k + 1] - t[k])
        assert abs(val - ((1 - w) * v[k] + w * v[k + 1])) < 1e-12


def test_grid_is_common_overlap():
    obs = {"a": (np.array([0.0, 5.0, 20.0]), np.ones(3) * [1, 2, 3]),
           "b": (np.array([3.0, 9.0, 15.0]), np.array([0.0, 1.0, 4.0]))}
    _, grid, _, _, _ = resample_and_normalize(obs, 2.0, normalize=False)
    assert grid[0] == 3.0 and grid[-1] <= 15.0 and grid[-1] == 15.0


def test_normalization():
    t = np.arange(50.0)
    v = np.sin(t) * 3 + 7
    _, _, y, mean, std = resample_and_normalize({"a": (t, v)}, 1.0)
    assert abs(y.mean()) < 1e-10
    assert abs(y.std(ddof=1) - 1) < 1e-10
    assert mean[0] == pytest.approx(v.mean()) and std[0] == pytest.approx(v.std(ddof=1))


def test_errors_are_distinct():
    t = np.arange(5.0)
    with pytest.raises(NonMonotoneTimestampsError):
        resample_and_normalize({"a": (np.array([0.0, 2.0, 1.0]), np.ones(3))}, 1.0)
    with pytest.raises(EmptySpanError):
        resample_and_normalize({"a": (t, t), "b": (t + 10, t)}, 1.0)
    with pytest.raises(ZeroVarianceError):
        resample_and_normalize({"a": (t, np.ones(5))}, 1.0)
    with pytest.raises(IngestError):
        resample_and_normalize({}, 1.0)
    with pytest.raises(ValueError):
        resample_and_normalize({"a": (t, t)}, 0.0)
    assert not issubclass(EmptySpanError, NonMonotoneTimestampsError)


def test_wide_csv_with_gaps(tmp_path):
    p = tmp_path / "wide.csv"
    p.write_text("timestamp,x,y\n0,0,1\n1,,3\n2,2,2\n3,3,\n4,1,5\n")
    ing = ingest_csv(p, 1.0, normalize=False)
    assert ing.names == ["x", "y"] and ing.source["layout"] == "wide"
    np.testing.assert_allclose(ing.series.samples[:, 0], [0, 1, 2, 3, 1])
    np.testing.assert_allclose(ing.series.samples[:, 1], [1, 3, 2, 3.5, 5])


def test_long_csv_matches_wide(tmp_path):
    wide = tmp_path / "w.csv"
    wide.write_text("timestamp,a,b\n0,1,5\n2,3,4\n4,2,7\n")
    rows = ["timestamp,series,value"]
    for t, a, b in [(0, 1, 5), (2, 3, 4), (4, 2, 7)]:
        rows += [f"{t},a,{a}", f"{t},b,{b}"]
    long = tmp_path / "l.csv"
    long.write_text("\n".join(rows) + "\n")
    w = ingest_csv(wide, 1.0)
    lg = ingest_csv(long, 1.0)
    assert lg.source["layout"] == "long"
    np.testing.assert_array_equal(w.series.samples, lg.series.samples)
    with pytest.raises(IngestError):
        ingest_csv(long, 1.0, columns=["zzz"])


def test_datetime_timestamps(tmp_path):
    times = pd.date_range("2024-01-01", periods=7, freq="10s")
    p = tmp_path / "dt.csv"
    pd.DataFrame({"timestamp": times.astype(str), "v": [0, 1, 2, 3, 4, 5, 6]}).to_csv(p, index=False)
    ing = ingest_csv(p, 20.0, normalize=False)
    np.testing.assert_allclose(ing.series.samples[:, 0], [0, 2, 4, 6])
    assert np.diff(ing.grid) == pytest.approx(20.0)


def test_missing_columns(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("time,a\n0,1\n1,2\n")
    with pytest.raises(IngestError):
        ingest_csv(p, 1.0)
    with pytest.raises(IngestError):
        ingest_csv(p, 1.0, columns=["b"], timestamp_col="time")
