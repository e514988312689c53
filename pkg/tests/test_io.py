import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from igbss.io import (DataFormatError, format_matrix_csv, parse_matrix_csv, read_json, read_matrix_csv,
                      read_ppm, read_raster, write_json, write_matrix_csv, write_ppm)


@settings(max_examples=50, deadline=None)
@given(A=arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)),
                elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_csv_round_trip_exact(A):
    assert np.array_equal(parse_matrix_csv(format_matrix_csv(A)), A)


def test_csv_layout(tmp_path):
    path = tmp_path / "m.csv"
    write_matrix_csv(path, np.array([[1, 2, 3], [4, 5, 6]]))
    assert path.read_text() == "2,3\n1,2,3\n4,5,6\n"
    assert read_matrix_csv(path).tolist() == [[1, 2, 3], [4, 5, 6]]


@pytest.mark.parametrize("text,match", [
    ("", "empty"),
    ("2;2\n1,2\n3,4\n", ":1: header"),
    ("2,2\n1,2\n", "declares 2 rows"),
    ("2,2\n1,2\n3\n", ":3: expected 2 columns"),
    ("2,2\n1,2\n3,x\n", ":3:2: not a number"),
    ("1,2\n1,nan\n", ":2:2: non-finite"),
])
def test_csv_diagnostics(text, match):
    with pytest.raises(DataFormatError, match=match):
        parse_matrix_csv(text, "f.csv")


def test_ppm_round_trip(tmp_path):
    im = np.random.default_rng(0).integers(0, 256, size=(4, 5, 3))
    write_ppm(tmp_path / "a.ppm", im)
    assert np.array_equal(read_ppm(tmp_path / "a.ppm"), im)
    assert np.array_equal(read_raster(tmp_path / "a.ppm"), im)


def test_ppm_comment_header(tmp_path):
    data = b"P6\n# made by hand\n2 1\n255\n" + bytes([1, 2, 3, 4, 5, 6])
    (tmp_path / "c.ppm").write_bytes(data)
    assert read_ppm(tmp_path / "c.ppm").tolist() == [[[1, 2, 3], [4, 5, 6]]]


def test_ppm_errors(tmp_path):
    (tmp_path / "p3.ppm").write_bytes(b"P3\n1 1\n255\n0 0 0\n")
    with pytest.raises(DataFormatError, match="P6"):
        read_ppm(tmp_path / "p3.ppm")
    (tmp_path / "short.ppm").write_bytes(b"P6\n2 2\n255\n" + bytes(3))
    with pytest.raises(DataFormatError, match="shorter"):
        read_ppm(tmp_path / "short.ppm")
    with pytest.raises(ValueError):
        write_ppm(tmp_path / "bad.ppm", np.full((1, 1, 3), 300))


def test_raster_csv(tmp_path):
    im = np.arange(2 * 3 * 3).reshape(2, 3, 3)
    write_matrix_csv(tmp_path / "r.csv", im.reshape(2, -1))
    assert np.array_equal(read_raster(tmp_path / "r.csv"), im)
    write_matrix_csv(tmp_path / "bad.csv", np.zeros((2, 4)))
    with pytest.raises(DataFormatError):
        read_raster(tmp_path / "bad.csv")


def test_json(tmp_path):
    write_json(tmp_path / "j.json", {"b": np.float64(np.inf), "a": np.arange(2), 3: (1, 2)})
    assert read_json(tmp_path / "j.json") == {"a": [0, 1], "b": "inf", "3": [1, 2]}
    assert (tmp_path / "j.json").read_text().index('"3"') < (tmp_path / "j.json").read_text().index('"a"')
