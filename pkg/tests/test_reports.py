import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rankembed.errors import ConfigError
from rankembed.reports import VerificationReport, dumps, emit, parse


def sample():
    return VerificationReport(
        "demo.check", {"seed": 3, "n": 2}, True,
        {"lambda_hat": 1.0 / 3.0, "beta_squared": Fraction(5, 4), "bins": [{"range": [1.0, 2.0], "count": 4}],
         "arr": np.array([1.5, 2.0])},
        [{"x": (1, 2), "ratio": np.float64(0.1)}],
        17,
    )


def test_empty_list():
    assert emit([]) == b"[]"
    assert parse(b"[]") == []


def test_round_trip():
    r = VerificationReport("a", {"seed": 1}, False, {"c": 0.1, "k": 2}, [{"w": [0.5, -1.25]}], 5)
    (back,) = parse(emit([r]))
    assert back.to_dict() == r.to_dict()
    (back,) = parse(emit([r], include_runtime=True))
    assert back == r


def test_float_and_fraction_serialization():
    text = emit([sample()]).decode()
    assert "0.33333333333333331" in text  # 17 significant digits
    assert '"5/4"' in text
    assert '"pass": true' in text
    keys = list(json.loads(text)[0])
    assert keys == ["check_name", "parameters", "pass", "constants", "witnesses"]


@settings(max_examples=200)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip_exactly(x):
    assert json.loads(dumps([x]))[0] == x


def test_csv_has_row_per_bin_and_witness():
    rows = list(csv.reader(io.StringIO(emit([sample(), sample()], "csv").decode())))
    assert rows[0] == ["check_name", "pass", "kind", "index", "payload"]
    kinds = [r[2] for r in rows[1:]]
    assert kinds == ["summary", "bin", "witness"] * 2
    json.loads(rows[2][4])


def test_text_and_unknown_format():
    assert emit([sample()], "text").decode().startswith("PASS demo.check:")
    with pytest.raises(ConfigError):
        emit([sample()], "yaml")
