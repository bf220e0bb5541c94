import json

import numpy as np
import pytest

from bellcc import formats
from bellcc import inequalities as iq
from bellcc.errors import ParseError


def test_gtable_roundtrip(tmp_path):
    g = iq.ardehali_g(4)
    path = tmp_path / "g.json"
    path.write_text(formats.dump_gtable(g))
    assert np.array_equal(formats.load_gtable(path).values, g.values)
    g2 = iq.GTable(1, [0.25, -1.5])
    assert np.array_equal(formats.parse_gtable(formats.dump_gtable(g2)).values, g2.values)


def test_sign_function_roundtrip(tmp_path):
    s = iq.ardehali_sign(2)
    path = tmp_path / "s.json"
    path.write_text(formats.dump_sign_function(s))
    loaded = formats.load_sign_function(path)
    assert np.array_equal(loaded.table, s.table)
    assert json.loads(formats.dump_sign_function(s))["mask"] == s.hex()


@pytest.mark.parametrize("text, fragment", [
    ('{"n": 2, "values": [1, 2, 3', "line 1"),
    ('{"values": [1, 2]}', "missing field 'n'"),
    ('{"n": 2}', "missing field 'values'"),
    ('{"n": 2, "values": [1, 2, 3]}', "3 entries, expected 2^2 = 4"),
    ('{"n": 1, "values": [1, "a"]}', "values[1]"),
    ('{"n": 1, "values": [0, 0]}', "nonzero"),
    ('[1, 2]', "top level"),
    ('{\n"n": 1,\n"values": [1, 2],\n}', "line 4"),
])
def test_gtable_parse_errors(text, fragment):
    with pytest.raises(ParseError, match=None) as exc:
        formats.parse_gtable(text)
    assert fragment in str(exc.value)


@pytest.mark.parametrize("text, fragment", [
    ('{"n": 2}', "missing field 'mask'"),
    ('{"n": 2, "mask": "zz"}', "hexadecimal"),
    ('{"n": 2, "mask": 7}', "hexadecimal"),
    ('{"n": 1, "mask": "0xff"}', "does not fit"),
])
def test_sign_parse_errors(text, fragment):
    with pytest.raises(ParseError) as exc:
        formats.parse_sign_function(text)
    assert fragment in str(exc.value)


def test_csv_float_precision():
    text = formats.to_csv([{"a": 0.1, "b": True, "c": 3}], ["a", "b", "c"])
    assert text == "a,b,c\n0.10000000000000001,true,3\n"
