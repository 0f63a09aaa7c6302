from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given

from conftest import gamble_sets
from sureloss.core import GambleSet
from sureloss.errors import InvalidInputError
from sureloss.lp import build_d3, build_d4_phase1, build_p1, build_p3, build_p4prime, select_omega0
from sureloss.lpio import dump_lp, load_lp, parse_lp


def same(a, b):
    return (
        np.array_equal(a.A, b.A) and np.array_equal(a.b, b.b) and np.array_equal(a.c, b.c) and a.meta == b.meta
    )


@given(gamble_sets())
def test_round_trip(d):
    w0 = select_omega0(d)
    d4, _ = build_d4_phase1(d, w0)
    for lp in (build_p1(d), build_p3(d, w0), build_d3(d, w0), d4, build_p4prime(d4)):
        assert same(parse_lp(dump_lp(lp)), lp)


def test_layout_of_dump(tmp_path):
    lp = build_p3(GambleSet.from_rows([(1, -2), (-2, 1)]), 0)
    text = dump_lp(lp)
    assert text.splitlines()[0] == "NAME P3"
    assert " C0 R0 -3.0" in text
    assert "ROWS" in text and "COLUMNS" in text and "RHS" in text and text.rstrip().endswith("ENDATA")
    path = tmp_path / "p3.lp"
    path.write_text(text)
    assert same(load_lp(path), lp)


def test_free_columns():
    d4, _ = build_d4_phase1(GambleSet.from_rows([(1, -2), (-1, 2)]), 0)
    text = dump_lp(build_p4prime(d4))
    assert "BOUNDS" in text and " FR BND C0" in text


@pytest.mark.parametrize("text", [
    "ROWS\n E R0\nCOLUMNS\n C0 R0 1.0\n",           # no ENDATA
    "ROWS\n L R0\nENDATA\n",                         # inequality rows unsupported
    "ROWS\n E R0\nCOLUMNS\n C0 R0 abc\nENDATA\n",    # bad number
    "ROWS\n E R0\nCOLUMNS\n C0 R5 1.0\nENDATA\n",    # undeclared row
    " C0 R0 1.0\nENDATA\n",                          # data before a section
    "META colour blue\nENDATA\n",                    # unknown meta key
])
def test_malformed(text):
    with pytest.raises(InvalidInputError):
        parse_lp(text)
