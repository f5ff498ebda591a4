"""
Tests for file utilities and plots
"""
import json

import numpy as np
import pytest

from errors import DimensionMismatch, NonFiniteInput, UsageError
from io_utils import (
    atomic_write, dumps_json, matrix_from_json, matrix_from_text, matrix_to_text, read_matrix,
    read_matrix_stack, write_csv, write_matrix,
)
from svg_plot import line_plot


def test_matrix_text_is_bit_exact(tmp_path, rng):
    T = rng.standard_normal((3, 2))
    path = str(tmp_path / 'T.txt')
    write_matrix(path, T)
    np.testing.assert_array_equal(read_matrix(path), T)
    assert matrix_to_text(np.eye(2)).splitlines()[0] == '2 2'


def test_matrix_json_file(tmp_path):
    path = str(tmp_path / 'T.json')
    write_matrix(path, np.diag([1.0, 2.0]))
    assert json.loads((tmp_path / 'T.json').read_text()) == {'rows': 2, 'cols': 2, 'data': [1.0, 0.0, 0.0, 2.0]}


def test_matrix_parse_errors():
    with pytest.raises(DimensionMismatch):
        matrix_from_text("2 2\n1 2 3\n")
    with pytest.raises(UsageError):
        matrix_from_text("two 2\n")
    with pytest.raises(NonFiniteInput):
        matrix_from_json({'rows': 1, 'cols': 1, 'data': [float('nan')]})
    with pytest.raises(DimensionMismatch):
        matrix_from_json({'rows': 2, 'cols': 2, 'data': [1.0]})


def test_read_matrix_stack_formats(tmp_path):
    text = tmp_path / 'basis.txt'
    text.write_text("1 1\n3\n1 1\n4\n")
    blocks, extra = read_matrix_stack(str(text))
    assert [float(B[0, 0]) for B in blocks] == [3.0, 4.0]
    assert extra == {}

    wrapped = tmp_path / 'basis.json'
    wrapped.write_text(json.dumps({'p': 1.5, 'elements': [{'rows': 1, 'cols': 1, 'data': [2.0]}]}))
    blocks, extra = read_matrix_stack(str(wrapped))
    assert len(blocks) == 1
    assert extra == {'p': 1.5}

    wrapped.write_text(json.dumps({'p': 1.5}))
    with pytest.raises(UsageError):
        read_matrix_stack(str(wrapped))


def test_atomic_write_leaves_no_partial_file(tmp_path):
    target = tmp_path / 'report.json'
    target.write_text('old')
    with pytest.raises(RuntimeError):
        with atomic_write(str(target)) as fh:
            fh.write('new')
            raise RuntimeError('interrupted')
    assert target.read_text() == 'old'
    assert [p.name for p in tmp_path.iterdir()] == ['report.json']


def test_dumps_json_is_canonical():
    text = dumps_json({'b': np.float64(0.5), 'a': np.int64(3), 'c': np.array([1, 2])})
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert json.loads(text) == {'a': 3, 'b': 0.5, 'c': [1, 2]}


def test_write_csv_full_precision(tmp_path):
    path = tmp_path / 'sweep.csv'
    write_csv(str(path), ['k', 'value'], [(2, 1 / 3)])
    header, row = path.read_text().splitlines()
    assert header == 'k,value'
    assert float(row.split(',')[1]) == 1 / 3


def test_line_plot_handles_empty_and_constant_series():
    assert '</svg>' in line_plot([])
    series = [('flat', [1, 2, 3], [5.0, 5.0, 5.0])]
    svg = line_plot(series, title='flat line')
    assert '<svg' in svg
    assert svg == line_plot(series, title='flat line')
