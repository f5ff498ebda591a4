"""
File utilities: atomic writes and the matrix/report serialisers
"""
import csv
import io
import json
import logging
import os
import tempfile
from contextlib import contextmanager

import numpy as np

from errors import DimensionMismatch, NonFiniteInput, UsageError

logger = logging.getLogger('geolab.io')


@contextmanager
def atomic_write(path, mode='w', newline=None):
    """
    Context manager writing a file through a temporary sibling and a rename.

    Usage:
        with atomic_write('out/report.json') as fh:
            fh.write(text)
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix='.tmp-', dir=directory)
    try:
        with os.fdopen(fd, mode, newline=newline, encoding=None if 'b' in mode else 'utf-8') as fh:
            yield fh
        os.replace(tmp_path, path)
    except Exception as e:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        logger.error(f"Write to {path} failed: {str(e)}", exc_info=True)
        raise


def format_number(x):
    """17 significant digits: enough for a bit-exact float64 round trip."""
    return format(float(x), '.17g')


def matrix_to_text(T):
    T = np.atleast_2d(np.asarray(T, dtype=float))
    lines = [f"{T.shape[0]} {T.shape[1]}"]
    lines.extend(' '.join(format_number(x) for x in row) for row in T)
    return '\n'.join(lines) + '\n'


def _parse_blocks(text):
    tokens = text.split()
    blocks = []
    pos = 0
    while pos < len(tokens):
        try:
            rows, cols = int(tokens[pos]), int(tokens[pos + 1])
        except (IndexError, ValueError):
            raise UsageError(f"malformed matrix header at token {pos}")
        pos += 2
        count = rows * cols
        if pos + count > len(tokens):
            raise DimensionMismatch(f"matrix declared {rows}x{cols} but data is short")
        data = np.array([float(tok) for tok in tokens[pos:pos + count]], dtype=float)
        pos += count
        blocks.append(data.reshape(rows, cols))
    return blocks


def matrix_from_text(text):
    blocks = _parse_blocks(text)
    if len(blocks) != 1:
        raise UsageError(f"expected one matrix, found {len(blocks)}")
    return blocks[0]


def matrix_to_json(T):
    T = np.atleast_2d(np.asarray(T, dtype=float))
    return {'rows': int(T.shape[0]), 'cols': int(T.shape[1]), 'data': [float(x) for x in T.ravel()]}


def matrix_from_json(obj):
    try:
        rows, cols, data = int(obj['rows']), int(obj['cols']), obj['data']
    except (KeyError, TypeError, ValueError):
        raise UsageError("matrix JSON needs integer 'rows', 'cols' and a 'data' list")
    if len(data) != rows * cols:
        raise DimensionMismatch(f"matrix JSON declares {rows}x{cols} but has {len(data)} entries")
    T = np.array(data, dtype=float).reshape(rows, cols)
    if not np.all(np.isfinite(T)):
        raise NonFiniteInput("matrix JSON contains non-finite entries")
    return T


def write_matrix(path, T):
    """Write one matrix; format follows the extension (.json or text)."""
    with atomic_write(path) as fh:
        if path.endswith('.json'):
            fh.write(json.dumps(matrix_to_json(T)) + '\n')
        else:
            fh.write(matrix_to_text(T))


def read_matrix(path):
    with open(path, encoding='utf-8') as fh:
        text = fh.read()
    if path.endswith('.json'):
        return matrix_from_json(json.loads(text))
    return matrix_from_text(text)


def read_matrix_stack(path):
    """
    Read a list of matrices (a subspace basis).

    Accepts a JSON list of matrix objects, a JSON object with an
    'elements' list, or a text file of consecutive "m n" blocks.

    Returns:
        tuple: (matrices: list, extra: dict of other JSON keys)
    """
    with open(path, encoding='utf-8') as fh:
        text = fh.read()
    if not path.endswith('.json'):
        return _parse_blocks(text), {}
    obj = json.loads(text)
    if isinstance(obj, list):
        return [matrix_from_json(item) for item in obj], {}
    elements = obj.get('elements')
    if elements is None:
        raise UsageError("basis JSON needs an 'elements' list")
    extra = {key: value for key, value in obj.items() if key != 'elements'}
    return [matrix_from_json(item) for item in elements], extra


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serialisable: {type(value).__name__}")


def dumps_json(data):
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default) + '\n'


def write_json(path, data):
    with atomic_write(path) as fh:
        fh.write(dumps_json(data))


def write_csv(path, header, rows):
    """Write a CSV with a header row; floats use the 17-digit format."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(x) if isinstance(x, (float, np.floating)) else x for x in row])
    with atomic_write(path, newline='') as fh:
        fh.write(buffer.getvalue())


def write_text(path, text):
    with atomic_write(path) as fh:
        fh.write(text)
