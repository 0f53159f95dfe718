"""Number formatting and file writers shared by the CLI and the JSON API.

Extended reals are written as ``inf`` / ``-inf``. CSV reals carry 17
significant digits; JSON reals are rounded to 15 so repeated runs compare
byte-for-byte.
"""
import csv
import io
import json
import math
import os

import numpy as np

OUTPUT_VERSION = 1


def encode_real(value):
    """JSON-safe extended real."""
    value = float(value)
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    if math.isnan(value):
        return 'nan'
    return float(format(value, '.15g'))


def encode_matrix(matrix):
    return [[encode_real(v) for v in row] for row in np.asarray(matrix, dtype=float)]


def encode_complex(value):
    value = complex(value)
    return {'re': encode_real(value.real), 'im': encode_real(value.imag)}


def csv_real(value):
    value = float(value)
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return format(value, '.17g')


def versioned(payload):
    """Prefix a payload with the output format version."""
    return {'version': OUTPUT_VERSION, **payload}


def dump_json(payload, path=None):
    """Serialise ``payload`` (with version) to ``path``, or return the text when ``path`` is None."""
    text = json.dumps(versioned(payload), indent=2, sort_keys=False) + '\n'
    if path is None:
        return text
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(text)
    return text


def _csv_row(row):
    return [csv_real(v) if isinstance(v, (float, np.floating)) else str(v) for v in row]


def csv_text(header, rows):
    """CSV document as a string, formatted like :func:`write_csv`."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(_csv_row(row) for row in rows)
    return buffer.getvalue()


def write_csv(path, header, rows):
    """Write rows to ``path``; floats use :func:`csv_real`, everything else ``str``."""
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(_csv_row(row) for row in rows)


def _ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise FileNotFoundError(f"output directory does not exist: {parent}")


def trajectory_rows(trajectory):
    for t, state in zip(trajectory.times, trajectory.array):
        yield (float(t),) + tuple(float(v) for v in state)


def itinerary_rows(itinerary):
    for visit in itinerary.visits:
        yield visit.node.label, float(visit.entry), float(visit.exit)


def write_trajectory_csv(path, trajectory):
    write_csv(path, ['t', 'x1', 'x2', 'x3', 'y1', 'y2', 'y3'], trajectory_rows(trajectory))


def write_itinerary_csv(path, itinerary):
    write_csv(path, ['label', 'entry', 'exit'], itinerary_rows(itinerary))
