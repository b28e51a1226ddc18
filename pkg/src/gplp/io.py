"""CSV and JSON readers/writers for series, posteriors and spectra."""

import csv
import json
from pathlib import Path

import numpy as np

from .gp import TimeSeries

__all__ = [
    "CsvFormatError",
    "read_series_csv",
    "read_single_column",
    "write_series_csv",
    "write_posterior_csv",
    "write_spectrum_csv",
    "read_json",
    "write_json",
]


class CsvFormatError(ValueError):
    pass


def _fmt(x):
    return repr(float(x))


def read_series_csv(path):
    """Read a ``time,value`` CSV into a :class:`TimeSeries`."""
    path = Path(path)
    times, values = [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise CsvFormatError(f"{path}: empty file")
        if [h.strip().lower() for h in header[:2]] != ["time", "value"]:
            raise CsvFormatError(f"{path}:1: expected header 'time,value', got {','.join(header)!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise CsvFormatError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                times.append(float(row[0]))
                values.append(float(row[1]))
            except ValueError:
                raise CsvFormatError(f"{path}:{lineno}: cannot parse {','.join(row)!r}") from None
    if not times:
        raise CsvFormatError(f"{path}: no data rows")
    try:
        return TimeSeries(np.array(times), np.array(values))
    except ValueError as exc:
        raise CsvFormatError(f"{path}: {exc}") from None


def read_single_column(path, dt):
    """Read one value per line (e.g. a heart-rate record) sampled every ``dt`` s."""
    path = Path(path)
    values = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line.split()[0]))
            except ValueError:
                raise CsvFormatError(f"{path}:{lineno}: cannot parse {line!r}") from None
    return TimeSeries(dt * np.arange(len(values)), np.array(values))


def read_series(path, dt=None):
    """CSV with a ``time,value`` header, or a bare single column when ``dt`` is given."""
    if dt is not None:
        with Path(path).open(encoding="utf-8") as fh:
            first = fh.readline()
        if "time" not in first.lower():
            return read_single_column(path, dt)
    return read_series_csv(path)


def _write_rows(path, header, columns):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([_fmt(v) for v in row])
    return path


def write_series_csv(path, ts):
    return _write_rows(path, ["time", "value"], [ts.times, ts.values])


def write_posterior_csv(path, post):
    return _write_rows(
        path,
        ["time", "mean", "std", "lower95", "upper95"],
        [post.query_times, post.mean, post.std, post.lower95, post.upper95],
    )


def write_spectrum_csv(path, spec):
    return _write_rows(path, ["freq_hz", "magnitude", "power"], [spec.freqs, spec.magnitude, spec.power])


def read_json(path):
    with Path(path).open(encoding="utf-8") as fh:
        return json.load(fh)


def write_json(path, obj):
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
