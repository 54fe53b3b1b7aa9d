"""CSV writer shared by the report emitters."""

from __future__ import annotations

import csv


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool,)):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return "%.17g" % float(v)


def write_csv(path, header, rows) -> None:
    """Comma-separated, 17 significant digits, header row, LF line endings."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
