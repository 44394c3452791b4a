"""Readers for the ergobound output files (used by the plotting scripts)."""

import csv
import json
from pathlib import Path

import numpy as np


def read_csv_columns(path):
    """Numeric CSV with a header row -> dict of column name to float array.

    Non-numeric columns (e.g. status strings) are returned as lists of str.
    """
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    header, body = rows[0], rows[1:]
    out = {}
    for i, name in enumerate(header):
        col = [r[i] for r in body]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = col
    return out


def read_bound_summary(path):
    return read_csv_columns(path)


def read_gap_report(path):
    """Gap JSON: a list with one entry per threshold M."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise ValueError(f"{path}: expected a JSON array")
    return data


def read_region_grid(path):
    """Parse a .grid file without the extension module.

    Returns (header dict, values) where values has shape resolution[::-1],
    i.e. the first coordinate varies fastest in the file.
    """
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "ergobound-grid 1":
        raise ValueError(f"{path}: not an ergobound grid file")
    header = {}
    i = 1
    while i < len(lines):
        key, _, rest = lines[i].partition(" ")
        i += 1
        if key == "values":
            n = int(rest)
            break
        header[key] = rest.split()
    else:
        raise ValueError(f"{path}: missing values section")
    dim = int(header["dim"][0])
    box = [float(v) for v in header["box"]]
    meta = {
        "dim": dim,
        "box": [(box[2 * k], box[2 * k + 1]) for k in range(dim)],
        "resolution": [int(v) for v in header["resolution"]],
        "threshold": float(header["threshold"][0]),
        "bound": float(header["bound"][0]),
        "certificate": header["certificate"][0],
    }
    values = np.array([float(v) for v in lines[i:i + n]])
    if values.size != n or n != int(np.prod(meta["resolution"])):
        raise ValueError(f"{path}: truncated values")
    return meta, values.reshape(meta["resolution"][::-1])
