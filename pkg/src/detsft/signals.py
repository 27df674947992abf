"""Signal files: little-endian complex binary or ``index,re,im`` CSV."""

import csv
import os

import numpy as np

from ._validation import check_signal

FORMATS = ("c128", "c64", "csv")
_DTYPES = {"c128": "<c16", "c64": "<c8"}


def sniff_format(path):
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".csv":
        return "csv"
    if ext in (".c64", ".cf32"):
        return "c64"
    return "c128"


def read_signal(path, fmt=None):
    fmt = fmt or sniff_format(path)
    if fmt not in FORMATS:
        raise ValueError(f"unknown signal format {fmt!r}; choose from {FORMATS}")
    if fmt != "csv":
        return check_signal(np.fromfile(path, dtype=_DTYPES[fmt]).astype(np.complex128))
    rows = {}
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#") or not rec[0].strip().lstrip("-").isdigit():
                continue
            rows[int(rec[0])] = complex(float(rec[1]), float(rec[2]))
    n = len(rows)
    if sorted(rows) != list(range(n)):
        raise ValueError(f"{path}: indices must cover 0..n-1 exactly once")
    return check_signal(np.array([rows[i] for i in range(n)]))


def write_signal(path, x, fmt=None):
    fmt = fmt or sniff_format(path)
    x = check_signal(x)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "re", "im"])
            for i, v in enumerate(x):
                w.writerow([i, repr(float(v.real)), repr(float(v.imag))])
    elif fmt in _DTYPES:
        x.astype(_DTYPES[fmt]).tofile(path)
    else:
        raise ValueError(f"unknown signal format {fmt!r}; choose from {FORMATS}")
