"""Selection of the double-sum backend.

The compiled extension is used when it imports; setting
``CURVEDLINK_PURE=1`` forces the numpy fallback.  ``CURVEDLINK_WORKERS``
sets the default thread count.  Rows are split into fixed-size chunks and
row sums are combined with ``math.fsum`` in row order, so results do not
depend on the number of workers.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pyloops
from ._pyloops import MODE_H3_PARALLEL, MODE_R3, MODE_S3_LEFT, MODE_S3_PARALLEL  # noqa: F401

try:
    if os.environ.get("CURVEDLINK_PURE", "") not in ("", "0"):
        raise ImportError("pure backend requested")
    from . import _cloops
except ImportError:
    _cloops = None

CHUNK_ROWS = 64


def backend_name() -> str:
    return "compiled" if _cloops is not None else "numpy"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("CURVEDLINK_WORKERS", "1")))
    except ValueError:
        return 1


def _run_chunks(fn, n_rows, workers):
    chunks = [(s, min(n_rows, s + CHUNK_ROWS)) for s in range(0, n_rows, CHUNK_ROWS)]
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(chunks) == 1:
        for c in chunks:
            fn(*c)
    else:
        with ThreadPoolExecutor(workers) as ex:
            list(ex.map(lambda c: fn(*c), chunks))


def _c(a):
    return np.ascontiguousarray(a, dtype=float)


def link_rows(mode, X, Xd, Y, Yd, diag=False, workers=None, pure=False):
    """Row sums of a linking integrand; see :func:`_pyloops.link_rows`."""
    if _cloops is None or pure:
        return _pyloops.link_rows(mode, _c(X), _c(Xd), _c(Y), _c(Yd), diag)
    X, Xd, Y, Yd = _c(X), _c(Xd), _c(Y), _c(Yd)
    first = np.zeros(len(X))
    second = np.zeros(len(X))
    _run_chunks(lambda r0, r1: _cloops.link_rows_range(mode, X, Xd, Y, Yd, bool(diag), r0, r1, first, second),
                len(X), workers)
    return first, second


def helicity_rows(mode, X, V, w, r_cut, div=None, workers=None, pure=False):
    """Row sums of helicity pair integrands; see :func:`_pyloops.helicity_rows`."""
    if _cloops is None or pure:
        return _pyloops.helicity_rows(mode, _c(X), _c(V), _c(w), float(r_cut), div)
    X, V, w = _c(X), _c(V), _c(w)
    divw = np.zeros(len(X)) if div is None else _c(np.asarray(div) * w)
    out = np.zeros((len(X), 3))
    _run_chunks(lambda r0, r1: _cloops.helicity_rows_range(mode, X, V, w, float(r_cut), divw, r0, r1, out),
                len(X), workers)
    return out


def fsum_rows(rows, weights=None) -> float:
    rows = np.asarray(rows, dtype=float)
    if weights is not None:
        rows = rows * weights
    return math.fsum(rows.tolist())
