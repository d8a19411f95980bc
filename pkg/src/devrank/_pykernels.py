"""Pure numpy fallback for the compiled kernels."""

import numpy as np


def csr_gather(indptr, indices, weights, x, threads=1):
    # bincount adds weights in input order, matching the compiled row loop
    n = len(indptr) - 1
    rows = np.repeat(np.arange(n, dtype=np.intp), np.diff(indptr))
    return np.bincount(rows, weights=weights * x[indices], minlength=n).astype(np.float64, copy=False)
