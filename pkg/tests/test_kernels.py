import numpy as np
import pytest

from devrank import _pykernels, kernels


def _random_csr(rng, n_rows, n_cols, n_edges):
    rows = np.sort(rng.integers(0, n_rows, n_edges))
    indptr = np.zeros(n_rows + 1, dtype=np.intp)
    np.cumsum(np.bincount(rows, minlength=n_rows), out=indptr[1:])
    indices = rng.integers(0, n_cols, n_edges).astype(np.intp)
    return indptr, indices, rng.random(n_edges), rng.random(n_cols)


def _dense(indptr, indices, weights, x):
    out = np.zeros(len(indptr) - 1)
    for i in range(len(out)):
        for e in range(indptr[i], indptr[i + 1]):
            out[i] += weights[e] * x[indices[e]]
    return out


def test_gather_matches_loop(backend):
    rng = np.random.default_rng(3)
    args = _random_csr(rng, 40, 25, 300)
    assert np.array_equal(kernels.csr_gather(*args), _dense(*args))


def test_empty_rows_and_no_edges(backend):
    indptr = np.zeros(4, dtype=np.intp)
    out = kernels.csr_gather(indptr, np.zeros(0, dtype=np.intp), np.zeros(0), np.ones(2))
    assert out.tolist() == [0.0, 0.0, 0.0]


@pytest.mark.skipif("cython" not in kernels.available_backends(), reason="extension not built")
@pytest.mark.parametrize("threads", [1, 2, 4, 7])
def test_backends_bitwise_equal_for_any_thread_count(threads):
    from devrank import _ckernels

    rng = np.random.default_rng(11)
    args = _random_csr(rng, 5000, 3000, 60000)
    ref = _pykernels.csr_gather(*args)
    assert np.array_equal(_ckernels.csr_gather(*args, threads), ref)


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")
