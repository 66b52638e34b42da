import itertools
import os
import subprocess
import sys

import numpy as np
import pytest

from patgen import _kernels


def lcs_ref(a, b):
    d = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i, j in itertools.product(range(1, len(a) + 1), range(1, len(b) + 1)):
        d[i][j] = d[i - 1][j - 1] + 1 if a[i - 1] == b[j - 1] else max(d[i - 1][j], d[i][j - 1])
    return d[-1][-1]


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def test_tandem_candidates_paths_agree(rng, jit):
    for _ in range(300):
        codes = rng.integers(0, rng.integers(1, 5), size=rng.integers(0, 40))
        got = _kernels.tandem_candidates(codes, jit=jit)
        ref = _kernels.tandem_candidates(codes, jit=False)
        key = lambda a: sorted(map(tuple, a.tolist()))
        assert key(got) == key(ref)


def test_closure_and_reduction(rng, jit):
    for _ in range(100):
        n = int(rng.integers(1, 12))
        adj = np.triu(rng.random((n, n)) < 0.3, 1)
        reach = _kernels.transitive_closure(adj, jit=jit)
        # reference: repeated squaring until stable
        ref = adj.copy()
        while True:
            nxt = ref | ((ref.astype(int) @ ref.astype(int)) > 0)
            if (nxt == ref).all():
                break
            ref = nxt
        assert (reach == ref).all()
        red = _kernels.transitive_reduction(reach, jit=jit)
        assert (_kernels.transitive_closure(red, jit=jit) == reach).all()
        assert (red <= adj).all()


def test_lcs(rng, jit):
    for _ in range(200):
        a = rng.integers(0, 3, size=rng.integers(0, 15))
        b = rng.integers(0, 3, size=rng.integers(0, 15))
        assert _kernels.lcs_length(a, b, jit=jit) == lcs_ref(a.tolist(), b.tolist())


def test_indel_step(rng, jit):
    for _ in range(200):
        t = rng.integers(0, 3, size=rng.integers(0, 10))
        run = rng.integers(0, 3, size=rng.integers(0, 10))
        row = np.arange(t.size + 1)
        for x in run:
            row = _kernels.indel_step(row, t, x, jit=jit)
        for j in range(t.size + 1):
            expect = j + run.size - 2 * lcs_ref(t[:j].tolist(), run.tolist())
            assert row[j] == expect


def test_env_flag_disables_numba():
    code = "from patgen import _kernels; print(_kernels.USE_NUMBA)"
    env = dict(os.environ, PATGEN_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"


def test_requesting_disabled_path_fails(monkeypatch):
    monkeypatch.setattr(_kernels, "USE_NUMBA", False)
    with pytest.raises(RuntimeError):
        _kernels.lcs_length([1], [1], jit=True)
