from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nctori import _pykernels, kernels

BACKENDS = kernels.backends()
P = 2_147_483_647


def test_backend_selected():
    assert kernels.BACKEND in BACKENDS
    assert set(BACKENDS) <= {"python", "cython"}


def test_pure_flag_forces_python():
    env = dict(os.environ, NCTORI_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "from nctori import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("name", sorted(BACKENDS))
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_rank_mod_p_matches_numpy(name, rows, cols, seed):
    rng = np.random.default_rng(seed)
    low = rng.integers(-3, 4, size=(rows, min(rows, cols)))
    a = low @ rng.integers(-3, 4, size=(min(rows, cols), cols))
    assert BACKENDS[name].rank_mod_p(a, P) == np.linalg.matrix_rank(a.astype(float))


def test_rank_mod_small_prime_can_drop():
    a = np.array([[2, 0], [0, 1]])
    assert _pykernels.rank_mod_p(a, 2) == 1
    for mod in BACKENDS.values():
        assert mod.rank_mod_p(a, 2) == 1


@pytest.mark.parametrize("prefix", [[], [1], [-1, 0], [0, 1, -1]])
def test_wedge_chunks_agree(prefix):
    target = [1, 0, 0, 0, 1, 0, 0, 0, 1]
    results = [mod.wedge_search_chunk(1, prefix, target) for mod in BACKENDS.values()]
    assert all(r == results[0] for r in results)
    assert results[0][0] == 3 ** (9 - len(prefix))


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_check_pairs_finds_planted_error(name):
    rng = np.random.default_rng(1)
    dim, m = 7, 10
    perms = np.array([rng.permutation(dim) for _ in range(4)])
    phases = rng.integers(0, m, size=(4, dim))
    # table entry 3 := entry 0 @ entry 1 times zeta^4
    perms[3] = perms[0][perms[1]]
    phases[3] = (phases[1] + phases[0][perms[1]] - 4) % m
    mod = BACKENDS[name]
    assert mod.check_pairs(perms, phases, [0], [1], [3], [4], m) == -1
    assert mod.check_pairs(perms, phases, [0, 0], [1, 1], [3, 3], [4, 5], m) == 1
