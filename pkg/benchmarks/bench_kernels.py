"""Compare the compiled and numpy backends on the three hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel is run on both backends with identical inputs; results must
agree, and the best wall time of ``--repeat`` runs is reported.
"""

from __future__ import annotations

import argparse
import itertools
import random
import time

import numpy as np

from nctori import kernels
from nctori.group_onn import random_integer_skew
from nctori.exactmat import SkewMatrix
from nctori.torus_rep import RationalTheta, _box, _box_index, _weyl_arrays, build_rep


def _best(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def wedge_case():
    target = [-1, 0, 0, 0, 1, 0, 0, 0, 1]

    def make(mod):
        def run():
            checked, hits = 0, []
            for v in range(-2, 3):
                c, h = mod.wedge_search_chunk(2, [v], target)
                checked += c
                hits += h
            return checked, hits

        return run

    return "wedge_search bound=2 (5^9 matrices)", make


def rank_case():
    rng = np.random.default_rng(0)
    a = rng.integers(-3, 4, size=(600, 256))
    a[:, 7] = a[:, 3] + a[:, 5]
    p = 2_147_483_647
    return "rank_mod_p 600x256", lambda mod: (lambda: mod.rank_mod_p(a, p))


def pairs_case():
    rng = random.Random(0)
    rt = RationalTheta(SkewMatrix.of(random_integer_skew(3, rng)), 8)
    rep = build_rep(rt)
    r = 2
    perms, phases = _weyl_arrays(rep, _box(3, 2 * r))
    small = _box(3, r)
    pairs = np.array(list(itertools.product(range(small.shape[0]), repeat=2)))
    X, Y = small[pairs[:, 0]], small[pairs[:, 1]]
    P = rt.int_matrix()
    shifts = (rt.q * np.einsum("ki,ij,kj->k", X, P, Y)) % rt.m
    args = (perms, phases, _box_index(X, 2 * r), _box_index(Y, 2 * r), _box_index(X + Y, 2 * r), shifts, rt.m)
    label = f"check_pairs n=3 q=8 ({len(X)} pairs x dim {rep.dim})"
    return label, lambda mod: (lambda: mod.check_pairs(*args))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    backends = kernels.backends()
    print(f"backends: {', '.join(backends)}")
    for case in (wedge_case, rank_case, pairs_case):
        label, make = case()
        results = {}
        for name, mod in backends.items():
            results[name] = _best(make(mod), args.repeat)
        outs = [r[1] for r in results.values()]
        agree = all(o == outs[0] for o in outs)
        timings = "  ".join(f"{name}={t * 1000:9.2f} ms" for name, (t, _) in results.items())
        speedup = ""
        if "cython" in results:
            speedup = f"  speedup={results['python'][0] / results['cython'][0]:.1f}x"
        print(f"{label:55s} {timings}{speedup}  agree={agree}")
        if not agree:
            raise SystemExit(f"backends disagree on {label}")


if __name__ == "__main__":
    main()
