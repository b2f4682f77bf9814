from __future__ import annotations

import itertools
import json
import random
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, strategies as st

from _strategies import int_matrices, rationals, skew_matrices
from nctori.errors import DimensionMismatch, MalformedVector, NotInGroup, ParityMismatch, WrongDimension
from nctori.exactmat import RatMatrix, SkewMatrix, det, invert, pfaffian
from nctori.grassmann import intertwiner, projective_act
from nctori.grassmann import theta_hat
from nctori.group_onn import (
    GroupElement,
    act,
    compose,
    evaluate,
    in_domain,
    mu,
    nu,
    random_integer_skew,
    random_rational_skew,
    random_unimodular,
    random_word,
    rho,
    sigma,
)
from nctori.ktheory import (
    KLatticeElement,
    TraceRange,
    apply_k_action,
    content_normalize,
    counterexample_search,
    induced_k_action,
    morita_trace_check,
    rational_gcd,
    trace_pairing,
    trace_range,
    wedge_square,
)


def skew(n, upper):
    return SkewMatrix.from_upper(n, upper)


def brute_gcd(values):
    """Generator of sum(Z v) by clearing denominators one value at a time."""
    g = Fraction(0)
    for v in values:
        v = abs(Fraction(v))
        if v == 0:
            continue
        if g == 0:
            g = v
            continue
        d = g.denominator * v.denominator // gcd(g.denominator, v.denominator)
        g = Fraction(gcd(int(g * d), int(v * d)), d)
    return g


# -- lattice elements -----------------------------------------------------------------


def test_lattice_element_parity():
    x = KLatticeElement(3, "even", {0: 2, 0b011: -1})
    assert x.coords == {0: 2, 0b011: -1}
    with pytest.raises(ParityMismatch):
        KLatticeElement(3, "even", {0b001: 1})
    with pytest.raises(MalformedVector):
        KLatticeElement(2, "odd", {0b001: Fraction(1, 2)})
    assert len(KLatticeElement.basis_masks(4, "even")) == 8
    assert KLatticeElement.basis(3, [2]).parity == "odd"


def test_lattice_json_round_trip():
    x = KLatticeElement(3, "odd", {0b001: 4, 0b111: -2})
    doc = json.loads(json.dumps(x.to_json()))
    assert doc["parity"] == "odd"
    assert KLatticeElement.from_json(doc) == x
    with pytest.raises(MalformedVector):
        KLatticeElement.from_json({"n": 2, "terms": []})


# -- trace ----------------------------------------------------------------------------


def test_trace_pairing_examples():
    theta = skew(2, {(0, 1): Fraction(1, 3)})
    assert trace_pairing(theta, KLatticeElement.basis(2, [])) == 1
    assert trace_pairing(theta, KLatticeElement.basis(2, [1, 2])) == Fraction(1, 3)
    th4 = random_rational_skew(4, random.Random(3))
    assert trace_pairing(th4, KLatticeElement.basis(4, [1, 2, 3, 4])) == pfaffian(th4)
    with pytest.raises(ParityMismatch):
        trace_pairing(theta, KLatticeElement.basis(2, [1]))
    with pytest.raises(DimensionMismatch):
        trace_pairing(theta, KLatticeElement.basis(3, []))


@given(skew_matrices(min_n=1, max_n=6), st.data())
def test_trace_pairing_is_coefficient_pairing(theta, data):
    n = theta.n
    masks = KLatticeElement.basis_masks(n, "even")
    x = KLatticeElement(n, "even", {m: data.draw(st.integers(-3, 3)) for m in masks})
    th = theta_hat(theta)
    assert trace_pairing(theta, x) == sum(c * th.coeffs.get(m, 0) for m, c in x.coords.items())


@given(st.lists(rationals(20, 20), max_size=8))
def test_rational_gcd_matches_brute_force(values):
    g = rational_gcd(values)
    assert g == brute_gcd(values)
    for v in values:
        assert TraceRange(g).contains(v)


def test_trace_range_examples():
    assert trace_range(SkewMatrix.zero(3)).generator == 1
    theta = skew(3, {(0, 1): Fraction(1, 2), (0, 2): Fraction(1, 3)})
    assert trace_range(theta).generator == Fraction(1, 6)


@given(st.integers(-50, 50), st.integers(1, 50))
def test_trace_range_two_by_two(p, q):
    t = Fraction(p, q)
    assert trace_range(skew(2, {(0, 1): t})).generator == Fraction(1, t.denominator)


def test_trace_range_contains_pairings(rng):
    for _ in range(10):
        theta = random_rational_skew(4, rng)
        tr = trace_range(theta)
        for m in KLatticeElement.basis_masks(4, "even"):
            assert tr.contains(trace_pairing(theta, KLatticeElement(4, "even", {m: 1})))


# -- Morita trace check ---------------------------------------------------------------------


def test_morita_examples(rng):
    theta = skew(2, {(0, 1): Fraction(2, 5)})
    assert morita_trace_check(theta, sigma(2, 2)) == Fraction(5, 2)
    for _ in range(10):
        th = random_rational_skew(3, rng)
        assert morita_trace_check(th, nu(random_integer_skew(3, rng))) == 1
        assert morita_trace_check(th, rho(random_unimodular(3, rng))) == 1


def test_mu_rescales_trace_range():
    # mu(N) has C != 0 and is a genuine Morita equivalence, not an automorphism
    theta = skew(2, {(0, 1): Fraction(1, 3)})
    g = mu(skew(2, {(0, 1): 1}))
    assert act(g, theta) == skew(2, {(0, 1): Fraction(1, 2)})
    assert morita_trace_check(theta, g) == Fraction(3, 2)


def test_ratio_composes_along_words(rng):
    for _ in range(20):
        theta = random_rational_skew(2, rng)
        g, h = evaluate(random_word(2, 3, rng)), evaluate(random_word(2, 3, rng))
        if not (in_domain(h, theta) and in_domain(compose(g, h), theta)):
            continue
        inner = act(h, theta)
        if not in_domain(g, inner):
            continue
        assert morita_trace_check(theta, compose(g, h)) == morita_trace_check(theta, h) * morita_trace_check(inner, g)


# -- induced action ---------------------------------------------------------------------------


def test_induced_action_examples():
    assert induced_k_action(GroupElement.identity(3)) == RatMatrix.identity(8)
    K = induced_k_action(mu(skew(2, {(0, 1): 1})))
    assert K == RatMatrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 1]])
    K = induced_k_action(sigma(2, 2))
    even = [[K[r, c] for c in (0, 3)] for r in (0, 3)]
    assert sorted(abs(v) for row in even for v in row) == [0, 0, 1, 1]
    assert K[0, 0] == K[3, 3] == 0


def test_induced_action_requires_so():
    with pytest.raises(NotInGroup):
        induced_k_action(sigma(1, 2, allow_odd=True))


@pytest.mark.parametrize("n", [2, 3])
def test_induced_action_projective(n, rng):
    for _ in range(6):
        g, h = evaluate(random_word(n, 3, rng)), evaluate(random_word(n, 3, rng))
        prod = induced_k_action(g) @ induced_k_action(h)
        gh = induced_k_action(compose(g, h))
        assert prod == gh or prod == -gh


def test_induced_action_on_lattice(rng):
    g = evaluate(random_word(3, 4, rng))
    K = induced_k_action(g)
    x = KLatticeElement(3, "even", {0: 1, 0b011: 2, 0b110: -1})
    y = apply_k_action(K, x)
    assert y.parity == "even"


@pytest.mark.parametrize("n", [2, 3])
def test_trace_transforms_with_dual_action(n, rng):
    """c * tau_{g theta}(K x) == s * tau_theta(x), with U theta_hat = c theta_hat'
    and K = s U^{-t}; so the trace range scales by |s / c|."""
    checked = 0
    while checked < 5:
        g = evaluate(random_word(n, 3, rng))
        theta = random_rational_skew(n, rng)
        if not in_domain(g, theta):
            continue
        checked += 1
        U = intertwiner(g)
        res = projective_act(g, theta, U)
        K, s = content_normalize(invert(U.matrix).T)
        assert K == induced_k_action(g)
        for m in KLatticeElement.basis_masks(n, "even"):
            x = KLatticeElement(n, "even", {m: 1})
            assert res.scalar * trace_pairing(res.theta, apply_k_action(K, x)) == s * trace_pairing(theta, x)
        assert morita_trace_check(theta, g) == abs(s / res.scalar)


# -- wedge square ---------------------------------------------------------------------------


def test_wedge_square_examples():
    assert wedge_square(RatMatrix.identity(3)) == RatMatrix.identity(3)
    assert wedge_square([[1, 0, 0], [0, 1, 0], [0, 0, -1]]) == RatMatrix.diag([1, -1, -1])
    with pytest.raises(WrongDimension):
        wedge_square([[1, 0], [0, 1]])


def test_wedge_square_is_multiplicative(rng):
    for _ in range(20):
        A = RatMatrix([[rng.randint(-3, 3) for _ in range(3)] for _ in range(3)])
        B = RatMatrix([[rng.randint(-3, 3) for _ in range(3)] for _ in range(3)])
        assert wedge_square(A @ B) == wedge_square(A) @ wedge_square(B)


@given(int_matrices(3, 3, -5, 5))
def test_det_of_wedge_square(A):
    assert det(wedge_square(A)) == det(A) ** 2


def test_wedge_square_matches_exterior_expansion(rng):
    pairs = [(0, 1), (0, 2), (1, 2)]
    for _ in range(10):
        A = [[rng.randint(-4, 4) for _ in range(3)] for _ in range(3)]
        W = wedge_square(A)
        for c, (j, k) in enumerate(pairs):
            # (A e_j) ^ (A e_k) expanded in the ordered basis
            col = {}
            for i, l in itertools.product(range(3), repeat=2):
                if i == l:
                    continue
                coef = A[i][j] * A[l][k]
                key, sign = ((i, l), 1) if i < l else ((l, i), -1)
                col[key] = col.get(key, 0) + sign * coef
            for r, key in enumerate(pairs):
                assert W[r, c] == col.get(key, 0)


# -- exhaustive search ----------------------------------------------------------------------


def test_counterexample_bound_one():
    report = counterexample_search(1)
    assert report.checked == 3**9
    assert report.hits == []
    assert report.witness["impossible"]


def test_counterexample_control_contains_identity():
    report = counterexample_search(1, target=[[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert [[1, 0, 0], [0, 1, 0], [0, 0, 1]] in report.hits
    assert all(wedge_square(h) == RatMatrix.identity(3) for h in report.hits)


def test_counterexample_search_brute_force_agreement():
    target = [[0, 0, 0], [0, 0, 0], [0, 0, 1]]
    report = counterexample_search(1, target=target)
    brute = []
    for vals in itertools.product(range(-1, 2), repeat=9):
        A = [list(vals[0:3]), list(vals[3:6]), list(vals[6:9])]
        if wedge_square(A) == RatMatrix(target):
            brute.append(A)
    assert report.hits == brute


@pytest.mark.slow
def test_counterexample_bound_two_parallel():
    serial = counterexample_search(2)
    parallel = counterexample_search(2, workers=2)
    assert serial.to_json() == parallel.to_json()
    assert serial.checked == 5**9 and serial.hits == []
