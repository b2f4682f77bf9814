"""Exact phase-permutation representations of rational noncommutative tori.

For ``theta = P/q`` the generators act on functions on ``(Z/q)^n``:

    U_j delta_v = zeta^{phi_j(v)} delta_{v + e_j},   phi_j(v) = 2q sum_{i<j} P_ji v_i

with ``zeta = e(1/m)`` and ``m = 2 q^2``.  Everything is integer arithmetic
on phase exponents; no complex numbers are formed.  With ``L`` the strictly
lower part of ``P`` the Weyl elements are

    U_x delta_v = zeta^{q x.Lx + 2q x.Lv} delta_{v+x}

which equals ``zeta^{q x.Lx} U_1^{x_1} ... U_n^{x_n}`` and satisfies
``U_x U_y = zeta^{q x.Py} U_{x+y}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatch, InputError, NotUnimodular
from .exactmat import RatMatrix, SkewMatrix, det, parse_rational

MAX_DIM = 20736
TABLE_BUDGET = 15_000_000
PAIR_BUDGET = 400_000_000


class PhasePermMatrix:
    """Matrix sending ``e_j`` to ``zeta^{phase[j]} e_{perm[j]}``, ``zeta = e(1/m)``."""

    __slots__ = ("perm", "phase", "m")

    def __init__(self, perm, phase, m: int):
        perm = np.asarray(perm, dtype=np.int64)
        phase = np.asarray(phase, dtype=np.int64) % m
        if perm.shape != phase.shape or perm.ndim != 1:
            raise DimensionMismatch("perm and phase must be equal-length vectors")
        if perm.size and not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise InputError("perm is not a permutation")
        self.perm = perm
        self.phase = phase
        self.m = int(m)

    @classmethod
    def identity(cls, dim: int, m: int) -> "PhasePermMatrix":
        return cls(np.arange(dim), np.zeros(dim), m)

    @property
    def dim(self) -> int:
        return int(self.perm.size)

    def _check(self, other: "PhasePermMatrix"):
        if self.dim != other.dim or self.m != other.m:
            raise DimensionMismatch("phase-permutation matrices are incompatible")

    def __matmul__(self, other: "PhasePermMatrix") -> "PhasePermMatrix":
        self._check(other)
        return PhasePermMatrix(self.perm[other.perm], other.phase + self.phase[other.perm], self.m)

    def inverse(self) -> "PhasePermMatrix":
        perm = np.empty_like(self.perm)
        perm[self.perm] = np.arange(self.dim)
        phase = np.empty_like(self.phase)
        phase[self.perm] = -self.phase
        return PhasePermMatrix(perm, phase, self.m)

    def __pow__(self, k: int) -> "PhasePermMatrix":
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        out = PhasePermMatrix.identity(self.dim, self.m)
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def times_root(self, k: int) -> "PhasePermMatrix":
        """``zeta^k`` times this matrix."""
        return PhasePermMatrix(self.perm, self.phase + k, self.m)

    def scalar_ratio(self, other: "PhasePermMatrix") -> int | None:
        """``k`` with ``self == zeta^k other``, or None if not proportional."""
        self._check(other)
        if not np.array_equal(self.perm, other.perm):
            return None
        diff = (self.phase - other.phase) % self.m
        if diff.size and not np.all(diff == diff[0]):
            return None
        return int(diff[0]) if diff.size else 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PhasePermMatrix)
            and self.m == other.m
            and np.array_equal(self.perm, other.perm)
            and np.array_equal(self.phase, other.phase)
        )

    __hash__ = None

    def dense(self) -> list[list[tuple[int, int] | None]]:
        """Small-dimension view: entry ``(r, c)`` is ``(phase, m)`` or None."""
        out: list[list] = [[None] * self.dim for _ in range(self.dim)]
        for j in range(self.dim):
            out[int(self.perm[j])][j] = (int(self.phase[j]), self.m)
        return out

    def __repr__(self) -> str:
        return f"PhasePermMatrix(dim={self.dim}, m={self.m})"


@dataclass(frozen=True)
class RationalTheta:
    """``theta = P / q`` with ``P`` an integer antisymmetric matrix."""

    P: SkewMatrix
    q: int

    def __post_init__(self):
        P = SkewMatrix.of(self.P)
        if not P.is_integral():
            raise InputError("P must have integer entries")
        if isinstance(self.q, bool) or int(self.q) != self.q or self.q < 1:
            raise InputError(f"q must be a positive integer, got {self.q!r}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "q", int(self.q))

    @classmethod
    def from_theta(cls, theta: RatMatrix) -> "RationalTheta":
        theta = SkewMatrix.of(theta)
        q = reduce(math.lcm, (v.denominator for v in theta.flat()), 1)
        return cls(SkewMatrix.of(theta.scale(q)), q)

    @property
    def n(self) -> int:
        return self.P.n

    @property
    def theta(self) -> SkewMatrix:
        return SkewMatrix.of(self.P.scale(Fraction(1, self.q)))

    @property
    def m(self) -> int:
        return 2 * self.q * self.q

    def int_matrix(self) -> np.ndarray:
        return np.array([[int(v) for v in row] for row in self.P.entries], dtype=np.int64).reshape(
            self.n, self.n
        )

    def to_json(self) -> dict:
        return {"q": self.q, "P": self.P.to_json()}

    @classmethod
    def from_json(cls, doc: dict) -> "RationalTheta":
        try:
            return cls(SkewMatrix.from_json(doc["P"]), doc["q"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad RationalTheta document: {exc}") from exc


@dataclass
class Representation:
    rt: RationalTheta
    generators: list[PhasePermMatrix]
    coords: np.ndarray  # (dim, n) residues of each basis index
    L: np.ndarray

    @property
    def n(self) -> int:
        return self.rt.n

    @property
    def q(self) -> int:
        return self.rt.q

    @property
    def m(self) -> int:
        return self.rt.m

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def index(self, coords: np.ndarray) -> np.ndarray:
        weights = self.q ** np.arange(self.n, dtype=np.int64)
        return (np.asarray(coords, dtype=np.int64) % self.q) @ weights


def build_rep(rt: RationalTheta, max_dim: int = MAX_DIM) -> Representation:
    n, q, m = rt.n, rt.q, rt.m
    dim = q**n
    if dim > max_dim:
        raise InputError(f"q^n = {dim} exceeds the dimension cap {max_dim}")
    coords = np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int64)[:, ::-1].reshape(dim, n)
    L = np.tril(rt.int_matrix(), -1)
    rep = Representation(rt, [], coords, L)
    for j in range(n):
        target = coords.copy()
        target[:, j] += 1
        phase = 2 * q * (coords @ L[j])
        rep.generators.append(PhasePermMatrix(rep.index(target), phase, m))
    return rep


def _weyl_arrays(rep: Representation, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stacked ``perm``/``phase`` rows of ``U_x`` for each row ``x`` of ``xs``."""
    xs = np.asarray(xs, dtype=np.int64).reshape(-1, rep.n)
    q, m = rep.q, rep.m
    scalar = q * np.einsum("ki,ij,kj->k", xs, rep.L, xs)
    # 2q x.L v for every (x, v); reduce v mod q first so values stay small
    mixed = 2 * q * ((xs @ rep.L) @ rep.coords.T)
    phases = (scalar[:, None] + mixed) % m
    shifted = rep.coords[None, :, :] + xs[:, None, :]
    perms = rep.index(shifted.reshape(-1, rep.n)).reshape(xs.shape[0], rep.dim)
    return perms, phases


def u_elem(rep: Representation, x: Sequence[int]) -> PhasePermMatrix:
    x = np.asarray([int(v) for v in x], dtype=np.int64)
    if x.shape != (rep.n,):
        raise DimensionMismatch(f"x must have {rep.n} entries")
    perms, phases = _weyl_arrays(rep, x)
    return PhasePermMatrix(perms[0], phases[0], rep.m)


def monomial(rep: Representation, x: Sequence[int]) -> PhasePermMatrix:
    """Ordered product ``U_1^{x_1} ... U_n^{x_n}`` by repeated multiplication."""
    out = PhasePermMatrix.identity(rep.dim, rep.m)
    for g, k in zip(rep.generators, x):
        out = out @ (g ** int(k))
    return out


def gamma_exponent(rt: RationalTheta, x, y, P: np.ndarray | None = None) -> int:
    """Exponent of ``gamma(x, y) = e(x.theta y / 2)`` as a power of ``zeta``."""
    P = rt.int_matrix() if P is None else P
    return int(rt.q * (np.asarray(x, dtype=np.int64) @ P @ np.asarray(y, dtype=np.int64))) % rt.m


# -- verification ---------------------------------------------------------------


@dataclass
class RepReport:
    relation: str
    ok: bool
    checked: int = 0
    radius: int | None = None
    counterexample: dict | None = None
    extra: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        doc = {"relation": self.relation, "ok": self.ok, "checked": self.checked}
        if self.radius is not None:
            doc["radius"] = self.radius
        if self.counterexample is not None:
            doc["counterexample"] = self.counterexample
        doc.update(self.extra)
        return doc


def verify_relations(rep: Representation) -> RepReport:
    """``U_k U_j = e(theta_kj) U_j U_k`` for all ``k, j``."""
    P = rep.rt.int_matrix()
    checked = 0
    for k, j in itertools.product(range(rep.n), repeat=2):
        lhs = rep.generators[k] @ rep.generators[j]
        rhs = (rep.generators[j] @ rep.generators[k]).times_root(2 * rep.q * int(P[k, j]))
        checked += 1
        if lhs != rhs:
            return RepReport("commutation", False, checked, counterexample={"k": k + 1, "j": j + 1})
    return RepReport("commutation", True, checked)


def commutation_exponents(rep: Representation) -> list[list[int]]:
    """``c[k][j]`` with ``U_k U_j = zeta^c U_j U_k``, read off the matrices."""
    out = []
    for k in range(rep.n):
        row = []
        for j in range(rep.n):
            lhs = rep.generators[k] @ rep.generators[j]
            r = lhs.scalar_ratio(rep.generators[j] @ rep.generators[k])
            if r is None:
                raise InputError("generators do not commute up to a scalar")
            row.append(r)
        out.append(row)
    return out


def choose_radius(n: int, dim: int, radius: int) -> int:
    r = radius
    while r > 1 and ((4 * r + 1) ** n * dim > TABLE_BUDGET or (2 * r + 1) ** (2 * n) * dim > PAIR_BUDGET):
        r -= 1
    return r


def _box(n: int, r: int) -> np.ndarray:
    return np.array(list(itertools.product(range(-r, r + 1), repeat=n)), dtype=np.int64).reshape(-1, n)


def _box_index(v: np.ndarray, r: int) -> np.ndarray:
    n = v.shape[-1]
    weights = (2 * r + 1) ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (v + r) @ weights


def _pair_check(rep: Representation, lattice_map: np.ndarray, P_eff: np.ndarray, radius: int, relation: str):
    n = rep.n
    r = choose_radius(n, rep.dim, radius)
    big = _box(n, 2 * r)
    perms, phases = _weyl_arrays(rep, big @ lattice_map.T)
    small = _box(n, r)
    ix = np.repeat(np.arange(small.shape[0]), small.shape[0])
    iy = np.tile(np.arange(small.shape[0]), small.shape[0])
    X, Y = small[ix], small[iy]
    shifts = (rep.q * np.einsum("ki,ij,kj->k", X, P_eff, Y)) % rep.m
    bx, by, bz = _box_index(X, 2 * r), _box_index(Y, 2 * r), _box_index(X + Y, 2 * r)
    bad = kernels.check_pairs(perms, phases, bx, by, bz, shifts, rep.m)
    report = RepReport(relation, bad < 0, int(ix.size), r)
    if bad >= 0:
        report.checked = bad + 1
        report.counterexample = {"x": X[bad].tolist(), "y": Y[bad].tolist()}
    return report


def verify_cocycle(rep: Representation, radius: int = 2) -> RepReport:
    """``U_x U_y = gamma(x, y) U_{x+y}`` on all pairs in a box, plus the
    skew identity ``gamma(x, y) / gamma(y, x) = e(x.theta y)``."""
    zero = u_elem(rep, [0] * rep.n)
    if zero != PhasePermMatrix.identity(rep.dim, rep.m):
        return RepReport("cocycle", False, counterexample={"x": [0] * rep.n})
    for j in range(rep.n):
        e = [0] * rep.n
        e[j] = 1
        if u_elem(rep, e) != rep.generators[j]:
            return RepReport("cocycle", False, counterexample={"x": e})
    P = rep.rt.int_matrix()
    report = _pair_check(rep, np.eye(rep.n, dtype=np.int64), P, radius, "cocycle")
    if report.ok:
        small = _box(rep.n, report.radius)
        gam = (rep.q * (small @ P @ small.T)) % rep.m  # gam[a, b] = gamma(x_a, x_b)
        rho = (2 * rep.q * (small @ P @ small.T)) % rep.m
        bad = np.argwhere((gam - gam.T - rho) % rep.m)
        if bad.size:
            a, b = bad[0]
            report.ok = False
            report.counterexample = {"x": small[a].tolist(), "y": small[b].tolist(), "identity": "skew"}
    return report


def verify_rho_iso(rep: Representation, R, radius: int = 2) -> RepReport:
    """``U_{R^t x} U_{R^t y} = e(x.theta' y / 2) U_{R^t (x+y)}`` with
    ``theta' = R theta R^t``: the Weyl elements along the transformed
    lattice realize the cocycle of ``theta'``."""
    R = R if isinstance(R, RatMatrix) else RatMatrix(R)
    if R.shape != (rep.n, rep.n) or not R.is_integral():
        raise NotUnimodular(f"R must be an integer {rep.n}x{rep.n} matrix")
    if abs(det(R)) != 1:
        raise NotUnimodular(f"|det R| = {abs(det(R))}, expected 1")
    Ri = np.array([[int(v) for v in row] for row in R.entries], dtype=np.int64)
    P_new = Ri @ rep.rt.int_matrix() @ Ri.T
    report = _pair_check(rep, Ri.T, P_new, radius, "rho-isomorphism")
    report.extra["theta_prime"] = RationalTheta(SkewMatrix(P_new.tolist()), rep.q).theta.to_json()
    return report


def verify_nu_shift(rt: RationalTheta, N, max_dim: int = MAX_DIM) -> RepReport:
    """``P -> P + qN`` (``theta -> theta + N``) leaves the commutation
    phases of the representation unchanged."""
    N = SkewMatrix.of(N if isinstance(N, RatMatrix) else RatMatrix(N))
    if not N.is_integral():
        raise InputError("N must have integer entries")
    shifted = RationalTheta(SkewMatrix.of(rt.P + N.scale(rt.q)), rt.q)
    a, b = build_rep(rt, max_dim), build_rep(shifted, max_dim)
    ok_a, ok_b = verify_relations(a), verify_relations(b)
    ca, cb = commutation_exponents(a), commutation_exponents(b)
    ok = bool(ok_a) and bool(ok_b) and ca == cb
    report = RepReport("nu-shift", ok, rt.n * rt.n)
    if not ok:
        report.counterexample = {"exponents": ca, "shifted_exponents": cb}
    return report
