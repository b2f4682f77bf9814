"""Grassmann-algebra realization of the action.

``F_n`` has basis ``a^S`` for subsets ``S`` of ``{1..n}``; internally a
subset is a bitmask with bit ``j-1`` standing for ``a^j`` and operator
matrices are indexed by bitmask.  ``theta_hat(theta) = exp(1/2 a theta a)``
sits inside ``F_n``; creation ``a^j`` and annihilation ``d/da^k`` operators
satisfy the CAR, and a group element ``g`` acts on them by

    alpha_g(x_j) = sum_i M[i, j] x_i,     x = (a^1..a^n, b_1..b_n)

(column convention, so that ``g -> alpha_g`` is a homomorphism).  The
intertwiner ``U`` with ``alpha_g(x) U = U x`` carries ``theta_hat(theta)``
to a multiple of ``theta_hat(g theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import (
    AmbiguousIntertwiner,
    DimensionMismatch,
    DomainFailure,
    IndexOutOfRange,
    InputError,
    InternalAssertionFailure,
    NoIntertwiner,
    OutsideDomain,
)
from .exactmat import RatMatrix, SkewMatrix, nullspace, parse_rational
from .group_onn import GroupElement, act, in_domain

MAX_N = 8
CERTIFY_MAX_N = 4
_PRIMES = (2_147_483_647, 2_147_483_629, 2_147_483_587)

_ZERO = Fraction(0)


def mask_to_subset(mask: int) -> tuple[int, ...]:
    return tuple(j + 1 for j in range(mask.bit_length()) if mask >> j & 1)


def subset_to_mask(subset: Iterable[int]) -> int:
    mask = 0
    for j in subset:
        mask |= 1 << (j - 1)
    return mask


@lru_cache(maxsize=None)
def lex_order(n: int) -> tuple[int, ...]:
    """Bitmasks sorted by the lexicographic order of their ascending tuples."""
    return tuple(sorted(range(1 << n), key=mask_to_subset))


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _wedge_sign(s: int, t: int) -> int:
    """Sign of ``a^S a^T = sign * a^{S u T}`` for disjoint ``S, T``."""
    swaps = 0
    tt = t
    while tt:
        low = tt & -tt
        swaps += _popcount(s & ~((low << 1) - 1))
        tt ^= low
    return -1 if swaps & 1 else 1


class GrassmannElement:
    """Element ``sum_S c_S a^S`` of ``F_n``; zero coefficients are dropped."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: dict[int, Fraction] | None = None):
        self.n = n
        full = (1 << n) - 1
        clean = {}
        for mask, c in (coeffs or {}).items():
            if mask & ~full:
                raise IndexOutOfRange(f"subset {mask_to_subset(mask)} exceeds n={n}")
            c = parse_rational(c)
            if c:
                clean[mask] = c
        self.coeffs = clean

    @classmethod
    def one(cls, n: int) -> "GrassmannElement":
        return cls(n, {0: Fraction(1)})

    @classmethod
    def generator(cls, n: int, j: int) -> "GrassmannElement":
        return cls(n, {1 << (j - 1): Fraction(1)})

    @classmethod
    def from_vector(cls, n: int, vec: Sequence) -> "GrassmannElement":
        return cls(n, {m: v for m, v in enumerate(vec) if v})

    def vector(self) -> list[Fraction]:
        return [self.coeffs.get(m, _ZERO) for m in range(1 << self.n)]

    def column(self) -> RatMatrix:
        return RatMatrix._raw(tuple((v,) for v in self.vector()), 1 << self.n, 1)

    def coefficient(self, subset: Iterable[int]) -> Fraction:
        return self.coeffs.get(subset_to_mask(subset), _ZERO)

    def parity_parts(self) -> tuple["GrassmannElement", "GrassmannElement"]:
        even = {m: c for m, c in self.coeffs.items() if _popcount(m) % 2 == 0}
        odd = {m: c for m, c in self.coeffs.items() if _popcount(m) % 2}
        return GrassmannElement(self.n, even), GrassmannElement(self.n, odd)

    def _check(self, other: "GrassmannElement"):
        if other.n != self.n:
            raise DimensionMismatch(f"n={self.n} vs n={other.n}")

    def __add__(self, other: "GrassmannElement") -> "GrassmannElement":
        self._check(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, _ZERO) + c
        return GrassmannElement(self.n, out)

    def __sub__(self, other: "GrassmannElement") -> "GrassmannElement":
        return self + other.scale(-1)

    def scale(self, c) -> "GrassmannElement":
        c = parse_rational(c)
        return GrassmannElement(self.n, {m: c * v for m, v in self.coeffs.items()})

    def wedge(self, other: "GrassmannElement") -> "GrassmannElement":
        self._check(other)
        out: dict[int, Fraction] = {}
        for s, c in self.coeffs.items():
            for t, d in other.coeffs.items():
                if s & t:
                    continue
                out[s | t] = out.get(s | t, _ZERO) + _wedge_sign(s, t) * c * d
        return GrassmannElement(self.n, out)

    __mul__ = wedge

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GrassmannElement)
            and self.n == other.n
            and self.coeffs == other.coeffs
        )

    def __repr__(self) -> str:
        terms = " + ".join(
            f"{self.coeffs[m]}*a{list(mask_to_subset(m))}" for m in lex_order(self.n) if m in self.coeffs
        )
        return f"GrassmannElement(n={self.n}: {terms or '0'})"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"subset": list(mask_to_subset(m)), "coeff": str(self.coeffs[m])}
                for m in lex_order(self.n)
                if m in self.coeffs
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GrassmannElement":
        n = int(doc["n"])
        coeffs: dict[int, Fraction] = {}
        for term in doc.get("terms", []):
            mask = subset_to_mask(term["subset"])
            coeffs[mask] = coeffs.get(mask, _ZERO) + parse_rational(term["coeff"])
        return cls(n, coeffs)


def theta_hat(theta: RatMatrix) -> GrassmannElement:
    """``exp(1/2 sum_ij a^i theta_ij a^j)``; the series stops at degree n."""
    theta = SkewMatrix.of(theta)
    n = theta.n
    x = GrassmannElement(
        n, {(1 << i) | (1 << j): theta[i, j] for i in range(n) for j in range(i + 1, n)}
    )
    result = GrassmannElement.one(n)
    term = result
    for k in range(1, n // 2 + 1):
        term = term.wedge(x).scale(Fraction(1, k))
        result = result + term
    return result


# -- operators ----------------------------------------------------------------


@dataclass(frozen=True)
class OperatorMatrix:
    """Linear operator on ``F_n`` as a ``2^n x 2^n`` matrix in the bitmask basis."""

    n: int
    matrix: RatMatrix

    def __post_init__(self):
        size = 1 << self.n
        if self.matrix.shape != (size, size):
            raise DimensionMismatch(f"operator on F_{self.n} must be {size}x{size}")

    @classmethod
    def identity(cls, n: int) -> "OperatorMatrix":
        return cls(n, RatMatrix.identity(1 << n))

    @classmethod
    def zero(cls, n: int) -> "OperatorMatrix":
        return cls(n, RatMatrix.zeros(1 << n, 1 << n))

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return OperatorMatrix(self.n, self.matrix @ other.matrix)
        if isinstance(other, GrassmannElement):
            return self.apply(other)
        return NotImplemented

    def apply(self, w: GrassmannElement) -> GrassmannElement:
        if w.n != self.n:
            raise DimensionMismatch(f"n={self.n} vs n={w.n}")
        out: dict[int, Fraction] = {}
        e = self.matrix.entries
        for s, c in w.coeffs.items():
            for r in range(1 << self.n):
                v = e[r][s]
                if v:
                    out[r] = out.get(r, _ZERO) + v * c
        return GrassmannElement(self.n, out)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.n, self.matrix + other.matrix)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.n, self.matrix - other.matrix)

    def scale(self, c) -> "OperatorMatrix":
        return OperatorMatrix(self.n, self.matrix.scale(c))

    def is_zero(self) -> bool:
        return self.matrix.is_zero()

    def to_json(self) -> dict:
        return {"n": self.n, "basis": "bitmask", "matrix": self.matrix.to_json()}


def _check_index(n: int, j: int):
    if not 1 <= j <= n:
        raise IndexOutOfRange(f"index {j} outside 1..{n}")


@lru_cache(maxsize=None)
def creation(n: int, j: int) -> OperatorMatrix:
    """Left multiplication by ``a^j``."""
    _check_index(n, j)
    bit = 1 << (j - 1)
    size = 1 << n
    rows = [[0] * size for _ in range(size)]
    for s in range(size):
        if not s & bit:
            rows[s | bit][s] = -1 if _popcount(s & (bit - 1)) & 1 else 1
    return OperatorMatrix(n, RatMatrix(rows))


@lru_cache(maxsize=None)
def annihilation(n: int, k: int) -> OperatorMatrix:
    """Left derivative ``d/da^k``."""
    _check_index(n, k)
    bit = 1 << (k - 1)
    size = 1 << n
    rows = [[0] * size for _ in range(size)]
    for s in range(size):
        if s & bit:
            rows[s ^ bit][s] = -1 if _popcount(s & (bit - 1)) & 1 else 1
    return OperatorMatrix(n, RatMatrix(rows))


def clifford_generator(n: int, index: int) -> OperatorMatrix:
    """``a^index`` for ``index <= n``, else ``b_{index - n}``."""
    if not 1 <= index <= 2 * n:
        raise IndexOutOfRange(f"generator index {index} outside 1..{2 * n}")
    return creation(n, index) if index <= n else annihilation(n, index - n)


def _combination(n: int, coeffs: Sequence[Fraction]) -> OperatorMatrix:
    out = OperatorMatrix.zero(n)
    for idx, c in enumerate(coeffs, start=1):
        if c:
            out = out + clifford_generator(n, idx).scale(c)
    return out


def clifford_image(g: GroupElement, generator_index: int) -> OperatorMatrix:
    """``alpha_g`` of the given generator: ``sum_i M[i, j] x_i``."""
    n = g.n
    if not 1 <= generator_index <= 2 * n:
        raise IndexOutOfRange(f"generator index {generator_index} outside 1..{2 * n}")
    return _combination(n, g.matrix.col(generator_index - 1))


# -- intertwiner ----------------------------------------------------------------


@dataclass(frozen=True)
class IntertwinerSolution:
    U: OperatorMatrix
    kernel_dim: int
    certified_by: str


def _normalize(U: RatMatrix, n: int) -> RatMatrix:
    order = lex_order(n)
    for r in order:
        for c in order:
            v = U[r, c]
            if v:
                return U if v == 1 else U.scale(1 / v)
    raise NoIntertwiner("zero operator")


def _stacked_system(images: list[RatMatrix], gens: list[RatMatrix]) -> list[list[Fraction]]:
    """Rows of ``alpha(x_i) U - U x_i = 0`` in the unknowns ``U[r, s]``."""
    size = gens[0].rows
    rows = []
    for X, G in zip(images, gens):
        xe, ge = X.entries, G.entries
        for r in range(size):
            xr = xe[r]
            for s in range(size):
                row: dict[int, Fraction] = {}
                for rp in range(size):
                    if xr[rp]:
                        idx = rp * size + s
                        row[idx] = row.get(idx, _ZERO) + xr[rp]
                for sp in range(size):
                    if ge[sp][s]:
                        idx = r * size + sp
                        row[idx] = row.get(idx, _ZERO) - ge[sp][s]
                rows.append(row)
    return rows


def _integer_rows(rows: list[dict[int, Fraction]], width: int, p: int) -> np.ndarray:
    out = np.zeros((len(rows), width), dtype=np.int64)
    for i, row in enumerate(rows):
        if not row:
            continue
        lcm = 1
        for v in row.values():
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        for j, v in row.items():
            out[i, j] = (v.numerator * (lcm // v.denominator)) % p
    return out


def _dense_kernel_dim(rows: list[dict[int, Fraction]], width: int) -> list[RatMatrix]:
    dense = RatMatrix._raw(
        tuple(tuple(row.get(j, _ZERO) for j in range(width)) for row in rows), len(rows), width
    )
    return nullspace(dense)


def solve_intertwiner(
    g: GroupElement, *, method: str = "vacuum", certify: bool = True, max_n: int = MAX_N
) -> IntertwinerSolution:
    """Find ``U`` with ``clifford_image(g, i) U == U x_i`` for all ``i``.

    ``method="vacuum"`` solves for ``U(1)`` in the joint kernel of the
    images of the ``b_j`` and then sets ``U(a^S) = alpha(a^s1)...alpha(a^sk) U(1)``;
    every relation is then checked exactly.  The kernel dimension of the
    full stacked system is certified by its rank modulo a large prime
    (rank mod p <= rank over Q, and ``U`` is a nonzero rational solution),
    falling back to an exact rational nullspace if that is inconclusive.

    ``method="dense"`` computes the exact rational nullspace of the full
    ``4^n``-unknown system directly.
    """
    n = g.n
    if n > max_n:
        raise InputError(f"n={n} exceeds the intertwiner cap {max_n}")
    size = 1 << n
    images = [clifford_image(g, i).matrix for i in range(1, 2 * n + 1)]
    gens = [clifford_generator(n, i).matrix for i in range(1, 2 * n + 1)]

    if method == "dense":
        rows = _stacked_system(images, gens)
        basis = _dense_kernel_dim(rows, size * size)
        if not basis:
            raise NoIntertwiner("stacked system has trivial kernel")
        if len(basis) > 1:
            raise AmbiguousIntertwiner(f"kernel dimension {len(basis)}")
        flat = basis[0].col(0)
        U = RatMatrix._raw(
            tuple(tuple(flat[r * size : (r + 1) * size]) for r in range(size)), size, size
        )
        return IntertwinerSolution(OperatorMatrix(n, _normalize(U, n)), 1, "exact-dense")
    if method != "vacuum":
        raise InputError(f"unknown method {method!r}")

    vacuum_rows = [row for X in images[n:] for row in X.entries]
    vac = nullspace(RatMatrix._raw(tuple(vacuum_rows), len(vacuum_rows), size))
    if not vac:
        # any solution maps 1 into this kernel and is generated from U(1)
        raise NoIntertwiner("no vector is annihilated by every alpha(b_j)")
    if len(vac) > 1:
        # only possible when the images violate the CAR; settle it exactly
        return solve_intertwiner(g, method="dense", max_n=max_n)
    omega0 = vac[0]
    cols = []
    for s in range(size):
        v = omega0
        for j in reversed(mask_to_subset(s)):
            v = images[j - 1] @ v
        cols.append(v.col(0))
    U = RatMatrix._raw(tuple(zip(*cols)), size, size)
    for X, G in zip(images, gens):
        if X @ U != U @ G:
            raise NoIntertwiner("the images do not satisfy the CAR; g is not in O(n,n)")
    U = _normalize(U, n)

    kernel_dim, how = 1, "vacuum"
    if certify and n <= CERTIFY_MAX_N:
        rows = _stacked_system(images, gens)
        how = None
        for p in _PRIMES:
            if any(v.denominator % p == 0 for row in rows for v in row.values()):
                continue
            r = kernels.rank_mod_p(_integer_rows(rows, size * size, p), p)
            if size * size - r == 1:
                how = f"rank-mod-{p}"
                break
        if how is None:
            basis = _dense_kernel_dim(rows, size * size)
            kernel_dim, how = len(basis), "exact-dense"
            if kernel_dim > 1:
                raise AmbiguousIntertwiner(f"kernel dimension {kernel_dim}")
    return IntertwinerSolution(OperatorMatrix(n, U), kernel_dim, how)


def intertwiner(g: GroupElement, **kw) -> OperatorMatrix:
    return solve_intertwiner(g, **kw).U


# -- recovering the action -----------------------------------------------------


@dataclass(frozen=True)
class ProjectiveAction:
    theta: SkewMatrix
    scalar: Fraction
    image: GrassmannElement


def projective_act(g: GroupElement, theta: RatMatrix, U: OperatorMatrix | None = None) -> ProjectiveAction:
    """``U_g theta_hat(theta) = c * theta_hat(theta')``; returns ``(theta', c)``.

    Raises :class:`DomainFailure` when the scalar part of ``U_g theta_hat``
    vanishes, which happens exactly off the domain of ``g``.
    """
    theta = SkewMatrix.of(theta)
    if theta.n != g.n:
        raise DimensionMismatch(f"theta is {theta.n}x{theta.n}, g has n={g.n}")
    n = g.n
    if U is None:
        U = intertwiner(g)
    omega = U.apply(theta_hat(theta))
    c = omega.coeffs.get(0, _ZERO)
    if c == 0:
        if in_domain(g, theta):
            raise InternalAssertionFailure("scalar part vanished inside the domain of g")
        raise DomainFailure("scalar part of U_g theta_hat is zero; C theta + D is singular")
    upper = {
        (i, j): omega.coeffs.get((1 << i) | (1 << j), _ZERO) / c
        for i in range(n)
        for j in range(i + 1, n)
    }
    theta_p = SkewMatrix.from_upper(n, upper)
    if omega != theta_hat(theta_p).scale(c):
        raise InternalAssertionFailure("U_g theta_hat is not a multiple of an exponential")
    try:
        expected = act(g, theta)
    except OutsideDomain as exc:
        raise InternalAssertionFailure("scalar part nonzero outside the domain of g") from exc
    if expected != theta_p:
        raise InternalAssertionFailure("Grassmann route disagrees with (A theta + B)(C theta + D)^-1")
    return ProjectiveAction(theta_p, c, omega)


@dataclass
class Eq8Report:
    ok: bool
    base_ok: bool
    failures: list[dict]

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "base_ok": self.base_ok, "failures": self.failures}


def _theta_combination(n: int, theta: SkewMatrix, ops: list[OperatorMatrix], i: int) -> OperatorMatrix:
    out = OperatorMatrix.zero(n)
    for j in range(n):
        if theta[i, j]:
            out = out + ops[j].scale(theta[i, j])
    return out


def verify_eq8(g: GroupElement, theta: RatMatrix, U: OperatorMatrix | None = None) -> Eq8Report:
    """Check the linear equations that characterize ``U_g theta_hat``.

    Base: ``b_i theta_hat == sum_j theta_ij a^j theta_hat``.  Transported:
    ``alpha(b_i) theta_hat' == sum_j theta_ij alpha(a^j) theta_hat'`` with
    ``theta_hat' = U_g theta_hat``, for every ``i``.
    """
    theta = SkewMatrix.of(theta)
    n = g.n
    th = theta_hat(theta)
    base_ok = True
    failures = []
    a_ops = [creation(n, j) for j in range(1, n + 1)]
    for i in range(n):
        lhs = annihilation(n, i + 1).apply(th)
        rhs = _theta_combination(n, theta, a_ops, i).apply(th)
        if lhs != rhs:
            base_ok = False
            failures.append({"index": i + 1, "identity": "base"})
    if U is None:
        U = intertwiner(g)
    th_p = U.apply(th)
    images_a = [clifford_image(g, j) for j in range(1, n + 1)]
    for i in range(n):
        lhs = clifford_image(g, n + i + 1).apply(th_p)
        rhs = _theta_combination(n, theta, images_a, i).apply(th_p)
        if lhs != rhs:
            failures.append({"index": i + 1, "identity": "transported"})
    return Eq8Report(not failures, base_ok, failures)
