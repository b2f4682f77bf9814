"""K-theory side: the integral exterior lattice, trace pairing and trace range.

``K_0`` is identified with the even integral lattice in the dual of
``F_n`` and ``K_1`` with the odd one.  For rational ``theta`` the trace
pairing ``<theta_hat, x>`` takes values in a cyclic subgroup of Q whose
generator is the rational gcd of the sub-Pfaffians of ``theta``.

The second half covers the n = 3 obstruction: ``det(A ^ A) = det(A)^2``
rules out ``A ^ A = diag(-1, 1, 1)``, and a finite exhaustive search
confirms it on a box of integer matrices.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

from . import kernels
from .errors import (
    DimensionMismatch,
    IdentityViolation,
    InputError,
    MalformedVector,
    NonIntegralAction,
    NotInGroup,
    ParityMismatch,
    WrongDimension,
)
from .exactmat import RatMatrix, SkewMatrix, det, invert, parse_rational, pfaffian
from .grassmann import intertwiner, lex_order, mask_to_subset, subset_to_mask, theta_hat
from .group_onn import GroupElement, act

_ZERO = Fraction(0)


def _popcount(x: int) -> int:
    return bin(x).count("1")


# -- lattice -------------------------------------------------------------------


class KLatticeElement:
    """Integral element of the even (``K_0``) or odd (``K_1``) dual lattice."""

    __slots__ = ("n", "parity", "coords")

    def __init__(self, n: int, parity: str, coords: dict[int, int] | None = None):
        if parity not in ("even", "odd"):
            raise InputError(f"parity must be 'even' or 'odd', got {parity!r}")
        want = 0 if parity == "even" else 1
        full = (1 << n) - 1
        clean = {}
        for mask, v in (coords or {}).items():
            if mask & ~full:
                raise MalformedVector(f"subset {mask_to_subset(mask)} exceeds n={n}")
            if isinstance(v, bool) or int(v) != v:
                raise MalformedVector(f"coordinate {v!r} is not an integer")
            if not v:
                continue
            if _popcount(mask) % 2 != want:
                raise ParityMismatch(f"subset {mask_to_subset(mask)} is not {parity}")
            clean[mask] = int(v)
        self.n = n
        self.parity = parity
        self.coords = clean

    @classmethod
    def basis(cls, n: int, subset: Iterable[int]) -> "KLatticeElement":
        mask = subset_to_mask(subset)
        return cls(n, "odd" if _popcount(mask) % 2 else "even", {mask: 1})

    @staticmethod
    def basis_masks(n: int, parity: str) -> list[int]:
        want = 0 if parity == "even" else 1
        return [m for m in lex_order(n) if _popcount(m) % 2 == want]

    def vector(self) -> list[int]:
        return [self.coords.get(m, 0) for m in range(1 << self.n)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, KLatticeElement)
            and (self.n, self.parity, self.coords) == (other.n, other.parity, other.coords)
        )

    def __repr__(self) -> str:
        return f"KLatticeElement(n={self.n}, {self.parity}, {self.to_json()['terms']})"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "parity": self.parity,
            "terms": [
                {"subset": list(mask_to_subset(m)), "coeff": self.coords[m]}
                for m in lex_order(self.n)
                if m in self.coords
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "KLatticeElement":
        try:
            n = int(doc["n"])
            coords: dict[int, int] = {}
            for term in doc.get("terms", []):
                c = term["coeff"]
                if isinstance(c, str):
                    c = parse_rational(c)
                    if c.denominator != 1:
                        raise MalformedVector(f"coordinate {c} is not an integer")
                    c = int(c)
                mask = subset_to_mask(term["subset"])
                coords[mask] = coords.get(mask, 0) + c
            return cls(n, doc["parity"], coords)
        except (KeyError, TypeError) as exc:
            raise MalformedVector(f"bad lattice element: {exc}") from exc


# -- trace -----------------------------------------------------------------------


def rational_gcd(values: Iterable[Fraction]) -> Fraction:
    """Nonnegative generator of the subgroup of Q spanned by ``values``."""
    vals = [parse_rational(v) for v in values]
    vals = [v for v in vals if v]
    if not vals:
        return _ZERO
    lcm = reduce(math.lcm, (v.denominator for v in vals), 1)
    g = reduce(math.gcd, (v.numerator * (lcm // v.denominator) for v in vals), 0)
    return Fraction(abs(g), lcm)


def sub_pfaffians(theta: RatMatrix) -> dict[int, Fraction]:
    """``Pf(theta_S)`` for every even subset ``S`` (bitmask keys)."""
    theta = SkewMatrix.of(theta)
    out = {}
    for mask in range(1 << theta.n):
        if _popcount(mask) % 2 == 0:
            idx = [j - 1 for j in mask_to_subset(mask)]
            out[mask] = pfaffian(theta.restrict(idx))
    return out


def trace_pairing(theta: RatMatrix, x: KLatticeElement) -> Fraction:
    theta = SkewMatrix.of(theta)
    if x.parity != "even":
        raise ParityMismatch("the trace is defined on the even lattice")
    if x.n != theta.n:
        raise DimensionMismatch(f"x has n={x.n}, theta has n={theta.n}")
    pf = sub_pfaffians(theta)
    total = sum((c * pf[m] for m, c in x.coords.items()), _ZERO)
    th = theta_hat(theta)
    if total != sum((c * th.coeffs.get(m, _ZERO) for m, c in x.coords.items()), _ZERO):
        raise IdentityViolation("trace pairing disagrees with <theta_hat, x>")
    return total


@dataclass(frozen=True)
class TraceRange:
    """The subgroup ``generator * Z`` of Q."""

    generator: Fraction

    def __post_init__(self):
        if self.generator < 0:
            raise InputError("trace range generator must be nonnegative")

    def contains(self, value) -> bool:
        value = parse_rational(value)
        if self.generator == 0:
            return value == 0
        return (value / self.generator).denominator == 1

    def to_json(self) -> dict:
        return {"generator": str(self.generator)}


def trace_range(theta: RatMatrix) -> TraceRange:
    return TraceRange(rational_gcd(sub_pfaffians(theta).values()))


def morita_trace_check(theta: RatMatrix, g: GroupElement) -> Fraction:
    """Ratio ``c`` with ``trace_range(g theta) = c * trace_range(theta)``.

    Elements with ``C = 0`` (the rho and nu families and their products)
    carry the trace range to itself and this is asserted; in general ``c``
    is only a positive rational.
    """
    theta = SkewMatrix.of(theta)
    theta_p = act(g, theta)
    before, after = trace_range(theta), trace_range(theta_p)
    c = after.generator / before.generator
    if c <= 0:
        raise IdentityViolation("trace range collapsed")
    if g.has_c_zero() and c != 1:
        raise IdentityViolation(f"trace range changed by {c} under an element with C = 0")
    return c


# -- induced action on the lattice -----------------------------------------------


def content_normalize(m: RatMatrix) -> tuple[RatMatrix, Fraction]:
    """Scale by the unique positive rational giving an integral matrix of content 1."""
    g = rational_gcd(m.flat())
    if g == 0:
        raise NonIntegralAction("zero matrix has no content normalization")
    return m.scale(1 / g), 1 / g


def induced_k_action(g: GroupElement, n: int | None = None) -> RatMatrix:
    """Dual action ``U_g^{-t}`` on the integral lattice, content-normalized.

    The matrix is indexed by bitmasks, like the Grassmann operators.
    """
    if n is not None and n != g.n:
        raise DimensionMismatch(f"g has n={g.n}, asked for n={n}")
    if not g.matrix.is_integral():
        raise NotInGroup("induced lattice action needs an integral element")
    if det(g.matrix) != 1:
        raise NotInGroup("induced lattice action needs det g = +1")
    U = intertwiner(g).matrix
    K, _ = content_normalize(invert(U).T)
    if not K.is_integral():
        raise NonIntegralAction("content normalization left non-integer entries")
    if abs(det(K)) != 1:
        raise NonIntegralAction(f"det = {det(K)}; the lattice is not carried onto itself")
    size = 1 << g.n
    for r in range(size):
        for c in range(size):
            if K[r, c] and (_popcount(r) - _popcount(c)) % 2:
                raise NonIntegralAction("induced action mixes even and odd parts")
    return K


def apply_k_action(K: RatMatrix, x: KLatticeElement) -> KLatticeElement:
    size = 1 << x.n
    if K.shape != (size, size):
        raise DimensionMismatch(f"action is {K.shape}, lattice has rank {size}")
    vec = x.vector()
    out = {}
    for r in range(size):
        v = sum((K[r, c] * vec[c] for c in range(size) if vec[c]), _ZERO)
        if v.denominator != 1:
            raise NonIntegralAction("image is not integral")
        out[r] = int(v)
    return KLatticeElement(x.n, x.parity, out)


# -- the n = 3 obstruction ---------------------------------------------------------

# ordered basis e1^e2, e1^e3, e2^e3 (0-based index pairs)
WEDGE_PAIRS = ((0, 1), (0, 2), (1, 2))
COUNTEREXAMPLE_TARGET = ((-1, 0, 0), (0, 1, 0), (0, 0, 1))


def _as_int3(A) -> list[list[int]]:
    rows = A.entries if isinstance(A, RatMatrix) else A
    rows = [list(r) for r in rows]
    if len(rows) != 3 or any(len(r) != 3 for r in rows):
        raise WrongDimension("wedge_square needs a 3x3 matrix")
    out = []
    for r in rows:
        row = []
        for v in r:
            v = parse_rational(v)
            if v.denominator != 1:
                raise InputError("wedge_square needs integer entries")
            row.append(int(v))
        out.append(row)
    return out


def wedge_square(A) -> RatMatrix:
    """Matrix of ``A ^ A`` on ``(e1^e2, e1^e3, e2^e3)``."""
    a = _as_int3(A)
    return RatMatrix(
        [
            [a[i][j] * a[l][k] - a[l][j] * a[i][k] for (j, k) in WEDGE_PAIRS]
            for (i, l) in WEDGE_PAIRS
        ]
    )


@dataclass
class SearchReport:
    bound: int
    target: list[list[int]]
    checked: int
    expected: int
    hits: list[list[list[int]]] = field(default_factory=list)
    witness: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "bound": self.bound,
            "target": self.target,
            "checked": self.checked,
            "expected": self.expected,
            "hits": self.hits,
            "witness": self.witness,
        }


def _chunk_prefixes(bound: int) -> list[tuple[int, ...]]:
    vals = range(-bound, bound + 1)
    depth = 1 if bound <= 3 else 2
    prefixes: list[tuple[int, ...]] = [()]
    for _ in range(depth):
        prefixes = [p + (v,) for p in prefixes for v in vals]
    return prefixes


def _run_chunk(args):
    bound, prefix, target = args
    return kernels.wedge_search_chunk(bound, list(prefix), target)


def counterexample_search(bound: int, target=COUNTEREXAMPLE_TARGET, workers: int = 1) -> SearchReport:
    """Every 3x3 integer ``A`` with entries in ``[-bound, bound]`` and
    ``wedge_square(A) == target``.

    The box is split into lexicographic prefix chunks; with ``workers > 1``
    they run in a process pool and are merged in chunk order, so the
    report does not depend on scheduling.
    """
    if isinstance(bound, bool) or int(bound) != bound or bound < 1:
        raise InputError(f"bound must be a positive integer, got {bound!r}")
    bound = int(bound)
    tgt = _as_int3(target)
    flat_target = [v for row in tgt for v in row]
    jobs = [(bound, p, flat_target) for p in _chunk_prefixes(bound)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, jobs))
    else:
        results = [_run_chunk(j) for j in jobs]
    checked = sum(r[0] for r in results)
    hits = [[list(h[0:3]), list(h[3:6]), list(h[6:9])] for r in results for h in r[1]]
    expected = (2 * bound + 1) ** 9
    if checked != expected:
        raise IdentityViolation(f"enumerated {checked} matrices, expected {expected}")
    for h in hits:
        if wedge_square(h) != RatMatrix(tgt):
            raise IdentityViolation(f"kernel reported a false hit {h}")
    required = det(RatMatrix(tgt))
    witness = {
        "identity": "det(A^A) = det(A)^2",
        "required_det": str(required),
        "impossible": required < 0,
    }
    return SearchReport(bound, tgt, checked, expected, hits, witness)
