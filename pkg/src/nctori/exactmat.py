"""Exact rational scalars and dense matrices.

Scalars are :class:`fractions.Fraction`; matrices are immutable, row-major,
dense.  Everything here is exact; there is no floating point anywhere.

Wire format shared by every module and the CLI: a rational is the string
``"p/q"`` (or ``"p"`` when ``q == 1``), a matrix is
``{"rows": r, "cols": c, "entries": [[...], ...]}``.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Iterable, Sequence

from .errors import (
    DimensionMismatch,
    InputError,
    InternalAssertionFailure,
    NotAntisymmetric,
    OddDimension,
    SingularInput,
    SingularMatrix,
)

Rational = Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


def parse_rational(value) -> Fraction:
    """Accept ints, Fractions and ``"p/q"`` strings; reject floats."""
    if isinstance(value, bool):
        raise InputError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, _RationalABC)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational: {value!r}") from exc
    raise InputError(f"not an exact rational: {value!r}")


def format_rational(x: Fraction) -> str:
    return str(x)


class RatMatrix:
    """Immutable dense matrix of Fractions."""

    __slots__ = ("rows", "cols", "_e", "_hash")

    def __init__(self, entries: Iterable[Iterable]):
        data = tuple(tuple(parse_rational(v) for v in row) for row in entries)
        ncols = len(data[0]) if data else 0
        if any(len(r) != ncols for r in data):
            raise DimensionMismatch("ragged matrix rows")
        self._set(data, len(data), ncols)

    def _set(self, data, rows, cols):
        self._e = data
        self.rows = rows
        self.cols = cols
        self._hash = None

    @classmethod
    def _raw(cls, data: tuple, rows: int | None = None, cols: int | None = None):
        obj = RatMatrix.__new__(RatMatrix)
        if rows is None:
            rows = len(data)
        if cols is None:
            cols = len(data[0]) if data else 0
        obj._set(data, rows, cols)
        return obj

    @classmethod
    def empty(cls, rows: int, cols: int) -> "RatMatrix":
        return cls.zeros(rows, cols)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls._raw(tuple((_ZERO,) * cols for _ in range(rows)), rows, cols)

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls._raw(
            tuple(tuple(_ONE if i == j else _ZERO for j in range(n)) for i in range(n)), n, n
        )

    @classmethod
    def diag(cls, values: Sequence) -> "RatMatrix":
        vals = [parse_rational(v) for v in values]
        n = len(vals)
        return cls._raw(
            tuple(tuple(vals[i] if i == j else _ZERO for j in range(n)) for i in range(n)), n, n
        )

    @classmethod
    def column(cls, values: Sequence) -> "RatMatrix":
        return cls([[v] for v in values])

    @classmethod
    def from_function(cls, rows: int, cols: int, fn) -> "RatMatrix":
        return cls([[fn(i, j) for j in range(cols)] for i in range(rows)])

    # -- access ---------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def entries(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._e

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self._e[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._e[i]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return tuple(r[j] for r in self._e)

    def flat(self) -> list[Fraction]:
        return [v for r in self._e for v in r]

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return all(v == 0 for r in self._e for v in r)

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for r in self._e for v in r)

    def is_antisymmetric(self) -> bool:
        if not self.is_square():
            return False
        e = self._e
        return all(e[i][j] == -e[j][i] for i in range(self.rows) for j in range(i, self.rows))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RatMatrix":
        e = self._e
        return RatMatrix._raw(tuple(tuple(e[i][j] for j in cols) for i in rows), len(rows), len(cols))

    def block(self, r0: int, r1: int, c0: int, c1: int) -> "RatMatrix":
        return RatMatrix._raw(tuple(r[c0:c1] for r in self._e[r0:r1]), r1 - r0, c1 - c0)

    # -- arithmetic -----------------------------------------------------

    @property
    def T(self) -> "RatMatrix":
        if not (self.rows and self.cols):
            return RatMatrix.zeros(self.cols, self.rows)
        return RatMatrix._raw(tuple(zip(*self._e)), self.cols, self.rows)

    def _check_same(self, other: "RatMatrix"):
        if self.shape != other.shape:
            raise DimensionMismatch(f"shape {self.shape} vs {other.shape}")

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same(other)
        return RatMatrix._raw(
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self._e, other._e)),
            self.rows, self.cols,
        )

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same(other)
        return RatMatrix._raw(
            tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self._e, other._e)),
            self.rows, self.cols,
        )

    def __neg__(self) -> "RatMatrix":
        return RatMatrix._raw(tuple(tuple(-a for a in r) for r in self._e), self.rows, self.cols)

    def scale(self, c) -> "RatMatrix":
        c = parse_rational(c)
        return RatMatrix._raw(tuple(tuple(c * a for a in r) for r in self._e), self.rows, self.cols)

    def __mul__(self, c) -> "RatMatrix":
        if isinstance(c, RatMatrix):
            raise TypeError("use @ for matrix products")
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if not isinstance(other, RatMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        cols_o = other.cols
        oe = other._e
        out = []
        for r in self._e:
            acc = [_ZERO] * cols_o
            for k, a in enumerate(r):
                if a:
                    ok = oe[k]
                    for j in range(cols_o):
                        b = ok[j]
                        if b:
                            acc[j] += a * b
            out.append(tuple(acc))
        return RatMatrix._raw(tuple(out), self.rows, cols_o)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and self._e == other._e

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, self._e))
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(v) for v in r) for r in self._e)
        return f"RatMatrix({self.rows}x{self.cols}: [{body}])"

    # -- serialization --------------------------------------------------

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[format_rational(v) for v in r] for r in self._e],
        }

    @classmethod
    def from_json(cls, doc) -> "RatMatrix":
        if isinstance(doc, list):
            return cls(doc)
        try:
            rows, cols, entries = doc["rows"], doc["cols"], doc["entries"]
        except (KeyError, TypeError) as exc:
            raise InputError("matrix JSON needs rows, cols, entries") from exc
        m = cls(entries) if entries else cls.zeros(rows, cols)
        if m.shape != (rows, cols):
            raise DimensionMismatch(f"declared {rows}x{cols}, got {m.rows}x{m.cols}")
        return m


class SkewMatrix(RatMatrix):
    """Antisymmetric square matrix, the point ``theta`` of the parameter space."""

    __slots__ = ()

    def __init__(self, entries):
        super().__init__(entries)
        _require_skew(self)

    @classmethod
    def of(cls, m: RatMatrix) -> "SkewMatrix":
        if isinstance(m, SkewMatrix):
            return m
        _require_skew(m)
        obj = SkewMatrix.__new__(SkewMatrix)
        obj._set(m._e, m.rows, m.cols)
        return obj

    @classmethod
    def from_upper(cls, n: int, upper: dict) -> "SkewMatrix":
        """Build from ``{(i, j): value}`` with 0-based ``i < j``."""
        rows = [[_ZERO] * n for _ in range(n)]
        for (i, j), v in upper.items():
            v = parse_rational(v)
            rows[i][j] = v
            rows[j][i] = -v
        return cls(rows)

    @classmethod
    def zero(cls, n: int) -> "SkewMatrix":
        return cls.of(RatMatrix.zeros(n, n))

    @property
    def n(self) -> int:
        return self.rows

    @property
    def inner(self) -> RatMatrix:
        return RatMatrix._raw(self._e, self.rows, self.cols)

    def restrict(self, idx: Sequence[int]) -> "SkewMatrix":
        return SkewMatrix.of(self.submatrix(idx, idx))

    @classmethod
    def from_json(cls, doc) -> "SkewMatrix":
        return cls.of(RatMatrix.from_json(doc))

    def __repr__(self) -> str:
        return "Skew" + super().__repr__()


def _require_skew(m: RatMatrix):
    if not m.is_square():
        raise DimensionMismatch(f"antisymmetric matrix must be square, got {m.shape}")
    if not m.is_antisymmetric():
        raise NotAntisymmetric("matrix is not antisymmetric")


def block_matrix(blocks: Sequence[Sequence[RatMatrix]]) -> RatMatrix:
    """Assemble a matrix from a grid of blocks (``None`` never allowed)."""
    rows = []
    for brow in blocks:
        h = brow[0].rows
        if any(b.rows != h for b in brow):
            raise DimensionMismatch("block row heights differ")
        for i in range(h):
            rows.append(tuple(v for b in brow for v in b._e[i]))
    ncols = len(rows[0]) if rows else 0
    if any(len(r) != ncols for r in rows):
        raise DimensionMismatch("block column widths differ")
    return RatMatrix._raw(tuple(rows), len(rows), ncols)


def hstack(mats: Sequence[RatMatrix]) -> RatMatrix:
    return block_matrix([list(mats)])


def vstack(mats: Sequence[RatMatrix]) -> RatMatrix:
    return block_matrix([[m] for m in mats])


# -- elimination kernels -------------------------------------------------


def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form, in place; returns (rows, pivot columns)."""
    pivots: list[int] = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pr = rows[r]
        inv = 1 / pr[c]
        if inv != 1:
            pr = rows[r] = [v * inv for v in pr]
        nz = [j for j in range(c, len(pr)) if pr[j] != 0]
        for i in range(nrows):
            if i != r:
                f = rows[i][c]
                if f != 0:
                    ri = rows[i]
                    for j in nz:
                        ri[j] -= f * pr[j]
        pivots.append(c)
        r += 1
    return rows, pivots


def rank(m: RatMatrix) -> int:
    _, piv = _rref([list(r) for r in m.entries], m.cols)
    return len(piv)


def det(m: RatMatrix) -> Fraction:
    if not m.is_square():
        raise DimensionMismatch("determinant of a non-square matrix")
    n = m.rows
    a = [list(r) for r in m.entries]
    d = _ONE
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return _ZERO
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            d = -d
        pc = a[c]
        p = pc[c]
        d *= p
        for i in range(c + 1, n):
            f = a[i][c]
            if f:
                f = f / p
                ai = a[i]
                for j in range(c + 1, n):
                    if pc[j]:
                        ai[j] -= f * pc[j]
    return d


def invert(m: RatMatrix) -> RatMatrix:
    """Exact inverse; raises :class:`SingularMatrix` when ``det(m) == 0``."""
    if not m.is_square():
        raise DimensionMismatch(f"cannot invert non-square {m.shape}")
    n = m.rows
    aug = [list(r) + [_ONE if i == j else _ZERO for j in range(n)] for i, r in enumerate(m.entries)]
    rows, piv = _rref(aug, n)
    if len(piv) < n:
        raise SingularMatrix("matrix is singular")
    return RatMatrix._raw(tuple(tuple(r[n:]) for r in rows), n, n)


def solve(m: RatMatrix, rhs: RatMatrix) -> RatMatrix:
    """Solve ``m X = rhs`` for square invertible ``m``."""
    if not m.is_square() or m.rows != rhs.rows:
        raise DimensionMismatch("solve needs square m and matching rhs")
    n, k = m.rows, rhs.cols
    aug = [list(r) + list(s) for r, s in zip(m.entries, rhs.entries)]
    rows, piv = _rref(aug, n)
    if len(piv) < n:
        raise SingularMatrix("matrix is singular")
    return RatMatrix._raw(tuple(tuple(r[n:]) for r in rows), n, k)


def nullspace(m: RatMatrix) -> list[RatMatrix]:
    """Basis of the exact rational kernel, as column vectors.

    Each basis vector has a 1 in one free coordinate and 0 in the others,
    so the basis is linearly independent by construction.
    """
    ncols = m.cols
    rows, piv = _rref([list(r) for r in m.entries], ncols)
    pivset = set(piv)
    basis = []
    for free in range(ncols):
        if free in pivset:
            continue
        v = [_ZERO] * ncols
        v[free] = _ONE
        for r, pc in enumerate(piv):
            v[pc] = -rows[r][free]
        basis.append(RatMatrix._raw(tuple((x,) for x in v), ncols, 1))
    return basis


# -- skew-symmetric kernels ------------------------------------------------


def pfaffian(s: RatMatrix) -> Fraction:
    """Pfaffian by skew Schur-complement elimination.

    Convention: ``Pf([[0, a], [-a, 0]]) == a``; ``Pf`` of the empty matrix is 1.
    """
    s = SkewMatrix.of(s)
    n = s.n
    if n % 2:
        raise OddDimension(f"Pfaffian needs even dimension, got {n}")
    a = [list(r) for r in s.entries]
    result = _ONE
    while a:
        k = len(a)
        j = next((c for c in range(1, k) if a[0][c] != 0), None)
        if j is None:
            return _ZERO
        if j != 1:
            # simultaneous row/column transposition 1 <-> j flips the sign
            a[1], a[j] = a[j], a[1]
            for r in a:
                r[1], r[j] = r[j], r[1]
            result = -result
        piv = a[0][1]
        result *= piv
        u = a[0][2:]
        v = a[1][2:]
        a = [
            [a[i + 2][j + 2] - (u[i] * v[j] - v[i] * u[j]) / piv for j in range(k - 2)]
            for i in range(k - 2)
        ]
    return result


def standard_symplectic(p: int) -> RatMatrix:
    """``J0 = [[0, I_p], [-I_p, 0]]``."""
    z, i = RatMatrix.zeros(p, p), RatMatrix.identity(p)
    return block_matrix([[z, i], [-i, z]])


def skew_congruence_factor(theta11: RatMatrix) -> RatMatrix:
    """Invertible ``T`` with ``T^t J0 T == -theta11``.

    Symplectic Gram-Schmidt on the form ``w = -theta11``: take the lowest
    remaining basis vector ``f``, pair it with the lowest remaining ``v``
    having ``w(f, v) != 0``, set ``g = v / w(f, v)`` and project the rest
    off ``span(f, g)``.  With ``P = [f_1..f_p | g_1..g_p]`` one has
    ``P^t w P == J0`` and ``T = P^{-1}``.
    """
    theta11 = SkewMatrix.of(theta11)
    dim = theta11.n
    if dim % 2:
        raise OddDimension(f"block dimension must be even, got {dim}")
    form = (-theta11.inner).entries

    def w(x, y):
        return sum(
            (x[i] * form[i][j] * y[j] for i in range(dim) if x[i] for j in range(dim) if y[j]),
            _ZERO,
        )

    remaining = [[_ONE if i == j else _ZERO for i in range(dim)] for j in range(dim)]
    fs, gs = [], []
    while remaining:
        f = remaining.pop(0)
        partner = None
        for idx, v in enumerate(remaining):
            c = w(f, v)
            if c != 0:
                partner = idx
                break
        if partner is None:
            raise SingularInput("theta11 is not invertible")
        v = remaining.pop(partner)
        g = [x / c for x in v]
        projected = []
        for x in remaining:
            a, b = w(x, g), w(x, f)
            projected.append([xi - a * fi + b * gi for xi, fi, gi in zip(x, f, g)])
        remaining = projected
        fs.append(f)
        gs.append(g)
    basis = RatMatrix(list(zip(*(fs + gs))))
    t = invert(basis)
    j0 = standard_symplectic(dim // 2)
    if t.T @ j0 @ t != -theta11.inner:
        raise InternalAssertionFailure("T^t J0 T != -theta11")
    return t
