"""O(n,n|Z) in block form, its generators, words, and the fractional-linear
action ``theta -> (A theta + B)(C theta + D)^{-1}`` on antisymmetric matrices.

A group element is the 2n x 2n matrix ``[[A, B], [C, D]]`` acting on
coordinates ``(a^1..a^n, b_1..b_n)`` and preserving the split form
``Q = [[0, I], [I, 0]]``, i.e. ``M^t Q M == Q``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .errors import (
    DimensionMismatch,
    InputError,
    InternalAssertionFailure,
    NotAntisymmetric,
    NotInGroup,
    NotUnimodular,
    OddKRejected,
    OutsideDomain,
    SingularMatrix,
)
from .exactmat import RatMatrix, SkewMatrix, block_matrix, det, invert


def split_form(n: int) -> RatMatrix:
    z, i = RatMatrix.zeros(n, n), RatMatrix.identity(n)
    return block_matrix([[z, i], [i, z]])


class GroupElement:
    """Element of O(n,n) with rational (normally integer) entries.

    ``check=False`` skips the block-equation test.  The generator builders
    use it since their inputs are validated first; the tests check the
    block equations on every generator family directly.
    """

    __slots__ = ("n", "matrix")

    def __init__(self, matrix: RatMatrix, *, check: bool = True, integral: bool = True):
        if not matrix.is_square() or matrix.rows % 2:
            raise DimensionMismatch(f"group element must be 2n x 2n, got {matrix.shape}")
        self.n = matrix.rows // 2
        self.matrix = matrix
        if check:
            if integral and not matrix.is_integral():
                raise NotInGroup("group element must have integer entries")
            bad = self.block_equation_failures()
            if bad:
                raise NotInGroup("block equations fail: " + ", ".join(bad))

    @classmethod
    def from_blocks(cls, A, B, C, D, **kw) -> "GroupElement":
        return cls(block_matrix([[A, B], [C, D]]), **kw)

    @classmethod
    def identity(cls, n: int) -> "GroupElement":
        return cls(RatMatrix.identity(2 * n), check=False)

    @property
    def A(self) -> RatMatrix:
        return self.matrix.block(0, self.n, 0, self.n)

    @property
    def B(self) -> RatMatrix:
        return self.matrix.block(0, self.n, self.n, 2 * self.n)

    @property
    def C(self) -> RatMatrix:
        return self.matrix.block(self.n, 2 * self.n, 0, self.n)

    @property
    def D(self) -> RatMatrix:
        return self.matrix.block(self.n, 2 * self.n, self.n, 2 * self.n)

    def block_equation_failures(self) -> list[str]:
        if self.matrix.is_integral():
            return self._int_block_failures()
        A, B, C, D = self.A, self.B, self.C, self.D
        n = self.n
        out = []
        if not (A.T @ C + C.T @ A).is_zero():
            out.append("A^tC + C^tA != 0")
        if not (B.T @ D + D.T @ B).is_zero():
            out.append("B^tD + D^tB != 0")
        if A.T @ D + C.T @ B != RatMatrix.identity(n):
            out.append("A^tD + C^tB != I")
        return out

    def _int_block_failures(self) -> list[str]:
        # same three equations on plain ints; Fraction arithmetic dominates otherwise
        n = self.n
        m = [[int(x) for x in row] for row in self.matrix.entries]
        A = [r[:n] for r in m[:n]]
        B = [r[n:] for r in m[:n]]
        C = [r[:n] for r in m[n:]]
        D = [r[n:] for r in m[n:]]

        def tmul(X, Y):
            # X^t Y
            return [[sum(X[k][i] * Y[k][j] for k in range(n)) for j in range(n)] for i in range(n)]

        def plus(X, Y):
            return [[a + b for a, b in zip(r, s)] for r, s in zip(X, Y)]

        zero = [[0] * n for _ in range(n)]
        eye = [[int(i == j) for j in range(n)] for i in range(n)]
        out = []
        if plus(tmul(A, C), tmul(C, A)) != zero:
            out.append("A^tC + C^tA != 0")
        if plus(tmul(B, D), tmul(D, B)) != zero:
            out.append("B^tD + D^tB != 0")
        if plus(tmul(A, D), tmul(C, B)) != eye:
            out.append("A^tD + C^tB != I")
        return out

    def preserves_form(self) -> bool:
        q = split_form(self.n)
        return self.matrix.T @ q @ self.matrix == q

    def det(self) -> Fraction:
        return det(self.matrix)

    def in_so(self) -> bool:
        return self.det() == 1

    def has_c_zero(self) -> bool:
        return self.C.is_zero()

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupElement) and self.matrix == other.matrix

    def __hash__(self) -> int:
        return hash(self.matrix)

    def __repr__(self) -> str:
        return f"GroupElement(n={self.n}, {self.matrix!r})"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "A": self.A.to_json(),
            "B": self.B.to_json(),
            "C": self.C.to_json(),
            "D": self.D.to_json(),
        }

    @classmethod
    def from_json(cls, doc: dict, **kw) -> "GroupElement":
        try:
            blocks = [RatMatrix.from_json(doc[k]) for k in "ABCD"]
        except KeyError as exc:
            raise InputError(f"group element JSON missing block {exc}") from exc
        n = doc.get("n", blocks[0].rows)
        if any(b.shape != (n, n) for b in blocks):
            raise DimensionMismatch(f"all blocks must be {n}x{n}")
        return cls.from_blocks(*blocks, **kw)


# -- generators -----------------------------------------------------------


def _as_matrix(m) -> RatMatrix:
    return m if isinstance(m, RatMatrix) else RatMatrix(m)


def _integer_skew(N) -> RatMatrix:
    N = _as_matrix(N)
    if not N.is_square() or not N.is_antisymmetric():
        raise NotAntisymmetric("N must be a square antisymmetric matrix")
    if not N.is_integral():
        raise InputError("N must have integer entries")
    return N


def rho(R) -> GroupElement:
    """``A = R``, ``D = (R^{-1})^t``; requires ``det R = +-1``."""
    R = _as_matrix(R)
    if not R.is_square() or not R.is_integral():
        raise NotUnimodular("R must be a square integer matrix")
    if abs(det(R)) != 1:
        raise NotUnimodular(f"|det R| = {abs(det(R))}, expected 1")
    n = R.rows
    z = RatMatrix.zeros(n, n)
    return GroupElement.from_blocks(R, z, z, invert(R).T, check=False)


def nu(N) -> GroupElement:
    """``a -> a + N b``: blocks ``[[I, N], [0, I]]``."""
    N = _integer_skew(N)
    n = N.rows
    i, z = RatMatrix.identity(n), RatMatrix.zeros(n, n)
    return GroupElement.from_blocks(i, N, z, i, check=False)


def mu(N) -> GroupElement:
    """``b -> b + N a``: blocks ``[[I, 0], [N, I]]``."""
    N = _integer_skew(N)
    n = N.rows
    i, z = RatMatrix.identity(n), RatMatrix.zeros(n, n)
    return GroupElement.from_blocks(i, z, N, i, check=False)


def sigma(k: int, n: int, *, allow_odd: bool = False) -> GroupElement:
    """Swap the first ``k`` coordinate pairs ``a^i <-> b_i``.

    Odd ``k`` gives determinant -1 and is rejected unless ``allow_odd``.
    """
    if not 0 <= k <= n:
        raise InputError(f"need 0 <= k <= n, got k={k}, n={n}")
    if k % 2 and not allow_odd:
        raise OddKRejected(f"sigma_{k} is not in SO(n,n|Z) for odd k")
    swap = RatMatrix.diag([1] * k + [0] * (n - k))
    keep = RatMatrix.diag([0] * k + [1] * (n - k))
    return GroupElement.from_blocks(keep, swap, swap, keep, check=False)


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    if g.n != h.n:
        raise DimensionMismatch(f"cannot compose n={g.n} with n={h.n}")
    return GroupElement(g.matrix @ h.matrix, check=False)


def inverse(g: GroupElement) -> GroupElement:
    # M^{-1} = Q M^t Q for form-preserving M
    q = split_form(g.n)
    inv = GroupElement(q @ g.matrix.T @ q, check=False)
    if inv.matrix @ g.matrix != RatMatrix.identity(2 * g.n):
        inv = GroupElement(invert(g.matrix), check=False)
    return inv


# -- words ------------------------------------------------------------------


@dataclass(frozen=True)
class Rho:
    R: RatMatrix

    def element(self, n: int) -> GroupElement:
        return rho(self.R)

    def to_json(self) -> dict:
        return {"kind": "rho", "R": self.R.to_json()}


@dataclass(frozen=True)
class Nu:
    N: RatMatrix

    def element(self, n: int) -> GroupElement:
        return nu(self.N)

    def to_json(self) -> dict:
        return {"kind": "nu", "N": self.N.to_json()}


@dataclass(frozen=True)
class Mu:
    N: RatMatrix

    def element(self, n: int) -> GroupElement:
        return mu(self.N)

    def to_json(self) -> dict:
        return {"kind": "mu", "N": self.N.to_json()}


@dataclass(frozen=True)
class SigmaK:
    k: int
    allow_odd: bool = False

    def element(self, n: int) -> GroupElement:
        return sigma(self.k, n, allow_odd=self.allow_odd)

    def to_json(self) -> dict:
        doc = {"kind": "sigma", "k": self.k}
        if self.allow_odd:
            doc["allow_odd"] = True
        return doc


@dataclass(frozen=True)
class Inverse:
    of: "Token"

    def element(self, n: int) -> GroupElement:
        return inverse(self.of.element(n))

    def to_json(self) -> dict:
        return {"kind": "inverse", "of": self.of.to_json()}


Token = Union[Rho, Nu, Mu, SigmaK, Inverse]


def token_from_json(doc: dict) -> Token:
    kind = doc.get("kind")
    if kind == "rho":
        return Rho(RatMatrix.from_json(doc["R"]))
    if kind in ("nu", "mu"):
        N = RatMatrix.from_json(doc["N"])
        return Nu(N) if kind == "nu" else Mu(N)
    if kind == "sigma":
        return SigmaK(int(doc["k"]), bool(doc.get("allow_odd", False)))
    if kind == "inverse":
        return Inverse(token_from_json(doc["of"]))
    raise InputError(f"unknown token kind {kind!r}")


@dataclass(frozen=True)
class GeneratorWord:
    n: int
    tokens: tuple = field(default_factory=tuple)

    def elements(self) -> list[GroupElement]:
        out = []
        for t in self.tokens:
            g = t.element(self.n)
            if g.n != self.n:
                raise DimensionMismatch(f"token {t} has n={g.n}, word has n={self.n}")
            out.append(g)
        return out

    def to_json(self) -> dict:
        return {"n": self.n, "tokens": [t.to_json() for t in self.tokens]}

    @classmethod
    def from_json(cls, doc: dict, n: int | None = None) -> "GeneratorWord":
        tokens = tuple(token_from_json(t) for t in doc["tokens"])
        n = doc.get("n", n)
        if n is None:
            for t in tokens:
                inner = t.of if isinstance(t, Inverse) else t
                if isinstance(inner, Rho):
                    n = inner.R.rows
                elif isinstance(inner, (Nu, Mu)):
                    n = inner.N.rows
                if n is not None:
                    break
        if n is None:
            raise InputError("word dimension n cannot be inferred; add an 'n' field")
        return cls(int(n), tokens)


def evaluate(word: GeneratorWord) -> GroupElement:
    """Product of the tokens, left to right."""
    g = GroupElement.identity(word.n)
    for h in word.elements():
        g = compose(g, h)
    return g


# -- the action -------------------------------------------------------------


def _denominator(g: GroupElement, theta: RatMatrix) -> RatMatrix:
    if theta.shape != (g.n, g.n):
        raise DimensionMismatch(f"theta is {theta.shape}, group element has n={g.n}")
    return g.C @ theta + g.D


def in_domain(g: GroupElement, theta: RatMatrix) -> bool:
    return det(_denominator(g, theta)) != 0


def act(g: GroupElement, theta: RatMatrix) -> SkewMatrix:
    """``(A theta + B)(C theta + D)^{-1}``; raises :class:`OutsideDomain`."""
    theta = SkewMatrix.of(theta)
    try:
        denom_inv = invert(_denominator(g, theta))
    except SingularMatrix as exc:
        raise OutsideDomain("C theta + D is singular") from exc
    out = (g.A @ theta + g.B) @ denom_inv
    if not out.is_antisymmetric():
        raise InternalAssertionFailure("g.theta is not antisymmetric")
    return SkewMatrix.of(out)


def act_stepwise(word: GeneratorWord, theta: RatMatrix) -> SkewMatrix:
    """Apply the tokens right to left, one generator at a time."""
    out = SkewMatrix.of(theta)
    for g in reversed(word.elements()):
        out = act(g, out)
    return out


# -- random sampling --------------------------------------------------------


def random_unimodular(n: int, rng: random.Random, factors: int | None = None) -> RatMatrix:
    """Product of at most 3 elementary or transposition matrices."""
    if factors is None:
        factors = rng.randint(1, 3)
    R = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(factors):
        if n < 2:
            break
        i, j = rng.sample(range(n), 2)
        if rng.random() < 0.5:
            E = [[int(a == b) for b in range(n)] for a in range(n)]
            E[i][j] = rng.choice((-1, 1))
        else:
            perm = list(range(n))
            perm[i], perm[j] = perm[j], perm[i]
            E = [[int(perm[a] == b) for b in range(n)] for a in range(n)]
        R = [[sum(R[a][k] * E[k][b] for k in range(n)) for b in range(n)] for a in range(n)]
    return RatMatrix(R)


def random_integer_skew(n: int, rng: random.Random, lo: int = -2, hi: int = 2) -> SkewMatrix:
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = rng.randint(lo, hi)
            rows[i][j], rows[j][i] = v, -v
    return SkewMatrix(rows)


def random_token(n: int, rng: random.Random) -> Token:
    if n >= 2 and rng.random() < 0.25:
        return SigmaK(2)
    kind = rng.choice(("rho", "nu", "mu"))
    if kind == "rho":
        return Rho(random_unimodular(n, rng))
    N = random_integer_skew(n, rng)
    return Nu(N) if kind == "nu" else Mu(N)


def random_word(n: int, max_len: int, rng: random.Random, min_len: int = 1) -> GeneratorWord:
    length = rng.randint(min_len, max_len)
    return GeneratorWord(n, tuple(random_token(n, rng) for _ in range(length)))


def random_rational_skew(n: int, rng: random.Random, num: int = 9, den: int = 9) -> SkewMatrix:
    upper = {}
    for i in range(n):
        for j in range(i + 1, n):
            upper[(i, j)] = Fraction(rng.randint(-num, num), rng.randint(1, den))
    return SkewMatrix.from_upper(n, upper)


def sample_domain_report(
    theta: RatMatrix, max_word_len: int, count: int, seed: int = 0
) -> dict:
    """Empirical probe of membership in the everywhere-defined set.

    Draws ``count`` seeded words of length at most ``max_word_len`` and
    records how often ``g theta`` is defined.  ``flagged`` counts words whose
    product is defined at theta although some intermediate generator step is
    not; those are reported, never judged.
    """
    theta = SkewMatrix.of(theta)
    n = theta.n
    rng = random.Random(seed)
    defined = stepwise = flagged = 0
    by_len: dict[int, list[int]] = {}
    for _ in range(count):
        word = random_word(n, max_word_len, rng)
        g = evaluate(word)
        ok = in_domain(g, theta)
        try:
            act_stepwise(word, theta)
            step_ok = True
        except OutsideDomain:
            step_ok = False
        defined += ok
        stepwise += step_ok
        flagged += ok and not step_ok
        if step_ok and not ok:
            raise InternalAssertionFailure("stepwise action defined but product undefined")
        tally = by_len.setdefault(len(word.tokens), [0, 0])
        tally[0] += 1
        tally[1] += ok
    return {
        "n": n,
        "theta": theta.to_json(),
        "count": count,
        "max_word_len": max_word_len,
        "seed": seed,
        "defined": defined,
        "fraction_defined": str(Fraction(defined, count)) if count else "0",
        "stepwise_defined": stepwise,
        "flagged_defined_not_stepwise": flagged,
        "by_length": {str(k): {"words": v[0], "defined": v[1]} for k, v in sorted(by_len.items())},
    }
