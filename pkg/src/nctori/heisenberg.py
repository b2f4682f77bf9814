"""Embedding matrices for the sigma_{2p} Morita equivalence.

Given antisymmetric ``theta`` whose top-left ``2p x 2p`` block ``theta11``
is invertible, build the embedding ``T`` of ``Z^n`` into
``G = R^{2p} x Z^q x T^q`` (``q = n - 2p``) with ``T^t J T = -theta``, then
the dual embedding ``S`` whose image is the annihilator lattice, with
``S^t J S = sigma_{2p}(theta)``.  All identities are checked exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    DimensionMismatch,
    InputError,
    InternalAssertionFailure,
    MalformedVector,
    SingularBlock,
    SingularInput,
    SingularMatrix,
)
from .exactmat import (
    RatMatrix,
    SkewMatrix,
    block_matrix,
    det,
    hstack,
    invert,
    skew_congruence_factor,
    standard_symplectic,
    vstack,
)
from .group_onn import act, sigma

T32_MODES = ("half", "upper")


@dataclass(frozen=True)
class EmbeddingData:
    n: int
    p: int
    q: int
    theta: SkewMatrix
    T11: RatMatrix
    T31: RatMatrix
    T32: RatMatrix
    T: RatMatrix
    J: RatMatrix
    Tbar: RatMatrix
    S: RatMatrix | None = None
    sigma_theta: SkewMatrix | None = None

    def to_json(self) -> dict:
        doc = {
            "n": self.n,
            "p": self.p,
            "q": self.q,
            "theta": self.theta.to_json(),
            "T11": self.T11.to_json(),
            "T31": self.T31.to_json(),
            "T32": self.T32.to_json(),
            "T": self.T.to_json(),
            "J": self.J.to_json(),
            "Tbar": self.Tbar.to_json(),
        }
        if self.S is not None:
            doc["S"] = self.S.to_json()
            doc["sigma_theta"] = self.sigma_theta.to_json()
        return doc


@dataclass(frozen=True)
class LatticeVector:
    """Point of ``G = R^{2p} x Z^q x T^q``; the torus part lives in ``[0, 1)``."""

    u: tuple[Fraction, ...]
    z: tuple[int, ...]
    t: tuple[Fraction, ...]

    @classmethod
    def from_lift(cls, p: int, q: int, w: Sequence) -> "LatticeVector":
        w = list(w)
        if len(w) != 2 * p + 2 * q:
            raise MalformedVector(f"expected {2 * p + 2 * q} coordinates, got {len(w)}")
        z = w[2 * p : 2 * p + q]
        if any(Fraction(x).denominator != 1 for x in z):
            raise MalformedVector("Z^q slot must be integral")
        return cls(
            tuple(Fraction(x) for x in w[: 2 * p]),
            tuple(int(x) for x in z),
            tuple(Fraction(x) % 1 for x in w[2 * p + q :]),
        )

    def is_zero(self) -> bool:
        return not any(self.u) and not any(self.z) and not any(self.t)


def _split(theta: SkewMatrix, p: int):
    n = theta.n
    if p < 1 or 2 * p > n:
        raise InputError(f"need 1 <= p and 2p <= n, got p={p}, n={n}")
    k = 2 * p
    return (
        theta.block(0, k, 0, k),
        theta.block(0, k, k, n),
        theta.block(k, n, 0, k),
        theta.block(k, n, k, n),
    )


def symplectic_J(p: int, q: int) -> RatMatrix:
    """``[[J0, 0, 0], [0, 0, I_q], [0, -I_q, 0]]``, size ``2p + 2q``."""
    j0 = standard_symplectic(p)
    k = 2 * p
    z = RatMatrix.zeros
    iq = RatMatrix.identity(q)
    return block_matrix(
        [
            [j0, z(k, q), z(k, q)],
            [z(q, k), z(q, q), iq],
            [z(q, k), -iq, z(q, q)],
        ]
    )


def _t32(theta22: RatMatrix, mode: str) -> RatMatrix:
    q = theta22.rows
    if mode == "half":
        return theta22.scale(Fraction(-1, 2))
    if mode == "upper":
        # strictly upper triangular with T32^t - T32 == theta22
        return RatMatrix.from_function(q, q, lambda i, j: -theta22[i, j] if i < j else 0)
    raise InputError(f"t32_mode must be one of {T32_MODES}, got {mode!r}")


def build_embedding(theta: RatMatrix, p: int, t32_mode: str = "half") -> EmbeddingData:
    theta = SkewMatrix.of(theta)
    th11, th12, _th21, th22 = _split(theta, p)
    n, k = theta.n, 2 * p
    q = n - k
    try:
        T11 = skew_congruence_factor(th11)
    except SingularInput as exc:
        raise SingularBlock(f"top-left {k}x{k} block of theta is singular") from exc
    T31 = th12.T
    T32 = _t32(th22, t32_mode)
    z = RatMatrix.zeros
    iq = RatMatrix.identity(q)
    T = block_matrix([[T11, z(k, q)], [z(q, k), iq], [T31, T32]])
    J = symplectic_J(p, q)
    Tbar = block_matrix(
        [
            [T11, z(k, q), z(k, q)],
            [z(q, k), iq, z(q, q)],
            [T31, T32, iq],
        ]
    )
    if T.T @ J @ T != -theta.inner:
        raise InternalAssertionFailure("T^t J T != -theta")
    if T32.T - T32 != th22:
        raise InternalAssertionFailure("theta22 != T32^t - T32")
    if det(Tbar) == 0:
        raise InternalAssertionFailure("Tbar is singular")
    return EmbeddingData(n, p, q, theta, T11, T31, T32, T, J, Tbar)


def sigma_blocks(theta: RatMatrix, p: int) -> SkewMatrix:
    """Closed form of ``sigma_{2p}(theta)`` in terms of the blocks of theta."""
    theta = SkewMatrix.of(theta)
    th11, th12, th21, th22 = _split(theta, p)
    try:
        inv11 = invert(th11)
    except SingularMatrix as exc:
        raise SingularBlock("theta11 is singular") from exc
    return SkewMatrix.of(
        block_matrix(
            [
                [inv11, -(inv11 @ th12)],
                [th21 @ inv11, th22 - th21 @ inv11 @ th12],
            ]
        )
    )


def tbar_j_inverse(E: EmbeddingData) -> RatMatrix:
    return invert(E.Tbar.T @ E.J)


def dual_embedding(E: EmbeddingData) -> EmbeddingData:
    """Compute ``S`` from ``(Tbar^t J)^{-1}`` and return ``E`` with it filled in."""
    k, q = 2 * E.p, E.q
    X = tbar_j_inverse(E)
    if q:
        middle = X.block(0, k + 2 * q, k, k + q)
        if middle != vstack([RatMatrix.zeros(k + q, q), RatMatrix.identity(q)]):
            raise InternalAssertionFailure(
                "second column block of (Tbar^t J)^{-1} is not (0, 0, I)"
            )
    kept = hstack([X.block(0, k + 2 * q, 0, k), X.block(0, k + 2 * q, k + q, k + 2 * q)])
    S = -kept
    target = sigma_blocks(E.theta, E.p)
    if S.T @ E.J @ S != target.inner:
        raise InternalAssertionFailure("S^t J S != sigma_2p(theta)")
    return EmbeddingData(
        E.n, E.p, E.q, E.theta, E.T11, E.T31, E.T32, E.T, E.J, E.Tbar, S, target
    )


def sigma_dual(theta: RatMatrix, p: int, t32_mode: str = "half") -> EmbeddingData:
    """``build_embedding`` followed by ``dual_embedding``, cross-checked
    against the fractional-linear action of ``sigma(2p)``."""
    E = dual_embedding(build_embedding(theta, p, t32_mode))
    if act(sigma(2 * p, E.n), E.theta) != E.sigma_theta:
        raise InternalAssertionFailure("sigma_blocks disagrees with the group action")
    return E


def check_cocycle_restriction(E: EmbeddingData, x: Sequence[int], y: Sequence[int]) -> bool:
    """``(Tx) . J (Ty) == -x . theta y`` as rationals."""
    if len(x) != E.n or len(y) != E.n:
        raise DimensionMismatch(f"vectors must have length {E.n}")
    xv, yv = RatMatrix.column(x), RatMatrix.column(y)
    lhs = ((E.T @ xv).T @ E.J @ (E.T @ yv))[0, 0]
    rhs = -((xv.T @ E.theta.inner @ yv)[0, 0])
    return lhs == rhs


def dual_lattice_member(E: EmbeddingData, w: Sequence) -> bool:
    """Is the lift ``w`` (length ``n + q``) in the annihilator of ``T(Z^n)``?"""
    w = list(w)
    if len(w) != E.n + E.q:
        raise MalformedVector(f"expected {E.n + E.q} coordinates, got {len(w)}")
    LatticeVector.from_lift(E.p, E.q, w)  # validates the Z^q slot
    img = E.T.T @ E.J @ RatMatrix.column(w)
    return img.is_integral()


def dual_lattice_span_check(E: EmbeddingData) -> bool:
    """``[S | (0,0,I)]`` spans the same lattice as ``(Tbar^t J)^{-1}``.

    Equivalent to ``Tbar^t J [S | (0,0,I)]`` being integral and unimodular.
    """
    if E.S is None:
        raise InputError("run dual_embedding first")
    k, q = 2 * E.p, E.q
    collapsed = vstack([RatMatrix.zeros(k + q, q), RatMatrix.identity(q)])
    basis = hstack([E.S, collapsed]) if q else E.S
    M = E.Tbar.T @ E.J @ basis
    return M.is_integral() and abs(det(M)) == 1
