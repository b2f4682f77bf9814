"""Exception hierarchy.

Three families, which the CLI maps onto exit codes:

* ``InputError``     malformed or out-of-contract arguments
* ``DomainError``    the mathematics is undefined at the given point
                     (e.g. ``C theta + D`` singular); expected, not a bug
* ``IdentityViolation``  an identity that must hold exactly did not; a bug
"""

from __future__ import annotations


class NCToriError(Exception):
    pass


class InputError(NCToriError, ValueError):
    pass


class DomainError(NCToriError, ArithmeticError):
    pass


class IdentityViolation(NCToriError, AssertionError):
    pass


# exactmat
class SingularMatrix(DomainError):
    pass


class OddDimension(InputError):
    pass


class SingularInput(DomainError):
    pass


class DimensionMismatch(InputError):
    pass


# group_onn
class NotUnimodular(InputError):
    pass


class NotAntisymmetric(InputError):
    pass


class OddKRejected(InputError):
    pass


class NotInGroup(InputError):
    pass


class OutsideDomain(DomainError):
    pass


# heisenberg
class SingularBlock(DomainError):
    pass


class MalformedVector(InputError):
    pass


class InternalAssertionFailure(IdentityViolation):
    pass


# grassmann
class IndexOutOfRange(InputError, IndexError):
    pass


class NoIntertwiner(NCToriError):
    pass


class AmbiguousIntertwiner(NCToriError):
    pass


class DomainFailure(DomainError):
    pass


# ktheory
class ParityMismatch(InputError):
    pass


class NonIntegralAction(IdentityViolation):
    pass


class WrongDimension(InputError):
    pass
