"""Exception hierarchy; each class carries the CLI exit code it maps to."""

from __future__ import annotations

__all__ = [
    "KreinStabError",
    "InvalidHamiltonianError",
    "InvalidSpecError",
    "StructureViolationError",
    "QuartetClosureError",
    "IndeterminateError",
    "NonNormalizableModeError",
    "PartnerError",
    "SolutionCountError",
    "OracleMismatchError",
]


class KreinStabError(Exception):
    exit_code = 1


class InvalidSpecError(KreinStabError, ValueError):
    """Malformed input file or argument."""

    exit_code = 3


class InvalidHamiltonianError(InvalidSpecError):
    """K not Hermitian or Delta not symmetric."""


class StructureViolationError(KreinStabError):
    """A matrix fails the pseudo-Hermiticity or charge-conjugation identity."""

    exit_code = 3


class QuartetClosureError(KreinStabError):
    """Eigenvalues do not close into {w, w*, -w, -w*} orbits."""

    exit_code = 4


class IndeterminateError(KreinStabError):
    """A numerical decision (rank, inertia, multiplicity) could not be made."""

    exit_code = 4


class NonNormalizableModeError(KreinStabError):
    """A real eigenvalue carries a tau3-null eigenvector."""

    exit_code = 4

    def __init__(self, msg: str, omega: complex | None = None):
        super().__init__(msg)
        self.omega = omega


class PartnerError(KreinStabError):
    """The bi-orthogonal partner of a mode could not be constructed."""

    exit_code = 4


class SolutionCountError(KreinStabError):
    """Bulk-solution count differs from 2 d R."""

    exit_code = 4


class OracleMismatchError(KreinStabError):
    exit_code = 5
