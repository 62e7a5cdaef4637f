"""
Base exception and the violation record shared by the validators.
"""

from dataclasses import dataclass


class SurfcalcError(Exception):
    """Base class for every error raised by surfcalc."""


@dataclass(frozen=True)
class Violation:
    """
    A single failed check reported by a validate_* function.

    Attributes:
        where (str): the node, piece or record that failed
        message (str): what is wrong with it
    """

    where: str
    message: str

    def to_dict(self):
        return {"where": self.where, "message": self.message}


class UnknownCurve(SurfcalcError, KeyError):
    """Raised when a curve id is not registered."""
