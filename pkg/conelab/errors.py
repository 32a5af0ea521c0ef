"""Exception hierarchy for the cone laboratory."""
from __future__ import annotations

from config.constants import ERROR_MESSAGES


class ConeLabError(Exception):
    """Base class for every error raised by conelab."""

    key: str | None = None

    def __init__(self, message: str | None = None, **details):
        self.details = details
        if message is None and self.key is not None:
            message = ERROR_MESSAGES[self.key].format(**details)
        super().__init__(message or self.__class__.__name__)


class InputError(ConeLabError):
    """Malformed input: wrong shapes, unknown names, bad files."""


class AsymmetricStructureError(InputError):
    key = "ASYMMETRIC_STRUCTURE"


class DegenerateSpectrumError(ConeLabError):
    key = "DEGENERATE_SPECTRUM"

    @property
    def gap(self) -> float:
        return self.details.get("gap", float("nan"))


class SpectralDomainError(ConeLabError):
    key = "SPECTRAL_DOMAIN"

    @property
    def value(self) -> float:
        return self.details.get("value", float("nan"))


class PreconditionError(ConeLabError):
    """An operation's precondition does not hold."""


class SingularMapError(ConeLabError):
    key = "SINGULAR_MAP"


class UnreliableOracleError(ConeLabError):
    key = "UNRELIABLE_ORACLE"


class NotAdditiveError(ConeLabError):
    key = "NOT_ADDITIVE"


class StructuralError(ConeLabError):
    """A construction produced an object without the required structure."""


class OracleProtocolError(ConeLabError):
    key = "ORACLE_PROTOCOL"


def dimension_mismatch(expected: int, got: int) -> InputError:
    return InputError(ERROR_MESSAGES["DIMENSION_MISMATCH"].format(expected=expected, got=got),
                      expected=expected, got=got)
