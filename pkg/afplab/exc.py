from typing import Any, Optional, Tuple

from afplab.interface import IError


class AfpLabError(Exception):
    """Base class for afplab-specific exceptions."""

    __message_template__: Optional[str] = None

    def __str__(self) -> str:
        if self.__message_template__ is None:
            return super().__str__()
        return self.__message_template__.format(self=self)


class ConfigError(AfpLabError):
    """Common base class for errors found while either parsing, or validating
    experiment configuration.

    :param errors:
        Tuple of errors to initialize exception with.
    """

    #: Tuple with either parsing, or validation errors.
    errors: Tuple[IError, ...]

    def __init__(self, errors: Tuple[IError, ...]):
        super().__init__()
        self.errors = errors

    def _format_errors(self, header: str) -> str:
        out = [header]
        for error in sorted(self.errors, key=lambda x: str(x.loc)):
            out.append(f"  {error.loc}:")
            out.append(f"    {error.msg} [code={error.code}, data={error.data}]")
        return "\n".join(out)


class ParsingError(ConfigError):
    """Raised when input data could not be parsed into a config model."""

    def __str__(self):
        return self._format_errors(f"parsing failed with {len(self.errors)} error(-s):")


class ValidationError(ConfigError):
    """Raised when a parsed config model failed validation.

    :param model:
        The root model for which validation has failed.

    :param errors:
        Tuple containing all validation errors.
    """

    #: The model for which validation has failed.
    model: Any

    def __init__(self, model: Any, errors: Tuple[IError, ...]):
        super().__init__(errors)
        self.model = model

    def __str__(self):
        header = f"validation of {self.model.__class__.__qualname__!r} failed with {len(self.errors)} error(-s):"
        return self._format_errors(header)


class UnsupportedType(AfpLabError):
    """Raised when a config model declares a field of a type that has no
    parser registered."""

    __message_template__ = "unsupported type used: {self.tp!r}"

    def __init__(self, tp: Any):
        super().__init__()
        self.tp = tp


class DomainError(AfpLabError):
    """Raised when an operation is called outside of its contract."""


class GroupMismatch(DomainError):
    """Raised when elements of two different groups are combined."""

    __message_template__ = "elements belong to different groups: {self.left!r} and {self.right!r}"

    def __init__(self, left: str, right: str):
        super().__init__()
        self.left = left
        self.right = right


class UnsupportedGroup(DomainError):
    """Raised when a construction is requested for a group it does not
    support."""

    __message_template__ = "{self.what} is not available for group {self.group_id!r}"

    def __init__(self, what: str, group_id: str):
        super().__init__()
        self.what = what
        self.group_id = group_id


class PointOutsideModel(DomainError):
    """Raised when a point lies farther from a convex model than the
    projection tolerance allows."""

    __message_template__ = "point lies outside of {self.model} (violation {self.violation:.3e}, allowed {self.allowed:.3e})"

    def __init__(self, model: str, violation: float, allowed: float):
        super().__init__()
        self.model = model
        self.violation = violation
        self.allowed = allowed


class ResourceCapExceeded(AfpLabError):
    """Raised when a construction would exceed a configured size cap."""

    __message_template__ = "{self.what} needs {self.size} elements, which exceeds the cap of {self.cap}"

    def __init__(self, what: str, size: int, cap: int):
        super().__init__()
        self.what = what
        self.size = size
        self.cap = cap


class NumericError(AfpLabError):
    """Raised when numerics break down (non-finite values, failed solves).

    :param where:
        Human readable position of the failure, f.e. ``"index 7"``.

    :param reason:
        What went wrong.
    """

    __message_template__ = "numeric failure at {self.where}: {self.reason}"

    def __init__(self, where: str, reason: str):
        super().__init__()
        self.where = where
        self.reason = reason
