import dataclasses
from typing import Any, Optional, Tuple

from afplab.interface import IError
from afplab.schema.loc import Loc


class ErrorCode:
    """Constants with all error codes reported by the config layer."""

    REQUIRED_MISSING = "afplab.RequiredMissing"
    UNKNOWN_FIELD = "afplab.UnknownField"
    INTEGER_REQUIRED = "afplab.IntegerRequired"
    FLOAT_REQUIRED = "afplab.FloatRequired"
    NON_FINITE_NUMBER = "afplab.NonFiniteNumber"
    STRING_REQUIRED = "afplab.StringRequired"
    BOOLEAN_REQUIRED = "afplab.BooleanRequired"
    ITERABLE_REQUIRED = "afplab.IterableRequired"
    MAPPING_REQUIRED = "afplab.MappingRequired"
    INVALID_LITERAL = "afplab.InvalidLiteral"
    INVALID_MODEL = "afplab.InvalidModel"
    UNSUPPORTED_TYPE = "afplab.UnsupportedType"
    VALUE_TOO_LOW = "afplab.ValueTooLow"
    VALUE_TOO_HIGH = "afplab.ValueTooHigh"
    VALUE_TOO_SHORT = "afplab.ValueTooShort"
    VALUE_ERROR = "afplab.ValueError"


@dataclasses.dataclass
class Error:
    """Object describing a single config error."""

    #: Location of the error.
    loc: Loc

    #: Error code.
    code: str

    #: Optional error data, with format depending on the :attr:`code`.
    data: Optional[dict] = None

    #: Formatted error message.
    msg: Optional[str] = None


class Invalid:
    """Invalid input value glued with the errors it caused."""

    __slots__ = ("value", "errors")

    value: Any
    errors: Tuple[IError, ...]

    def __init__(self, value: Any, error: IError, *more_errors: IError):
        self.value = value
        self.errors = (error,) + more_errors

    @property
    def error_codes(self) -> Tuple[str, ...]:
        return tuple(x.code for x in self.errors)

    def __repr__(self):
        return f"{self.__class__.__qualname__}(value={self.value!r}, error_codes={'+'.join(self.error_codes)})"


_SIMPLE_MESSAGES = {
    ErrorCode.REQUIRED_MISSING: "this field is required",
    ErrorCode.UNKNOWN_FIELD: "unknown key",
    ErrorCode.INTEGER_REQUIRED: "not a valid integer number",
    ErrorCode.FLOAT_REQUIRED: "not a valid float number",
    ErrorCode.NON_FINITE_NUMBER: "number must be finite",
    ErrorCode.STRING_REQUIRED: "not a valid string value",
    ErrorCode.BOOLEAN_REQUIRED: "not a valid boolean value",
    ErrorCode.ITERABLE_REQUIRED: "not a valid list value",
    ErrorCode.MAPPING_REQUIRED: "not a valid mapping value",
}


def _format_bound(data: dict, inclusive: str, exclusive: str, inclusive_op: str, exclusive_op: str) -> str:
    if data.get(inclusive) is not None:
        return f"value must be {inclusive_op} {data[inclusive]}"
    return f"value must be {exclusive_op} {data[exclusive]}"


def create_error(loc: Loc, code: str, data: Optional[dict] = None) -> Error:
    """Create error object with a message rendered for given *code*.

    Unknown codes produce errors without message.
    """
    if code in _SIMPLE_MESSAGES:
        return Error(loc, code, data, _SIMPLE_MESSAGES[code])
    data = data or {}
    if code == ErrorCode.INVALID_LITERAL:
        allowed = ", ".join(repr(x) for x in data["allowed_values"])
        return Error(loc, code, data, f"not a valid literal; allowed values are: {allowed}")
    if code == ErrorCode.INVALID_MODEL:
        name = data["model_type"].__name__
        return Error(loc, code, data, f"not a valid {name!r} value; need a mapping")
    if code == ErrorCode.UNSUPPORTED_TYPE:
        supported = ", ".join(getattr(x, "__name__", repr(x)) for x in data["supported_types"])
        return Error(loc, code, data, f"value of unsupported type given; supported types are: {supported}")
    if code == ErrorCode.VALUE_TOO_LOW:
        return Error(loc, code, data, _format_bound(data, "min_inclusive", "min_exclusive", ">=", ">"))
    if code == ErrorCode.VALUE_TOO_HIGH:
        return Error(loc, code, data, _format_bound(data, "max_inclusive", "max_exclusive", "<=", "<"))
    if code == ErrorCode.VALUE_TOO_SHORT:
        return Error(loc, code, data, f"value too short; minimum length is {data['min_length']}")
    if code == ErrorCode.VALUE_ERROR:
        return Error(loc, code, data, data.get("msg"))
    return Error(loc, code, data or None)
