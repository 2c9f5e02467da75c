import json
import pathlib
from typing import Any, Optional

from afplab.schema.error import Error, ErrorCode
from afplab.schema.loc import Loc

EXPERIMENTS_DIR = pathlib.Path(__file__).parent.parent / "experiments"


class ErrorFactoryHelper:

    @staticmethod
    def required_missing(loc: Loc) -> Error:
        return Error(loc, ErrorCode.REQUIRED_MISSING, msg="this field is required")

    @staticmethod
    def unknown_field(loc: Loc) -> Error:
        return Error(loc, ErrorCode.UNKNOWN_FIELD, msg="unknown key")

    @staticmethod
    def integer_required(loc: Loc) -> Error:
        return Error(loc, ErrorCode.INTEGER_REQUIRED, msg="not a valid integer number")

    @staticmethod
    def float_required(loc: Loc) -> Error:
        return Error(loc, ErrorCode.FLOAT_REQUIRED, msg="not a valid float number")

    @staticmethod
    def non_finite_number(loc: Loc) -> Error:
        return Error(loc, ErrorCode.NON_FINITE_NUMBER, msg="number must be finite")

    @staticmethod
    def string_required(loc: Loc) -> Error:
        return Error(loc, ErrorCode.STRING_REQUIRED, msg="not a valid string value")

    @staticmethod
    def boolean_required(loc: Loc) -> Error:
        return Error(loc, ErrorCode.BOOLEAN_REQUIRED, msg="not a valid boolean value")

    @staticmethod
    def iterable_required(loc: Loc) -> Error:
        return Error(loc, ErrorCode.ITERABLE_REQUIRED, msg="not a valid list value")

    @staticmethod
    def invalid_literal(loc: Loc, allowed_values: tuple) -> Error:
        allowed = ", ".join(repr(x) for x in allowed_values)
        return Error(
            loc,
            ErrorCode.INVALID_LITERAL,
            {"allowed_values": allowed_values},
            f"not a valid literal; allowed values are: {allowed}",
        )

    @staticmethod
    def value_too_low(loc: Loc, min_inclusive: Optional[Any] = None, min_exclusive: Optional[Any] = None) -> Error:
        if min_inclusive is not None:
            return Error(loc, ErrorCode.VALUE_TOO_LOW, {"min_inclusive": min_inclusive}, f"value must be >= {min_inclusive}")
        return Error(loc, ErrorCode.VALUE_TOO_LOW, {"min_exclusive": min_exclusive}, f"value must be > {min_exclusive}")

    @staticmethod
    def value_too_high(loc: Loc, max_inclusive: Optional[Any] = None, max_exclusive: Optional[Any] = None) -> Error:
        if max_inclusive is not None:
            return Error(loc, ErrorCode.VALUE_TOO_HIGH, {"max_inclusive": max_inclusive}, f"value must be <= {max_inclusive}")
        return Error(loc, ErrorCode.VALUE_TOO_HIGH, {"max_exclusive": max_exclusive}, f"value must be < {max_exclusive}")

    @staticmethod
    def value_too_short(loc: Loc, min_length: int) -> Error:
        return Error(loc, ErrorCode.VALUE_TOO_SHORT, {"min_length": min_length}, f"value too short; minimum length is {min_length}")

    @staticmethod
    def value_error(loc: Loc, msg: str) -> Error:
        return Error(loc, ErrorCode.VALUE_ERROR, {"msg": msg}, msg)


def load_shipped(name: str) -> dict:
    """Load shipped experiment config by its file name."""
    return json.loads((EXPERIMENTS_DIR / name).read_text(encoding="utf-8"))


def write_json(path: pathlib.Path, data: Any) -> pathlib.Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data), encoding="utf-8")
    return path
