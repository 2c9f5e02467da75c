import collections.abc

from typing import Any, Union


class Loc(collections.abc.Sequence):
    """Path to a value inside a config tree.

    Used by parsing and validation errors to point at the offending key, f.e.
    ``Loc("schedule", "sides", "step")`` is rendered as
    ``schedule.sides.step``.
    """

    __slots__ = ("_path",)

    def __init__(self, *path: Any):
        self._path = path

    def __len__(self) -> int:
        return len(self._path)

    def __getitem__(self, index: Union[int, slice]) -> Any:  # type: ignore[override]
        return self._path[index]

    def __hash__(self) -> int:
        return hash(self._path)

    def __repr__(self) -> str:
        return f"Loc({', '.join(repr(x) for x in self._path)})"

    def __str__(self) -> str:
        if not self._path:
            return "(root)"
        return ".".join(str(x) for x in self._path)

    def __lt__(self, value: object) -> bool:
        if not isinstance(value, Loc):
            return NotImplemented
        return tuple(str(x) for x in self._path) < tuple(str(x) for x in value._path)

    def __eq__(self, value: object) -> bool:
        return isinstance(value, Loc) and self._path == value._path

    def __ne__(self, value: object) -> bool:
        return not self.__eq__(value)

    def __add__(self, other: "Loc") -> "Loc":
        return Loc(*(self._path + other._path))
