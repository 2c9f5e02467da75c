import dataclasses
import functools
import inspect
import itertools
from collections.abc import Mapping, Sequence
from typing import Any, Callable, Dict, Iterator, List, Optional, Protocol, Tuple, Type, TypeVar, Union, cast

from typing_extensions import dataclass_transform

from afplab.exc import ParsingError, ValidationError
from afplab.interface import IConfig, IError, IErrorCreator, IModel, ITypeParserProvider
from afplab.schema.error import Error, ErrorCode, Invalid, create_error
from afplab.schema.loc import Loc
from afplab.schema.parsers import CachingTypeParserProviderProxy, provider as _root_provider

_order_id = itertools.count()


class UnsetType:
    """Type of the :obj:`Unset` sentinel.

    Config models keep clean separation between values that are not set, and
    values that are explicitly set to ``None``.
    """

    __slots__: tuple = tuple()

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Unset"

    def __bool__(self):
        return False


#: Singleton instance of the UnsetType
Unset = UnsetType()


class IDumpFilter(Protocol):
    """Interface for functions to be used with :meth:`Model.dump` method.

    Returns 2-element tuple with the output value and a flag telling if the
    value should be skipped.
    """

    def __call__(self, value: Any, loc: Loc) -> Tuple[Any, bool]: ...


@dataclasses.dataclass
class Field:
    """Additional metadata of a model field."""

    #: Field's default value.
    default: Any = Unset

    #: Flag telling that the field may be left unset.
    optional: bool = False

    def compute_default(self) -> Any:
        if isinstance(self.default, (list, dict)):
            return type(self.default)(self.default)
        return self.default


@dataclasses.dataclass
class BoundField(Field):
    """Field metadata bound to a name and a type annotation."""

    name: str = ""
    type: Any = None

    def is_required(self) -> bool:
        return not self.optional and self.default is Unset and type(None) not in getattr(self.type, "__args__", ())


def field(default: Any = Unset, optional: bool = False) -> Any:
    """Declare additional metadata for a model field.

    :param default:
        Field's default value.

    :param optional:
        Flag telling that the field can either be set to given type or not
        set at all.
    """
    return Field(default=default, optional=optional)


def model_validator():
    """Decorate custom function as a model validator.

    Decorated function can use any ordered subsequence of these arguments:

    ``cls``
        Model class.

    ``self``
        Model instance.

    ``root``
        Root model instance.

    ``loc``
        The absolute location of the model being validated.

    ``errors``
        List of errors found so far.

    ``config``
        Model configuration object.

    Raising :exc:`ValueError` from the validator is reported as a
    ``afplab.ValueError`` error located at the model. Validators can also
    return an error, or an iterable of errors. They run after the fields of
    the model were validated.
    """

    def decorator(func):

        @functools.wraps(func)
        def proxy(cls: Type["Model"], self: "Model", root: "Model", loc: Loc, errors: List[IError], config: IConfig):
            kw: Dict[str, Any] = {}
            for name, value in zip(
                ("cls", "self", "root", "loc", "errors", "config"), (cls, self, root, loc, errors, config)
            ):
                if name in given_params:
                    kw[name] = value
            try:
                result = func(**kw)
            except ValueError as e:
                return (config.create_error(loc, ErrorCode.VALUE_ERROR, {"msg": str(e)}),)
            if result is None:
                return tuple()
            if isinstance(result, Error):
                return (result,)
            return tuple(result)

        given_params = tuple(inspect.signature(func).parameters)
        supported_params = ("cls", "self", "root", "loc", "errors", "config")
        it = iter(supported_params)
        if not all(x in it for x in given_params):
            raise TypeError(
                f"model validator {func.__name__!r} has incorrect signature: ({', '.join(given_params)}) is not a subsequence of ({', '.join(supported_params)})"
            )
        proxy.__afplab_validator__ = next(_order_id)
        return proxy

    return decorator


@dataclasses.dataclass
class Config:
    """Model configuration object."""

    #: Provider used to find type parsers.
    type_parser_provider: ITypeParserProvider = dataclasses.field(
        default_factory=lambda: CachingTypeParserProviderProxy(_root_provider)
    )

    #: Error creating function.
    create_error: IErrorCreator = create_error


class ModelMeta(type):
    """Metaclass for :class:`Model` class."""

    __fields__: Dict[str, BoundField]
    _model_validators: Tuple[Callable, ...]

    def __new__(tp, classname: str, bases: Tuple[Type], attrs: dict):
        fields: Dict[str, BoundField] = {}
        validators = []
        for base in bases:
            fields.update(getattr(base, "__fields__", {}))
            validators.extend(getattr(base, "_model_validators", ()))
        for field_name, type_ in attrs.get("__annotations__", {}).items():
            if field_name.startswith("_"):
                continue
            field_info = attrs.pop(field_name, Unset)
            if isinstance(field_info, Field):
                fields[field_name] = BoundField(field_info.default, field_info.optional, field_name, type_)
            else:
                fields[field_name] = BoundField(field_info, False, field_name, type_)
        for obj in attrs.values():
            if callable(obj) and hasattr(obj, "__afplab_validator__"):
                validators.append(obj)
        validators.sort(key=lambda f: f.__afplab_validator__)
        attrs["__fields__"] = fields
        attrs["__slots__"] = attrs.get("__slots__", tuple()) + tuple(x for x in fields if x not in _inherited_slots(bases))
        attrs["_model_validators"] = tuple(validators)
        return super().__new__(tp, classname, bases, attrs)


def _inherited_slots(bases: Tuple[Type, ...]) -> set:
    out: set = set()
    for base in bases:
        for cls in base.__mro__:
            out.update(getattr(cls, "__slots__", ()))
    return out


def _dump_any(value: Any, loc: Loc, func: IDumpFilter) -> Tuple[Any, bool]:
    value, skip = func(value, loc)
    if skip:
        return value, skip
    if isinstance(value, Model):
        out = {}
        for name in value.__class__.__fields__:
            dumped, skip = _dump_any(getattr(value, name), loc + Loc(name), func)
            if not skip:
                out[name] = dumped
        return out, False
    if isinstance(value, Mapping):
        out = {}
        for key, item in value.items():
            dumped, skip = _dump_any(item, loc + Loc(key), func)
            if not skip:
                out[key] = dumped
        return out, False
    if isinstance(value, Sequence) and not isinstance(value, str):
        return [_dump_any(item, loc + Loc(i), func)[0] for i, item in enumerate(value)], False
    return value, False


def skip_unset(value: Any, loc: Loc) -> Tuple[Any, bool]:
    """Dump filter that drops unset fields."""
    return value, value is Unset


def _validate_any(obj: Any, loc: Loc, errors: List[IError], root: "Model", config: IConfig):
    if isinstance(obj, Model):
        cls = obj.__class__
        for name, field_info in cls.__fields__.items():
            value = getattr(obj, name)
            if value is Unset:
                if field_info.is_required():
                    errors.append(config.create_error(loc + Loc(name), ErrorCode.REQUIRED_MISSING))
                continue
            _validate_any(value, loc + Loc(name), errors, root, config)
        for validator in cls._model_validators:
            errors.extend(validator(cls, obj, root, loc, errors, config))
    elif isinstance(obj, Mapping):
        for k, v in obj.items():
            _validate_any(v, loc + Loc(k), errors, root, config)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _validate_any(v, loc + Loc(i), errors, root, config)


MT = TypeVar("MT", bound="Model")


@IModel.register
@dataclass_transform(kw_only_default=True)
class Model(metaclass=ModelMeta):
    """Base class for config models.

    Fields are declared via annotations. Values are parsed when the model is
    created and all parsing errors are collected into a single
    :exc:`afplab.exc.ParsingError`. Keys that do not name a field are
    rejected.

    Example:

    .. testcode::

        from afplab.schema.model import Model, field

        class Group(Model):
            group: str
            rank: int = field(optional=True)

    .. doctest::

        >>> Group(group="F", rank=2)
        Group(group='F', rank=2)
        >>> Group.load({"group": "F", "rnk": 2})
        Traceback (most recent call last):
            ...
        afplab.exc.ParsingError: parsing failed with 1 error(-s):
          rnk:
            unknown key [code=afplab.UnknownField, data=None]
    """

    __slots__ = ("_loc",)
    __config__: IConfig = Config()

    def __init__(self, **kwargs):
        self._loc = Loc()
        errors = self._assign(kwargs, self.__class__.__config__)
        if errors:
            raise ParsingError(tuple(errors))

    def _assign(self, data: Mapping, config: IConfig) -> List[IError]:
        errors: List[IError] = []
        fields = self.__class__.__fields__
        for key in data:
            if key not in fields:
                errors.append(config.create_error(self._loc + Loc(key), ErrorCode.UNKNOWN_FIELD))
        for name, field_info in fields.items():
            value = data.get(name, Unset)
            if value is Unset:
                object.__setattr__(self, name, field_info.compute_default())
                continue
            parser = config.type_parser_provider.provide_type_parser(field_info.type, config)
            result = parser(value, self._loc + Loc(name), config)
            if isinstance(result, Invalid):
                errors.extend(result.errors)
                result = Unset
            object.__setattr__(self, name, result)
        return errors

    @classmethod
    def parse(cls: Type[MT], data: Mapping, loc: Loc, config: IConfig) -> Union[MT, Invalid]:
        """Parse mapping *data* found at location *loc* into a new model.

        Used by the type parser of nested models.
        """
        obj = cls.__new__(cls)
        obj._loc = loc
        errors = obj._assign(data, config)
        if errors:
            return Invalid(data, *errors)
        return obj

    def __iter__(self) -> Iterator[str]:
        for name in self.__class__.__fields__:
            if getattr(self, name) is not Unset:
                yield name

    def __repr__(self) -> str:
        items = (f"{k}={getattr(self, k)!r}" for k in self if getattr(self, k) is not Unset)
        return f"{self.__class__.__name__}({', '.join(items)})"

    def __setattr__(self, name: str, value: Any):
        cls = self.__class__
        if name.startswith("_"):
            return super().__setattr__(name, value)
        if name not in cls.__fields__:
            raise AttributeError(f"{cls.__name__!r} model has no field named {name!r}")
        if value is not Unset:
            config = cls.__config__
            parser = config.type_parser_provider.provide_type_parser(cls.__fields__[name].type, config)
            value = parser(value, self._loc + Loc(name), config)
            if isinstance(value, Invalid):
                raise ParsingError(value.errors)
        super().__setattr__(name, value)

    def __eq__(self, value: object) -> bool:
        if type(value) is not self.__class__:
            return False
        return all(getattr(self, name) == getattr(value, name) for name in self.__class__.__fields__)

    def __ne__(self, value: object) -> bool:
        return not self.__eq__(value)

    def set_loc(self, loc: Loc):
        self._loc = loc

    def get_loc(self) -> Loc:
        return self._loc

    def validate(self) -> None:
        """Validate this model.

        Checks required fields and runs model validators of this model and all
        nested models. Raises :exc:`afplab.exc.ValidationError` listing all
        errors found.
        """
        errors: List[IError] = []
        _validate_any(self, self.get_loc(), errors, self, self.__class__.__config__)
        if errors:
            raise ValidationError(self, tuple(errors))

    def dump(self, func: Optional[IDumpFilter] = None) -> dict:
        """Dump this model to dict.

        :param func:
            Optional filter function, f.e. :func:`skip_unset`.
        """
        func = (lambda v, l: (v, False)) if func is None else func
        return cast(dict, _dump_any(self, self.get_loc(), cast(IDumpFilter, func))[0])

    @classmethod
    def load(cls: Type[MT], data: Mapping) -> MT:
        """Parse given mapping into a new instance of this model.

        May raise :exc:`afplab.exc.ParsingError`.
        """
        if not isinstance(data, Mapping):
            error = cls.__config__.create_error(Loc(), ErrorCode.INVALID_MODEL, {"model_type": cls})
            raise ParsingError((error,))
        return cls(**data)

    @classmethod
    def load_valid(cls: Type[MT], data: Mapping) -> MT:
        """Parse and validate given mapping.

        May raise either :exc:`afplab.exc.ParsingError` or
        :exc:`afplab.exc.ValidationError`.
        """
        obj = cls.load(data)
        obj.validate()
        return obj
