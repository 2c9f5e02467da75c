"""Type parsers used by config models.

Each parser is created by a factory registered for a type (or a type
origin, like ``list`` for ``List[int]``) and has the signature
``parser(value, loc, config)``. Parsers return either the parsed value or an
:class:`afplab.schema.error.Invalid` object.
"""

import functools
import inspect
import itertools
import math
from collections.abc import Mapping
from typing import Annotated, Any, Callable, Dict, Iterable, Literal, Union, get_args, get_origin

from afplab.exc import UnsupportedType
from afplab.interface import IConfig, IModel, IParser, ITypeParserFactory, ITypeParserProvider
from afplab.schema.error import ErrorCode, Invalid
from afplab.schema.loc import Loc


def _is_subsequence(candidate: Iterable, seq: Iterable) -> bool:
    it = iter(seq)
    return all(element in it for element in candidate)


class TypeParserProvider:
    """Registry of type parser factories."""

    def __init__(self) -> None:
        self._type_parser_factories: Dict[Any, ITypeParserFactory] = {}

    def register_type_parser_factory(self, tp: Any, func: Callable) -> ITypeParserFactory:
        """Register type parser factory function for type *tp*.

        :param tp:
            Type to register parser for.

        :param func:
            Type parser factory function.

            This function can be declared with a subsequence (including empty)
            of ``(tp, model_config)`` arguments.
        """

        @functools.wraps(func)
        def proxy(tp: Any, model_config: IConfig) -> IParser:
            kw: Dict[str, Any] = {}
            if "tp" in declared_params:
                kw["tp"] = tp
            if "model_config" in declared_params:
                kw["model_config"] = model_config
            return func(**kw)

        declared_params = inspect.signature(func).parameters
        allowed_params = ("tp", "model_config")
        if not _is_subsequence(declared_params, allowed_params):
            raise TypeError(
                f"incorrect type parser factory signature: ({', '.join(declared_params)}) is not a subsequence of ({', '.join(allowed_params)})"
            )
        self._type_parser_factories[tp] = proxy
        return proxy

    def type_parser_factory(self, tp: Any):
        """Decorator version of the :meth:`register_type_parser_factory`
        method."""

        def decorator(func):
            return self.register_type_parser_factory(tp, func)

        return decorator

    def provide_type_parser(self, tp: Any, model_config: IConfig) -> IParser:
        make_parser = self._type_parser_factories.get(tp)
        if make_parser is not None:
            return make_parser(tp, model_config)
        make_parser = self._type_parser_factories.get(get_origin(tp))
        if make_parser is not None:
            return make_parser(tp, model_config)
        if isinstance(tp, type):
            for maybe_base, make_parser in self._type_parser_factories.items():
                if isinstance(maybe_base, type) and issubclass(tp, maybe_base):
                    return make_parser(tp, model_config)
        raise UnsupportedType(tp)


class CachingTypeParserProviderProxy:
    """Type parser provider that creates each parser only once.

    :param target:
        The target provider.
    """

    __slots__ = ("_target", "_cache")

    def __init__(self, target: ITypeParserProvider):
        self._target = target
        self._cache: Dict[Any, IParser] = {}

    def provide_type_parser(self, tp: Any, model_config: IConfig) -> IParser:
        if tp not in self._cache:
            self._cache[tp] = self._target.provide_type_parser(tp, model_config)
        return self._cache[tp]


provider = TypeParserProvider()


@provider.type_parser_factory(int)
def make_int_parser():

    def parse_int(value, loc, config: IConfig):
        if isinstance(value, bool):
            return Invalid(value, config.create_error(loc, ErrorCode.INTEGER_REQUIRED))
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        return Invalid(value, config.create_error(loc, ErrorCode.INTEGER_REQUIRED))

    return parse_int


@provider.type_parser_factory(float)
def make_float_parser():

    def parse_float(value, loc, config: IConfig):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return Invalid(value, config.create_error(loc, ErrorCode.FLOAT_REQUIRED))
        value = float(value)
        if not math.isfinite(value):
            return Invalid(value, config.create_error(loc, ErrorCode.NON_FINITE_NUMBER))
        return value

    return parse_float


@provider.type_parser_factory(str)
def make_string_parser():

    def parse_string(value, loc, config: IConfig):
        if isinstance(value, str):
            return value
        return Invalid(value, config.create_error(loc, ErrorCode.STRING_REQUIRED))

    return parse_string


@provider.type_parser_factory(bool)
def make_bool_parser():

    def parse_bool(value, loc, config: IConfig):
        if value is True or value is False:
            return value
        return Invalid(value, config.create_error(loc, ErrorCode.BOOLEAN_REQUIRED))

    return parse_bool


@provider.type_parser_factory(Any)
def make_any_parser():

    def parse_any(value, loc, config):
        return value

    return parse_any


@provider.type_parser_factory(Literal)
def make_literal_parser(tp: Any):

    def parse_literal(value, loc, config: IConfig):
        for allowed in allowed_values:
            if type(value) is type(allowed) and value == allowed:
                return value
        return Invalid(value, config.create_error(loc, ErrorCode.INVALID_LITERAL, {"allowed_values": allowed_values}))

    allowed_values = get_args(tp)
    return parse_literal


@provider.type_parser_factory(Union)
def make_union_parser(tp: Any, model_config: IConfig):

    def parse_union(value, loc, config: IConfig):
        for parser in supported_parsers:
            result = parser(value, loc, config)
            if not isinstance(result, Invalid):
                return result
        return Invalid(
            value, config.create_error(loc, ErrorCode.UNSUPPORTED_TYPE, {"supported_types": supported_types})
        )

    supported_types = get_args(tp)
    provide_type_parser = model_config.type_parser_provider.provide_type_parser
    supported_parsers = [provide_type_parser(x, model_config) for x in supported_types]
    return parse_union


@provider.type_parser_factory(Annotated)
def make_annotated_parser(tp: Any, model_config: IConfig):

    def parse_annotated(value, loc, config):
        result = type_parser(value, loc, config)
        if isinstance(result, Invalid):
            return result
        for constraint in constraints:
            result = constraint(result, loc, config)
            if isinstance(result, Invalid):
                return result
        return result

    args = get_args(tp)
    type_parser = model_config.type_parser_provider.provide_type_parser(args[0], model_config)
    constraints = args[1:]
    return parse_annotated


@provider.type_parser_factory(list)
def make_list_parser(tp: Any, model_config: IConfig):

    def parse_list(value, loc, config: IConfig):
        if isinstance(value, (str, bytes, Mapping)) or not isinstance(value, Iterable):
            return Invalid(value, config.create_error(loc, ErrorCode.ITERABLE_REQUIRED))
        result = [item_parser(x, loc + Loc(i), config) for i, x in enumerate(value)]
        errors = tuple(itertools.chain(*(x.errors for x in result if isinstance(x, Invalid))))
        if errors:
            return Invalid(value, *errors)
        return result

    args = get_args(tp)
    item_type = args[0] if args else Any
    item_parser = model_config.type_parser_provider.provide_type_parser(item_type, model_config)
    return parse_list


@provider.type_parser_factory(dict)
def make_dict_parser(tp: Any, model_config: IConfig):

    def parse_dict(value, loc, config: IConfig):
        if not isinstance(value, Mapping):
            return Invalid(value, config.create_error(loc, ErrorCode.MAPPING_REQUIRED))
        keys = {k: key_parser(k, loc + Loc(k), config) for k in value}
        result = {k: value_parser(v, loc + Loc(k), config) for k, v in value.items()}
        errors = tuple(
            itertools.chain(
                *(x.errors for x in keys.values() if isinstance(x, Invalid)),
                *(x.errors for x in result.values() if isinstance(x, Invalid)),
            )
        )
        if errors:
            return Invalid(value, *errors)
        return {keys[k]: v for k, v in result.items()}

    args = get_args(tp)
    key_type, value_type = args if args else (Any, Any)
    key_parser = model_config.type_parser_provider.provide_type_parser(key_type, model_config)
    value_parser = model_config.type_parser_provider.provide_type_parser(value_type, model_config)
    return parse_dict


@provider.type_parser_factory(IModel)
def make_model_parser(tp: Any):

    def parse_model(value, loc, config: IConfig):
        if isinstance(value, tp):
            return value
        if not isinstance(value, Mapping):
            return Invalid(value, config.create_error(loc, ErrorCode.INVALID_MODEL, {"model_type": tp}))
        return tp.parse(value, loc, config)

    return parse_model
