import logging
import os
from abc import ABCMeta, abstractmethod
from collections import OrderedDict

import yaml

__all__ = [
    "Options",
    "Config",
    "at_least",
    "boolean",
    "one_of",
    "optional",
    "positive",
]


class Options(object):
    """
    A declarative schema of named options.

    Each option carries a description, whether it is required, a default and
    an optional parser which validates (and coerces) user supplied values.
    Defaults are trusted as-is and are not passed through the parser.
    """

    def __init__(self, options=None):
        self._options = options or OrderedDict()

    def add_option(self, name, desc, required=False, default=None, parser=None):
        if name in self._options:
            raise ValueError("Option of name `{}` already exists.".format(name))
        self._options[name] = {
            "desc": desc,
            "required": required,
            "default": default,
            "parser": parser,
        }
        return self

    def process(self, **opts):
        params = {}
        ignoring = []
        for key, value in opts.items():
            if key not in self._options:
                ignoring.append(key)
                continue
            parser = self._options[key]["parser"]
            try:
                params[key] = parser(value) if parser else value
            except (TypeError, ValueError) as e:
                raise ValueError(
                    "Invalid value for option `{}` ({}): {}".format(
                        key, self._options[key]["desc"], e
                    )
                )

        if len(ignoring) > 0:
            logging.warning("Ignoring invalid keys: '{}'".format("', '".join(ignoring)))

        for name, schema in self._options.items():
            if name not in params:
                if schema["required"]:
                    raise RuntimeError(
                        "A value for parameter `{}` ({}) was not provided.".format(
                            name, schema["desc"]
                        )
                    )
                params[name] = schema["default"]
        return OrderedDict((name, params[name]) for name in self._options)

    def describe(self, name):
        return self._options[name]["desc"]

    def __contains__(self, name):
        return name in self._options

    def __iter__(self):
        return iter(self._options)


class Config(metaclass=ABCMeta):
    """
    Immutable, option-backed configuration.

    Subclasses declare their options in `_init_options`, and the processed
    values are then exposed as attributes. Configurations can be loaded from
    dictionaries or YAML, and derived variants are created using
    `with_options`.
    """

    # Mapping from external (dict/YAML) keys to option names, for keys that
    # are not valid Python identifiers.
    ALIASES = {}

    def __init__(self, **opts):
        options = Options()
        self._init_options(options)
        object.__setattr__(self, "_options", options)
        object.__setattr__(self, "_values", options.process(**opts))

    @abstractmethod
    def _init_options(self, options):
        pass

    @classmethod
    def from_dict(cls, dct):
        dct = dict(dct or {})
        for alias, name in cls.ALIASES.items():
            if alias in dct:
                dct[name] = dct.pop(alias)
        return cls(**dct)

    @classmethod
    def from_yaml(cls, yml):
        """
        Build a configuration from YAML.

        Args:
            yml (str): The YAML text, or a path to a YAML file. One-line
                strings are interpreted as filenames.

        Returns:
            Config: An instance of this class configured as described.
        """
        if "\n" not in yml:
            with open(os.path.expanduser(yml)) as f:
                return cls.from_dict(yaml.safe_load(f))
        return cls.from_dict(yaml.safe_load(yml))

    def to_dict(self):
        aliases = {name: alias for alias, name in self.ALIASES.items()}
        return OrderedDict(
            (
                aliases.get(name, name),
                value.to_dict() if isinstance(value, Config) else value,
            )
            for name, value in self._values.items()
        )

    def with_options(self, **opts):
        values = dict(self._values)
        values.update(opts)
        return self.__class__(**values)

    def __getattr__(self, name):
        values = self.__dict__.get("_values", {})
        if name in values:
            return values[name]
        raise AttributeError(
            "`{}` has no option named `{}`.".format(self.__class__.__name__, name)
        )

    def __setattr__(self, name, value):
        raise AttributeError(
            "`{}` instances are immutable; use `with_options`.".format(
                self.__class__.__name__
            )
        )

    def __eq__(self, other):
        return type(self) is type(other) and dict(self.to_dict()) == dict(other.to_dict())

    def __repr__(self):
        return "{}({})".format(
            self.__class__.__name__,
            ", ".join("{}={!r}".format(k, v) for k, v in self._values.items()),
        )


# Option parsers


def positive(kind=float):
    def parser(value):
        value = kind(value)
        if not value > 0:
            raise ValueError("must be positive, got {}".format(value))
        return value

    return parser


def at_least(minimum, kind=int):
    def parser(value):
        value = kind(value)
        if value < minimum:
            raise ValueError("must be at least {}, got {}".format(minimum, value))
        return value

    return parser


def one_of(*choices):
    def parser(value):
        if value not in choices:
            raise ValueError(
                "must be one of {}, got {!r}".format(
                    ", ".join(repr(c) for c in choices), value
                )
            )
        return value

    return parser


def optional(parser):
    def wrapped(value):
        return None if value is None else parser(value)

    return wrapped


def boolean(value):
    if isinstance(value, str):
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError("cannot interpret {!r} as a boolean".format(value))
    return bool(value)
