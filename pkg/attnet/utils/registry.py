import logging
from abc import ABCMeta


class SubclassRegisteringABCMeta(ABCMeta):
    """
    Metaclass that registers subclasses under the keys listed in their
    `REGISTRY_KEYS` attribute, so that implementations (such as on-disk
    encodings) can be looked up by name from configuration.
    """

    def __init__(cls, name, bases, dct):
        super(SubclassRegisteringABCMeta, cls).__init__(name, bases, dct)

        if not hasattr(cls, "_registry"):
            cls._registry = {}

        for key in getattr(cls, "REGISTRY_KEYS", None) or []:
            if key in cls._registry and cls.__name__ != cls._registry[key].__name__:
                logging.info(
                    "Ignoring attempt by class `{}` to register key '{}', which is already registered for class `{}`.".format(
                        cls.__name__, key, cls._registry[key].__name__
                    )
                )
            else:
                cls._registry[key] = cls

    def for_kind(cls, key):
        if key not in cls._registry:
            raise KeyError(
                "No `{}` registered for '{}'. Known kinds: {}.".format(
                    cls.__name__, key, ", ".join(sorted(cls._registry))
                )
            )
        return cls._registry[key]

    def kinds(cls):
        return sorted(cls._registry)
