"""Representation methods compared by fairlatent.

Each method is a concrete subclass of `Method` in its own submodule,
named for the method (such as `method.nrl.NRL`). A lazy-loading
`registry` of these classes is provided for their dynamic inspection
and retrieval.

"""
from .base import (  # noqa: F401
    Fit,
    Method,
    PluginRegistry,
)


registry = PluginRegistry(Method,
                          __name__,
                          ignore=['base'])


#: methods of the baseline comparison, in report order
COMPARISON = ('original', 'original_p', 'ae', 'ae_p', 'nrl')


def get_method(name):
    """Instantiate the registered method `name`."""
    from fairlatent.error import ConfigError

    try:
        method_class = registry[name]
    except KeyError:
        raise ConfigError(f"unknown method {name!r} (select from: {', '.join(registry)})",
                          code='method')

    return method_class()
