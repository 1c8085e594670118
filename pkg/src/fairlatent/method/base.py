import abc
import collections.abc
import importlib
import pkgutil
import typing

import numpy as np

from fairlatent.data import drop_protected
from fairlatent.error import ConfigError
from fairlatent.model import CriticState, EncoderState, encode
from fairlatent.train import TrainHistory


class Fit(typing.NamedTuple):
    """Learned state of a method (all `None` for methods without one)."""
    encoder: typing.Optional[EncoderState] = None
    critic: typing.Optional[CriticState] = None
    history: typing.Optional[TrainHistory] = None


class Method(abc.ABC):
    """Representation method: a transformation of the feature matrix
    to which the downstream classifier is fit.

    Concrete methods implement `fit()`, returning a `Fit`. Methods
    setting `excludes_protected` see (and represent) the dataset with
    its protected column(s) removed.

    """
    #: whether the protected attribute is removed from the features
    excludes_protected = False

    #: whether the method learns an encoder
    learns = False

    #: whether the method accepts more than two protected classes
    multiclass = True

    @property
    def name(self):
        return self.__class__.__module__.rsplit('.', 1)[-1]

    def prepare(self, ds):
        """The dataset as the method sees it."""
        return drop_protected(ds) if self.excludes_protected else ds

    def check(self, ds):
        """Raise `ConfigError` unless the method can represent `ds`."""
        if ds.n_protected > 2 and not self.multiclass:
            raise ConfigError(f"method {self.name} requires a binary protected attribute "
                              f"(found {ds.n_protected} classes); see nrl_multiclass",
                              code='method')

    @abc.abstractmethod
    def fit(self, ds, cfg, *, callback=None):
        """Learn the method's state from the prepared dataset `ds`."""

    def represent(self, fit, ds):
        """Representation of the prepared dataset `ds`."""
        if fit.encoder is None:
            return np.asarray(ds.X)

        return encode(fit.encoder, ds.X)

    def __repr__(self):
        return f'method:{self.name}'


class PluginRegistry(collections.abc.Mapping):
    """Lazy class registry.

    The specified `package` is crawled -- lazily -- for well-named
    modules containing class-based plugins; and, as needed, subclasses
    of the specified `class_or_tuple` base (as with `issubclass()`)
    are imported and registered for retrieval.

    The registry operates as an immutable mapping, of plugin classes
    stored under the names of the modules in which they are found.

    """
    def __init__(self, class_or_tuple, package, ignore=()):
        self.base = class_or_tuple if isinstance(class_or_tuple, tuple) else (class_or_tuple,)

        self.package = importlib.import_module(package) if isinstance(package, str) else package

        self.ignore = ignore if isinstance(ignore, frozenset) else frozenset(ignore)

        self.__cache__ = None

    def __generate_names__(self):
        """Discover the plugin package's modules (excluding sub-packages
        and those named in `ignore`).

        """
        for module in pkgutil.iter_modules(self.package.__path__):
            if not module.ispkg and module.name not in self.ignore:
                yield module.name

    def __retrieve_member__(self, name):
        """Import the named module and return its one plugin class."""
        module = importlib.import_module(f'{self.package.__name__}.{name}')
        (value,) = (member for member in vars(module).values()
                    if isinstance(member, type) and
                       issubclass(member, self.base) and  # noqa: E127
                       member not in self.base and        # noqa: E127
                       member.__module__ == module.__name__)
        return value

    def __populate_names__(self):
        if self.__cache__ is None:
            self.__cache__ = dict.fromkeys(sorted(self.__generate_names__()))

    def __iter__(self):
        self.__populate_names__()
        yield from self.__cache__

    def __len__(self):
        self.__populate_names__()
        return len(self.__cache__)

    def __getitem__(self, name):
        self.__populate_names__()

        value = self.__cache__[name]

        if value is None:
            value = self.__cache__[name] = self.__retrieve_member__(name)

        return value
