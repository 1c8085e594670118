"""Run configuration.

Configuration is layered, lowest precedence first:

  1. defaults of the configuration dataclasses
  2. a preset (`--preset`), shipped under `fairlatent/preset/`
  3. a TOML file (`--config`), its relative `[data] path` taken
     from its own directory
  4. environment variables prefixed `FAIRLATENT_`
  5. command-line flags

A configuration file may contain top-level `method` and `seed`, and
the tables `[data]` (with `[data.columns]` and `[data.label]`),
`[train]`, `[evaluate]` and `[audit]`:

    method = "nrl"
    seed = 7

    [data]
    path = "adult.csv"

    [data.columns]
    age = "continuous"
    sex = "protected"
    income = "label"

    [train]
    alpha = 10.0

Environment variables name a top-level key (`FAIRLATENT_SEED`) or a
section's key (`FAIRLATENT_TRAIN_ALPHA=100`); values are read as TOML
values, or otherwise as strings.

"""
import copy
import dataclasses
import os
import pathlib
import typing

import toml

from fairlatent.data import MISSING_DEFAULT, schema_from_mapping
from fairlatent.error import ConfigError, FairLatentError
from fairlatent.evaluate import EvaluateConfig
from fairlatent.train import TrainConfig


ENV_PREFIX = 'FAIRLATENT_'

PRESET_PATH = pathlib.Path(__file__).parent / 'preset'

DEFAULT_METHOD = 'nrl'

DEFAULT_LAMBDA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)


@dataclasses.dataclass(frozen=True)
class DataConfig:

    path: typing.Optional[pathlib.Path] = None
    missing: typing.Tuple[str, ...] = MISSING_DEFAULT
    columns: typing.Mapping[str, str] = dataclasses.field(default_factory=dict)
    positive: typing.Optional[typing.Tuple[str, ...]] = None

    @property
    def schema(self):
        if not self.columns:
            raise ConfigError("no column schema configured (see [data.columns])",
                              code='schema')

        return schema_from_mapping(self.columns)


@dataclasses.dataclass(frozen=True)
class AuditConfig:

    lambda_grid: typing.Tuple[float, ...] = DEFAULT_LAMBDA_GRID
    flip_group: typing.Optional[str] = None

    def __post_init__(self):
        if not self.lambda_grid:
            raise ConfigError("audit regularization grid is empty", code='empty-grid')

        if any(lam < 0 for lam in self.lambda_grid):
            raise ConfigError(f"audit regularization strengths must be non-negative: "
                              f"{list(self.lambda_grid)}")


@dataclasses.dataclass(frozen=True)
class RunConfig:

    method: str = DEFAULT_METHOD
    seed: int = 0
    data: DataConfig = dataclasses.field(default_factory=DataConfig)
    train: TrainConfig = dataclasses.field(default_factory=TrainConfig)
    evaluate: EvaluateConfig = dataclasses.field(default_factory=EvaluateConfig)
    audit: AuditConfig = dataclasses.field(default_factory=AuditConfig)

    def echo(self):
        """Plain mapping of the configuration (for run metadata)."""
        echo = dataclasses.asdict(self)
        echo['data'] = {key: (str(value) if isinstance(value, pathlib.Path) else value)
                        for (key, value) in echo['data'].items() if value is not None}
        echo['data']['missing'] = list(self.data.missing)
        echo['evaluate'] = {key: value for (key, value) in echo['evaluate'].items()
                            if value is not None}
        echo['audit'] = {key: value for (key, value) in echo['audit'].items()
                         if value is not None}
        return echo


SECTIONS = {
    'train': TrainConfig,
    'evaluate': EvaluateConfig,
    'audit': AuditConfig,
}

TOP_LEVEL = ('method', 'seed')


def presets():
    """Names of the shipped presets."""
    return sorted(path.stem for path in PRESET_PATH.glob('*.toml'))


def load_preset(name):
    path = PRESET_PATH / f'{name}.toml'

    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r} (select from: {', '.join(presets())})",
                          code='preset')

    return toml.load(path)


def load_file(path):
    try:
        return toml.load(path)
    except FileNotFoundError as exc:
        raise ConfigError(f"no such configuration file: '{path}'", code='missing-file') from exc
    except toml.TomlDecodeError as exc:
        raise ConfigError(f"{path}: malformed configuration: {exc}", code='format') from exc


def parse_value(value):
    """Read `value` as a TOML value, falling back to the plain string."""
    try:
        return toml.loads(f'value = {value}')['value']
    except toml.TomlDecodeError:
        return value


def environment_layer(environ=None):
    """Configuration layer of the `FAIRLATENT_` environment variables."""
    environ = os.environ if environ is None else environ
    layer = {}

    for (name, value) in sorted(environ.items()):
        if not name.startswith(ENV_PREFIX):
            continue

        key = name[len(ENV_PREFIX):].lower()

        if key in TOP_LEVEL:
            layer[key] = parse_value(value)
            continue

        (section, _sep, field) = key.partition('_')
        if section in SECTIONS or section == 'data':
            layer.setdefault(section, {})[field] = parse_value(value)

    return layer


def merge(base, layer):
    """Recursive merge of mapping `layer` over `base` (returning a new
    mapping).

    `[data.columns]` is replaced whole rather than merged, such that
    a schema is never a mix of layers.

    """
    merged = copy.deepcopy(base)

    for (key, value) in layer.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict) and key != 'columns':
            merged[key] = merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)

    return merged


def _build(config_class, values, section):
    fields = {field.name for field in dataclasses.fields(config_class)}
    unknown = sorted(set(values) - fields)

    if unknown:
        raise ConfigError(f"[{section}]: unknown key(s) {', '.join(unknown)} "
                          f"(select from: {', '.join(sorted(fields))})")

    values = {key: (tuple(value) if isinstance(value, list) else value)
              for (key, value) in values.items()}

    try:
        return config_class(**values)
    except FairLatentError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


def _build_data(values):
    values = dict(values)

    label = values.pop('label', {})
    if not isinstance(label, dict) or set(label) - {'positive'}:
        raise ConfigError("[data.label]: only key 'positive' is supported")

    if label.get('positive') is not None:
        values['positive'] = tuple(str(value) for value in label['positive'])

    if values.get('path') is not None:
        values['path'] = pathlib.Path(values['path'])

    if 'columns' in values and not isinstance(values['columns'], dict):
        raise ConfigError("[data.columns] must be a table of column name to kind")

    return _build(DataConfig, values, 'data')


def build_config(values):
    """Construct a `RunConfig` from a merged configuration mapping."""
    unknown = sorted(set(values) - set(TOP_LEVEL) - set(SECTIONS) - {'data'})
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")

    try:
        seed = int(values.get('seed', 0))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"seed must be an integer: {values['seed']!r}") from exc

    train = dict(values.get('train', {}))
    if 'seed' in train:
        raise ConfigError("[train]: set the seed at top level (or by --seed)")
    train['seed'] = seed

    return RunConfig(
        method=str(values.get('method', DEFAULT_METHOD)),
        seed=seed,
        data=_build_data(values.get('data', {})),
        train=_build(TrainConfig, train, 'train'),
        evaluate=_build(EvaluateConfig, values.get('evaluate', {}), 'evaluate'),
        audit=_build(AuditConfig, values.get('audit', {}), 'audit'),
    )


def resolve_data_path(values, path):
    """Resolve a relative `[data] path` of the file at `path` against
    that file's directory.

    """
    data_path = values.get('data', {}).get('path')

    if data_path is None or pathlib.Path(data_path).is_absolute():
        return values

    return merge(values, {'data': {'path': str(pathlib.Path(path).parent / data_path)}})


def load_config(*, preset=None, path=None, environ=None, overrides=None):
    """Layer the configuration sources and build a `RunConfig`.

    `overrides` is the (sparse) mapping of command-line values.

    """
    values = {}

    if preset:
        values = merge(values, load_preset(preset))

    if path:
        values = merge(values, resolve_data_path(load_file(path), path))

    values = merge(values, environment_layer(environ))

    if overrides:
        values = merge(values, overrides)

    return build_config(values)
