"""Column schema: the role each CSV column plays."""
import collections
import typing

from fairlatent.error import FairLatentError


CONTINUOUS = 'continuous'
CATEGORICAL = 'categorical'
LABEL = 'label'
PROTECTED = 'protected'

KINDS = (CONTINUOUS, CATEGORICAL, LABEL, PROTECTED)


class DatasetError(FairLatentError):

    code = 'dataset'


class ColumnSchema(typing.NamedTuple):
    """Name of a CSV column and its kind."""
    name: str
    kind: str


def validate_schema(schema):
    """Check the schema invariants and return it as a tuple.

    Exactly one column must be the label and exactly one the protected
    attribute; names must be unique.

    """
    schema = tuple(ColumnSchema(*column) for column in schema)

    for column in schema:
        if column.kind not in KINDS:
            raise DatasetError(f"column {column.name!r}: unknown kind {column.kind!r} "
                               f"(select from: {', '.join(KINDS)})", code='schema')

    name_counts = collections.Counter(column.name for column in schema)
    duplicates = sorted(name for (name, count) in name_counts.items() if count > 1)
    if duplicates:
        raise DatasetError(f"duplicate column names: {', '.join(duplicates)}", code='schema')

    for kind in (LABEL, PROTECTED):
        count = sum(1 for column in schema if column.kind == kind)
        if count != 1:
            raise DatasetError(f"schema requires exactly one {kind} column, found {count}",
                               code='schema')

    return schema


def schema_from_mapping(columns):
    """Construct a validated schema from an ordered `name -> kind`
    mapping (such as the `[data.columns]` table of a config file).

    """
    return validate_schema(ColumnSchema(str(name), str(kind)) for (name, kind) in columns.items())


def find_column(schema, kind):
    (column,) = (column for column in schema if column.kind == kind)
    return column
