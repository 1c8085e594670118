"""Tabular data ingestion and preprocessing."""
from .schema import (  # noqa: F401
    CATEGORICAL,
    CONTINUOUS,
    KINDS,
    LABEL,
    PROTECTED,
    ColumnSchema,
    DatasetError,
    schema_from_mapping,
    validate_schema,
)

from .dataset import (  # noqa: F401
    MISSING_DEFAULT,
    Dataset,
    GroupPartition,
    RawTable,
    drop_protected,
    load_csv,
    partition,
    preprocess,
    split,
    split_index,
)

from .store import (  # noqa: F401
    load_dataset,
    save_dataset,
    summarize,
)
