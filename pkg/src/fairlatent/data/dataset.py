"""Tabular ingestion: CSV loading, preprocessing into a numeric
`Dataset`, group partitions, splits and protected-column removal.

A `RawTable` is a `pandas.DataFrame` of stripped cell strings in header
order. A `Dataset` is immutable once constructed: its arrays are
read-only and operations return new instances.

"""
import dataclasses
import pathlib
import typing

import numpy as np
import pandas as pd
from sklearn.model_selection import train_test_split

from .schema import (
    CATEGORICAL,
    CONTINUOUS,
    LABEL,
    PROTECTED,
    DatasetError,
    find_column,
    validate_schema,
)


#: cell values treated as missing by default (Adult marks these with "?")
MISSING_DEFAULT = ('?', '')

RawTable = pd.DataFrame


def _freeze(array, dtype):
    array = np.array(array, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclasses.dataclass(frozen=True, eq=False, repr=False)
class Dataset:
    """Preprocessed feature matrix `X` (n × m), binary labels `y`,
    dense protected classes `p` and their bookkeeping.

    `standardization` maps each continuous feature to the `(mean, std)`
    with which it was scaled. `protected_columns` names the feature
    column(s) encoding the protected attribute (whether or not they
    remain in `X`).

    """
    X: np.ndarray
    y: np.ndarray
    p: np.ndarray
    feature_names: typing.Tuple[str, ...]
    standardization: typing.Mapping[str, typing.Tuple[float, float]]
    protected_columns: typing.Tuple[str, ...]
    protected_levels: typing.Tuple[str, ...]
    label_levels: typing.Tuple[str, ...] = ('0', '1')
    dropped: int = 0
    notes: typing.Tuple[str, ...] = ()

    def __post_init__(self):
        X = _freeze(self.X, float)
        if X.ndim != 2:
            raise DatasetError(f"feature matrix must be 2-D not {X.ndim}-D", code='shape')

        object.__setattr__(self, 'X', X)
        object.__setattr__(self, 'y', _freeze(self.y, np.int64))
        object.__setattr__(self, 'p', _freeze(self.p, np.int64))
        object.__setattr__(self, 'feature_names', tuple(self.feature_names))
        object.__setattr__(self, 'protected_columns', tuple(self.protected_columns))
        object.__setattr__(self, 'protected_levels', tuple(self.protected_levels))
        object.__setattr__(self, 'label_levels', tuple(self.label_levels))
        object.__setattr__(self, 'notes', tuple(self.notes))

        (n, m) = X.shape

        if len(self.y) != n or len(self.p) != n:
            raise DatasetError(f"label ({len(self.y)}) and protected ({len(self.p)}) "
                               f"vectors must match sample count {n}", code='shape')

        if len(self.feature_names) != m:
            raise DatasetError(f"{len(self.feature_names)} feature names for {m} columns",
                               code='shape')

        if len(self.protected_levels) < 2:
            raise DatasetError("protected attribute must have at least two classes "
                               f"(found {len(self.protected_levels)})",
                               code='protected-classes')

        counts = np.bincount(self.p, minlength=self.n_protected) if n else ()
        if len(counts) != self.n_protected or not all(counts):
            raise DatasetError("every protected class must appear at least once "
                               f"(class counts: {list(counts)})", code='protected-classes')

        if not np.isin(self.y, (0, 1)).all():
            raise DatasetError("labels must be 0 or 1", code='label-values')

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def m(self):
        return self.X.shape[1]

    @property
    def n_protected(self):
        return len(self.protected_levels)

    @property
    def has_protected(self):
        return bool(set(self.protected_columns) & set(self.feature_names))

    def __repr__(self):
        return (f'<Dataset: n={self.n} m={self.m} '
                f'protected={"|".join(self.protected_levels)}>')

    def subset(self, index):
        """Rows `index` of this dataset (standardization copied, not
        recomputed).

        """
        index = np.asarray(index, dtype=np.int64)
        return dataclasses.replace(self, X=self.X[index], y=self.y[index], p=self.p[index])

    def with_labels(self, y):
        return dataclasses.replace(self, y=y)

    def frame(self):
        """Features, label & protected class as a `DataFrame`."""
        frame = pd.DataFrame(self.X, columns=list(self.feature_names))
        frame['__label__'] = self.y
        frame['__protected__'] = self.p
        return frame


class GroupPartition(typing.NamedTuple):
    """Sample indices of each protected class `c`, i.e. `U^(c)`."""
    indices: typing.Tuple[np.ndarray, ...]

    def __len__(self):
        return len(self.indices)

    def group(self, c):
        return self.indices[c]

    def complement(self, c):
        """Indices of every class but `c`, in ascending order."""
        return np.sort(np.concatenate([index for (other, index) in enumerate(self.indices)
                                       if other != c]))

    def sizes(self):
        return tuple(len(index) for index in self.indices)


def load_csv(path, schema, missing=MISSING_DEFAULT):
    """Read the CSV at `path` into a `RawTable`, checking it against
    `schema`.

    The header must name exactly the schema's columns. Every row must
    have the header's field count, and every present cell of a
    continuous column must be numeric; failures name the offending line.

    """
    schema = validate_schema(schema)
    path = pathlib.Path(path)

    if not path.is_file():
        raise DatasetError(f"no such file: '{path}'", code='missing-file')

    try:
        table = pd.read_csv(path, header=None, dtype=str, keep_default_na=False,
                            skipinitialspace=True, skip_blank_lines=False,
                            encoding='utf-8-sig')
    except pd.errors.EmptyDataError:
        raise DatasetError(f"{path}: file is empty", code='header-mismatch')
    except pd.errors.ParserError as exc:
        raise DatasetError(f"{path}: {exc}", code='row-length') from exc

    header = [str(name).strip() for name in table.iloc[0]]
    names = [column.name for column in schema]
    unknown = [name for name in header if name not in names]
    absent = [name for name in names if name not in header]
    if unknown or absent or len(header) != len(names):
        raise DatasetError(f"{path}: header does not match schema "
                           f"(not in schema: {unknown or 'none'}; "
                           f"not in header: {absent or 'none'})",
                           code='header-mismatch')

    raw = table.iloc[1:].set_axis(header, axis=1)

    # row i of the table is line i + 1 of the file
    lines = raw.index.to_numpy() + 1

    first = raw.iloc[:, 0]
    blank = ((first.isna() | first.str.strip().eq('')) &
             raw.iloc[:, 1:].isna().all(axis=1)).to_numpy()
    short = raw.isna().any(axis=1).to_numpy() & ~blank

    if short.any():
        position = int(short.nonzero()[0][0])
        found = int(raw.iloc[position].notna().sum())
        raise DatasetError(f"{path}: line {lines[position]}: expected "
                           f"{len(header)} fields, found {found}",
                           code='row-length')

    raw = raw[~blank].apply(lambda values: values.str.strip())
    lines = lines[~blank]

    for column in schema:
        if column.kind != CONTINUOUS:
            continue

        values = raw[column.name]
        present = ~values.isin(missing)
        numeric = pd.to_numeric(values.where(present), errors='coerce')
        invalid = (present & numeric.isna()).to_numpy()

        if invalid.any():
            position = int(invalid.nonzero()[0][0])
            raise DatasetError(f"{path}: line {lines[position]}: non-numeric value "
                               f"{values.iloc[position]!r} in continuous column {column.name!r}",
                               code='non-numeric')

    return raw.reset_index(drop=True)


def _map_label(values, positive):
    if positive:
        positive = {str(value) for value in positive}
        levels = ('other', '|'.join(sorted(positive)))
        return (values.isin(positive).to_numpy(np.int64), levels)

    levels = sorted(values.unique())
    if len(levels) > 2:
        raise DatasetError(f"label column has {len(levels)} distinct values "
                           f"({', '.join(map(repr, levels[:5]))}); binary labels required",
                           code='label-values')

    if set(levels) <= {'0', '1'}:
        levels = ['0', '1']

    codes = values.map({level: code for (code, level) in enumerate(levels)})
    return (codes.to_numpy(np.int64), tuple(levels))


def preprocess(raw, schema, *, missing=MISSING_DEFAULT, positive=None):
    """Encode `raw` into a `Dataset`.

    * rows with any missing cell are dropped (and counted)
    * continuous columns are standardized by mean and population stddev
    * categorical columns are one-hot expanded (levels in sorted order)
    * the label is mapped to {0, 1}: members of `positive` map to 1 if
      given, otherwise the larger of two sorted levels maps to 1
    * the protected attribute is mapped to dense classes in order of
      first appearance, and is also included as feature column(s): a
      single indicator for two classes, one-hot otherwise

    A zero-variance continuous column is centered only; this is recorded
    in the dataset's `notes`.

    """
    schema = validate_schema(schema)
    names = [column.name for column in schema]

    complete = ~raw[names].isin(missing).any(axis=1)
    dropped = int((~complete).sum())
    table = raw.loc[complete].reset_index(drop=True)

    if table.empty:
        raise DatasetError("no complete rows remain after dropping missing values",
                           code='empty')

    features = {}
    standardization = {}
    notes = []

    protected = find_column(schema, PROTECTED)
    protected_levels = tuple(str(level) for level in pd.unique(table[protected.name]))
    p = table[protected.name].map(
        {level: code for (code, level) in enumerate(protected_levels)}
    ).to_numpy(np.int64)

    (y, label_levels) = _map_label(table[find_column(schema, LABEL).name], positive)

    for column in schema:
        values = table[column.name]

        if column.kind == CONTINUOUS:
            x = pd.to_numeric(values).to_numpy(float)
            mean = float(x.mean())
            std = float(x.std())

            if std == 0:
                notes.append(f"continuous column {column.name!r} has zero variance: "
                             "centered only")
                std = 1.0

            features[column.name] = (x - mean) / std
            standardization[column.name] = (mean, std)
        elif column.kind == CATEGORICAL:
            for level in sorted(values.unique()):
                features[f'{column.name}={level}'] = (values == level).to_numpy(float)
        elif column.kind == PROTECTED:
            if len(protected_levels) == 2:
                features[column.name] = p.astype(float)
            else:
                for (code, level) in enumerate(protected_levels):
                    features[f'{column.name}={level}'] = (p == code).astype(float)

    protected_columns = tuple(name for name in features
                              if name == protected.name or name.startswith(f'{protected.name}='))

    return Dataset(
        X=np.column_stack(list(features.values())),
        y=y,
        p=p,
        feature_names=tuple(features),
        standardization=standardization,
        protected_columns=protected_columns,
        protected_levels=protected_levels,
        label_levels=label_levels,
        dropped=dropped,
        notes=tuple(notes),
    )


def partition(ds):
    """Group the samples of `ds` by protected class."""
    return GroupPartition(tuple(np.flatnonzero(ds.p == c) for c in range(ds.n_protected)))


def split_index(n, train_fraction, seed):
    """Uniform random split of `range(n)` without replacement, returning
    sorted (train, test) index arrays.

    """
    if not 0 < train_fraction < 1:
        raise DatasetError(f"train fraction must lie in (0, 1): {train_fraction!r}",
                           code='split-fraction')

    if n < 2:
        raise DatasetError(f"cannot split {n} sample(s)", code='split-fraction')

    try:
        (train, test) = train_test_split(np.arange(n), train_size=train_fraction,
                                         random_state=seed, shuffle=True)
    except ValueError as exc:
        raise DatasetError(f"train fraction {train_fraction} leaves an empty split of "
                           f"{n} samples", code='split-fraction') from exc

    return (np.sort(train), np.sort(test))


def split(ds, train_fraction, seed):
    """Split `ds` into seeded (train, test) datasets."""
    (train, test) = split_index(ds.n, train_fraction, seed)
    return (ds.subset(train), ds.subset(test))


def drop_protected(ds):
    """Remove the protected attribute's feature column(s) from `X`.

    The protected vector `p` is retained for evaluation.

    """
    if not ds.has_protected:
        raise DatasetError("protected attribute columns are not present in the features "
                           f"(already dropped): {', '.join(ds.protected_columns)}",
                           code='already-dropped')

    keep = [index for (index, name) in enumerate(ds.feature_names)
            if name not in ds.protected_columns]

    return dataclasses.replace(
        ds,
        X=ds.X[:, keep],
        feature_names=tuple(ds.feature_names[index] for index in keep),
    )
