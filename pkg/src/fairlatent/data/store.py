"""Persistence of prepared datasets.

A prepared dataset directory holds the feature frame (in any format of
`fairlatent.util.format_handlers`), the `preprocess.toml` sidecar of
standardization parameters and encodings, and `summary.toml`.

"""
import pathlib

import numpy as np
import toml

from fairlatent.util import format_handlers

from .dataset import Dataset
from .schema import DatasetError


DATASET_STEM = 'dataset'
SIDECAR_NAME = 'preprocess.toml'
SUMMARY_NAME = 'summary.toml'

LABEL_COLUMN = '__label__'
PROTECTED_COLUMN = '__protected__'


def summarize(ds):
    """Sample & feature counts, protected class frequencies and the
    positive rate of `ds`.

    """
    counts = np.bincount(ds.p, minlength=ds.n_protected)
    return {
        'n': ds.n,
        'm': ds.m,
        'dropped': ds.dropped,
        'positive_rate': float(ds.y.mean()),
        'protected': {
            level: float(count / ds.n)
            for (level, count) in zip(ds.protected_levels, counts)
        },
    }


def save_dataset(ds, outdir, file_format='csv'):
    """Write `ds` to `outdir`, returning the path of the feature file."""
    outdir = pathlib.Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    writer = format_handlers.get_writer(file_format)
    outpath = writer(ds.frame(), outdir, DATASET_STEM)

    sidecar = {
        'feature_names': list(ds.feature_names),
        'protected_columns': list(ds.protected_columns),
        'protected_levels': list(ds.protected_levels),
        'label_levels': list(ds.label_levels),
        'dropped': ds.dropped,
        'notes': list(ds.notes),
        'standardization': {
            name: {'mean': mean, 'std': std}
            for (name, (mean, std)) in ds.standardization.items()
        },
    }

    with (outdir / SIDECAR_NAME).open('w') as fd:
        toml.dump(sidecar, fd)

    with (outdir / SUMMARY_NAME).open('w') as fd:
        toml.dump(summarize(ds), fd)

    return outpath


def load_dataset(outdir):
    """Read a prepared dataset directory written by `save_dataset`."""
    outdir = pathlib.Path(outdir)

    try:
        sidecar = toml.load(outdir / SIDECAR_NAME)
        data_path = format_handlers.find(outdir, DATASET_STEM)
    except FileNotFoundError as exc:
        raise DatasetError(f"not a prepared dataset directory: '{outdir}' ({exc})",
                           code='missing-file') from exc

    try:
        reader = format_handlers.get_reader(data_path)
    except NotImplementedError as exc:
        raise DatasetError(f"unsupported dataset file type: '{data_path}'",
                           code='format') from exc

    frame = reader(data_path)
    feature_names = sidecar['feature_names']

    missing = [name for name in feature_names + [LABEL_COLUMN, PROTECTED_COLUMN]
               if name not in frame.columns]
    if missing:
        raise DatasetError(f"{data_path}: missing columns {missing}", code='header-mismatch')

    return Dataset(
        X=frame[feature_names].to_numpy(float),
        y=frame[LABEL_COLUMN].to_numpy(np.int64),
        p=frame[PROTECTED_COLUMN].to_numpy(np.int64),
        feature_names=feature_names,
        standardization={
            name: (params['mean'], params['std'])
            for (name, params) in sidecar['standardization'].items()
        },
        protected_columns=sidecar['protected_columns'],
        protected_levels=sidecar['protected_levels'],
        label_levels=sidecar['label_levels'],
        dropped=sidecar['dropped'],
        notes=sidecar['notes'],
    )
