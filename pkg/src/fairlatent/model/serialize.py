"""Flat text format of model states.

Each array is written as a header line `<name> <rows> <cols>` followed
by its rows, values separated by spaces and printed with 17 significant
digits (such that they read back exactly). Vectors are written as a
single row. Lines starting with `#` are comments.

    # fairlatent encoder
    encoder.0.W 3 2
    0.12 -0.5
    ...

"""
import collections
import pathlib

import numpy as np

from .linear import ClassifierState, CriticState, Dense, EncoderState, ModelError


VALUE_FORMAT = '%.17g'


def dump_arrays(arrays, fd, comment=None):
    """Write `(name, array)` pairs to the text file object `fd`."""
    if comment:
        fd.write(f'# {comment}\n')

    for (name, array) in arrays:
        array = np.atleast_2d(np.asarray(array, dtype=float))
        (rows, cols) = array.shape
        fd.write(f'{name} {rows} {cols}\n')
        np.savetxt(fd, array, fmt=VALUE_FORMAT, delimiter=' ')


def load_arrays(fd):
    """Read arrays written by `dump_arrays` into an ordered mapping."""
    lines = (line.strip() for line in fd)
    lines = (line for line in lines if line and not line.startswith('#'))

    arrays = collections.OrderedDict()

    for header in lines:
        try:
            (name, rows, cols) = header.split()
            (rows, cols) = (int(rows), int(cols))
        except ValueError as exc:
            raise ModelError(f"malformed array header: {header!r}", code='format') from exc

        values = []
        for _row in range(rows):
            try:
                line = next(lines)
            except StopIteration:
                raise ModelError(f"array {name!r}: expected {rows} rows", code='format')

            try:
                row = [float(value) for value in line.split()]
            except ValueError as exc:
                raise ModelError(f"array {name!r}: non-numeric row: {line!r}",
                                 code='format') from exc

            if len(row) != cols:
                raise ModelError(f"array {name!r}: expected {cols} columns, found {len(row)}",
                                 code='format')
            values.append(row)

        arrays[name] = np.array(values, dtype=float).reshape(rows, cols)

    return arrays


def _stack(arrays, stack):
    layers = []
    index = 0

    while f'{stack}.{index}.W' in arrays:
        layers.append(Dense(arrays[f'{stack}.{index}.W'], arrays[f'{stack}.{index}.b'][0]))
        index += 1

    if not layers:
        raise ModelError(f"no {stack} layers found", code='format')

    return tuple(layers)


def save_encoder(enc, path):
    with pathlib.Path(path).open('w') as fd:
        dump_arrays(enc.named_arrays(), fd, comment='fairlatent encoder')


def load_encoder(path):
    with pathlib.Path(path).open() as fd:
        arrays = load_arrays(fd)

    return EncoderState(_stack(arrays, 'encoder'), _stack(arrays, 'decoder'))


def save_critic(cr, path):
    with pathlib.Path(path).open('w') as fd:
        dump_arrays([('critic.w', cr.w), ('critic.c_clip', [cr.c_clip])], fd,
                    comment='fairlatent critic')


def load_critic(path):
    with pathlib.Path(path).open() as fd:
        arrays = load_arrays(fd)

    try:
        return CriticState(arrays['critic.w'][0], float(arrays['critic.c_clip'][0, 0]))
    except KeyError as exc:
        raise ModelError(f"critic array missing: {exc}", code='format') from exc


def save_classifier(clf, path):
    with pathlib.Path(path).open('w') as fd:
        dump_arrays([('classifier.W', clf.W), ('classifier.b', [clf.b]),
                     ('classifier.lam', [clf.lam])], fd, comment='fairlatent classifier')


def load_classifier(path):
    with pathlib.Path(path).open() as fd:
        arrays = load_arrays(fd)

    try:
        return ClassifierState(arrays['classifier.W'][0],
                               float(arrays['classifier.b'][0, 0]),
                               float(arrays['classifier.lam'][0, 0]))
    except KeyError as exc:
        raise ModelError(f"classifier array missing: {exc}", code='format') from exc
