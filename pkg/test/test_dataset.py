"""Tests for tabular ingestion & preprocessing"""
import math
import pathlib
import unittest

import numpy as np

from fairlatent.data import (
    ColumnSchema,
    DatasetError,
    drop_protected,
    load_csv,
    load_dataset,
    partition,
    preprocess,
    save_dataset,
    split,
    split_index,
    validate_schema,
)

from .base import mktestdir, synthetic_dataset


TOY_CSV = pathlib.Path(__file__).parent / 'data' / 'toy' / 'toy.csv'

TOY_SCHEMA = (
    ColumnSchema('age', 'continuous'),
    ColumnSchema('hours', 'continuous'),
    ColumnSchema('workclass', 'categorical'),
    ColumnSchema('sex', 'protected'),
    ColumnSchema('income', 'label'),
)


def write_csv(tempdir, text):
    path = pathlib.Path(tempdir) / 'table.csv'
    path.write_text(text)
    return path


class TestSchema(unittest.TestCase):

    def test_label_required(self):
        with self.assertRaises(DatasetError) as context:
            validate_schema([('a', 'continuous'), ('s', 'protected')])

        self.assertEqual(context.exception.code, 'schema')

    def test_duplicate_names(self):
        with self.assertRaises(DatasetError):
            validate_schema([('a', 'continuous'), ('a', 'label'), ('s', 'protected')])

    def test_unknown_kind(self):
        with self.assertRaises(DatasetError):
            validate_schema([('a', 'ordinal'), ('y', 'label'), ('s', 'protected')])


class TestLoadCSV(unittest.TestCase):

    def test_toy(self):
        raw = load_csv(TOY_CSV, TOY_SCHEMA)
        self.assertEqual(len(raw), 80)
        self.assertEqual(list(raw.columns), ['age', 'hours', 'workclass', 'sex', 'income'])
        self.assertEqual(raw['sex'].iloc[0], 'Male')

    def test_missing_file(self):
        with self.assertRaises(DatasetError) as context:
            load_csv(TOY_CSV.with_name('absent.csv'), TOY_SCHEMA)

        self.assertEqual(context.exception.code, 'missing-file')

    def test_header_mismatch(self):
        with mktestdir() as tempdir:
            path = write_csv(tempdir, 'age,sex\n1,a\n')

            with self.assertRaises(DatasetError) as context:
                load_csv(path, TOY_SCHEMA)

        self.assertEqual(context.exception.code, 'header-mismatch')

    def test_row_length(self):
        schema = (('a', 'continuous'), ('s', 'protected'), ('y', 'label'))

        with mktestdir() as tempdir:
            path = write_csv(tempdir, 'a,s,y\n1,m,0\n2,f\n')

            with self.assertRaises(DatasetError) as context:
                load_csv(path, schema)

        self.assertEqual(context.exception.code, 'row-length')
        self.assertIn('line 3', str(context.exception))

    def test_extra_fields(self):
        schema = (('a', 'continuous'), ('s', 'protected'), ('y', 'label'))

        with mktestdir() as tempdir:
            path = write_csv(tempdir, 'a,s,y\n1,m,0,7\n2,f,1\n')

            with self.assertRaises(DatasetError) as context:
                load_csv(path, schema)

        self.assertEqual(context.exception.code, 'row-length')
        self.assertIn('line 2', str(context.exception))

    def test_byte_order_mark(self):
        schema = (('age', 'continuous'), ('sex', 'protected'), ('income', 'label'))

        with mktestdir() as tempdir:
            path = pathlib.Path(tempdir) / 'table.csv'
            path.write_text('\ufeffage,sex,income\n1,F,0\n2,M,1\n', encoding='utf-8')

            raw = load_csv(path, schema)

        self.assertEqual(list(raw.columns), ['age', 'sex', 'income'])
        self.assertEqual(raw['age'].tolist(), ['1', '2'])

    def test_blank_lines(self):
        schema = (('a', 'continuous'), ('s', 'protected'), ('y', 'label'))

        with mktestdir() as tempdir:
            path = write_csv(tempdir, 'a,s,y\n1, m ,0\n\n2,f,1\n')
            raw = load_csv(path, schema)

            self.assertEqual(raw['s'].tolist(), ['m', 'f'])
            self.assertEqual(raw.index.tolist(), [0, 1])

            path = write_csv(tempdir, 'a,s,y\n1,m,0\n\nx,f,1\n')
            with self.assertRaises(DatasetError) as context:
                load_csv(path, schema)

        self.assertIn('line 4', str(context.exception))

    def test_non_numeric(self):
        schema = (('a', 'continuous'), ('s', 'protected'), ('y', 'label'))

        with mktestdir() as tempdir:
            path = write_csv(tempdir, 'a,s,y\n1,m,0\nten,f,1\n?,f,1\n')

            with self.assertRaises(DatasetError) as context:
                load_csv(path, schema)

        self.assertEqual(context.exception.code, 'non-numeric')
        self.assertIn("'ten'", str(context.exception))


class TestPreprocess(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        raw = load_csv(TOY_CSV, TOY_SCHEMA)
        cls.ds = preprocess(raw, TOY_SCHEMA, positive=['>50K'])

    def test_dropped(self):
        self.assertEqual(self.ds.dropped, 2)
        self.assertEqual(self.ds.n, 78)

    def test_features(self):
        self.assertEqual(self.ds.feature_names, (
            'age',
            'hours',
            'workclass=private',
            'workclass=public',
            'workclass=self',
            'sex',
        ))
        self.assertEqual(self.ds.protected_columns, ('sex',))
        self.assertEqual(self.ds.protected_levels, ('Male', 'Female'))

    def test_standardized(self):
        np.testing.assert_allclose(self.ds.X[:, :2].mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(self.ds.X[:, :2].std(axis=0), 1)

    def test_one_hot(self):
        np.testing.assert_array_equal(self.ds.X[:, 2:5].sum(axis=1), 1)

    def test_labels(self):
        self.assertTrue(np.isin(self.ds.y, (0, 1)).all())
        self.assertEqual(self.ds.y[0], 1)
        self.assertEqual(self.ds.y[1], 0)

    def test_immutable(self):
        with self.assertRaises(ValueError):
            self.ds.X[0, 0] = 1.0

    def test_zero_variance(self):
        schema = (('a', 'continuous'), ('b', 'continuous'), ('s', 'protected'), ('y', 'label'))

        with mktestdir() as tempdir:
            path = write_csv(tempdir, 'a,b,s,y\n1,5,m,0\n2,5,f,1\n3,5,m,1\n')
            ds = preprocess(load_csv(path, schema), schema)

        np.testing.assert_array_equal(ds.X[:, 1], 0)
        self.assertEqual(len(ds.notes), 1)
        self.assertIn("'b'", ds.notes[0])

    def test_label_values(self):
        schema = (('a', 'continuous'), ('s', 'protected'), ('y', 'label'))

        with mktestdir() as tempdir:
            path = write_csv(tempdir, 'a,s,y\n1,m,x\n2,f,y\n3,m,z\n')

            with self.assertRaises(DatasetError) as context:
                preprocess(load_csv(path, schema), schema)

        self.assertEqual(context.exception.code, 'label-values')

    def test_single_protected_class(self):
        schema = (('a', 'continuous'), ('s', 'protected'), ('y', 'label'))

        with mktestdir() as tempdir:
            path = write_csv(tempdir, 'a,s,y\n1,m,0\n2,m,1\n')

            with self.assertRaises(DatasetError) as context:
                preprocess(load_csv(path, schema), schema)

        self.assertEqual(context.exception.code, 'protected-classes')

    def test_multiclass_protected(self):
        schema = (('a', 'continuous'), ('race', 'protected'), ('y', 'label'))

        with mktestdir() as tempdir:
            path = write_csv(tempdir, 'a,race,y\n1,r,0\n2,s,1\n3,t,1\n4,r,0\n')
            ds = preprocess(load_csv(path, schema), schema)

        self.assertEqual(ds.n_protected, 3)
        self.assertEqual(ds.protected_columns, ('race=r', 'race=s', 'race=t'))
        np.testing.assert_array_equal(ds.p, [0, 1, 2, 0])


class TestDatasetOperations(unittest.TestCase):

    def setUp(self):
        self.ds = synthetic_dataset(n=40)

    def test_partition(self):
        part = partition(self.ds)
        self.assertEqual(sum(part.sizes()), self.ds.n)
        self.assertEqual(len(part), 2)
        np.testing.assert_array_equal(part.complement(0), part.group(1))

    def test_split(self):
        (train, test) = split_index(40, 0.7, seed=1)
        self.assertEqual(len(train), 28)
        self.assertEqual(len(test), 12)
        self.assertFalse(set(train) & set(test))

        np.testing.assert_array_equal(split_index(40, 0.7, seed=1)[0], train)

        (ds_train, ds_test) = split(self.ds, 0.7, seed=1)
        self.assertEqual(ds_train.n + ds_test.n, self.ds.n)

    def test_split_sizes(self):
        for (n, fraction) in ((10, 0.7), (33, 0.5), (101, 0.25), (1000, 0.8)):
            with self.subTest(n=n, fraction=fraction):
                (train, test) = split_index(n, fraction, seed=2)

                self.assertEqual(len(train), math.floor(fraction * n))
                self.assertEqual(len(test), n - math.floor(fraction * n))
                np.testing.assert_array_equal(np.union1d(train, test), np.arange(n))

    def test_split_seeds(self):
        trains = [frozenset(split_index(1000, 0.7, seed)[0]) for seed in range(5)]
        self.assertEqual(len(set(trains)), 5)

    def test_split_fraction(self):
        for fraction in (0, 1, 1.5):
            with self.subTest(fraction=fraction):
                with self.assertRaises(DatasetError) as context:
                    split_index(10, fraction, seed=0)

                self.assertEqual(context.exception.code, 'split-fraction')

    def test_drop_protected(self):
        dropped = drop_protected(self.ds)

        self.assertEqual(dropped.m, self.ds.m - 1)
        self.assertNotIn('group', dropped.feature_names)
        np.testing.assert_array_equal(dropped.p, self.ds.p)

        with self.assertRaises(DatasetError) as context:
            drop_protected(dropped)

        self.assertEqual(context.exception.code, 'already-dropped')


class TestStore(unittest.TestCase):

    def test_save_load(self):
        ds = synthetic_dataset(n=30)

        for file_format in ('csv', 'csv.gz', 'parquet', 'feather'):
            with self.subTest(file_format=file_format), mktestdir() as tempdir:
                save_dataset(ds, tempdir, file_format)
                loaded = load_dataset(tempdir)

                np.testing.assert_array_equal(loaded.X, ds.X)
                np.testing.assert_array_equal(loaded.y, ds.y)
                np.testing.assert_array_equal(loaded.p, ds.p)
                self.assertEqual(loaded.feature_names, ds.feature_names)
                self.assertEqual(loaded.protected_levels, ds.protected_levels)

    def test_not_prepared(self):
        with mktestdir() as tempdir:
            with self.assertRaises(DatasetError) as context:
                load_dataset(tempdir)

        self.assertEqual(context.exception.code, 'missing-file')
