import unittest

import pandas as pd

from fairlatent.util import format_handlers

from .base import mktestdir


class TestFileFormat(unittest.TestCase):

    def test_io(self):
        for write_format in (
            'csv',
            'csv.gz',
            'feather.zstd',
            'parquet.snappy',
        ):
            with self.subTest(write_format=write_format), \
                 mktestdir() as tempdir:

                features = pd.DataFrame(
                    {
                        'age': [0.1, -1.25, 2.0 / 3, 0.0],
                        'workclass=private': [1.0, 0.0, 0.0, 1.0],
                        '__label__': [1, 0, 0, 1],
                    },
                )

                writer = format_handlers.get_writer(write_format)
                outpath = writer(features, tempdir)

                self.assertEqual(outpath.name.split('.')[0], 'dataset')
                self.assertEqual(format_handlers.find(tempdir, 'dataset'), outpath)

                reader = format_handlers.get_reader(outpath)
                result = reader(outpath)

                pd.testing.assert_frame_equal(
                    result,
                    features,
                    check_exact=True,   # values should be identical
                    check_names=False,  # don't worry about the index "name"
                )

    def test_unsupported(self):
        with self.assertRaises(NotImplementedError):
            format_handlers.get_writer('xlsx')

        with self.assertRaises(NotImplementedError):
            format_handlers.get_reader('dataset.xlsx')

    def test_find_missing(self):
        with mktestdir() as tempdir:
            with self.assertRaises(FileNotFoundError):
                format_handlers.find(tempdir, 'dataset')
