"""Tests for the flat text format of model states"""
import io
import pathlib
import unittest

import numpy as np

from fairlatent.model import (
    ClassifierState,
    CriticState,
    ModelError,
    dump_arrays,
    init_encoder,
    load_arrays,
    load_classifier,
    load_critic,
    load_encoder,
    save_classifier,
    save_critic,
    save_encoder,
)

from .base import mktestdir


class TestFormat(unittest.TestCase):

    def test_header(self):
        fd = io.StringIO()
        dump_arrays([('a', np.array([[1.0, 2.0], [3.0, 4.0]])), ('v', [0.1])], fd,
                    comment='test')

        lines = fd.getvalue().splitlines()
        self.assertEqual(lines[0], '# test')
        self.assertEqual(lines[1], 'a 2 2')
        self.assertEqual(lines[2], '1 2')
        self.assertEqual(lines[4], 'v 1 1')
        self.assertEqual(lines[5], '0.10000000000000001')

    def test_exact(self):
        values = np.random.default_rng(0).normal(size=(3, 4)) / 3
        fd = io.StringIO()
        dump_arrays([('x', values)], fd)

        fd.seek(0)
        np.testing.assert_array_equal(load_arrays(fd)['x'], values)

    def test_malformed(self):
        for text in ('x 2\n1\n', 'x 2 1\n1\n', 'x 1 2\n1\n', 'x 1 1\none\n'):
            with self.subTest(text=text):
                with self.assertRaises(ModelError) as context:
                    load_arrays(io.StringIO(text))

                self.assertEqual(context.exception.code, 'format')


class TestStates(unittest.TestCase):

    def test_encoder(self):
        for hidden in (None, 3):
            with self.subTest(hidden=hidden), mktestdir() as tempdir:
                enc = init_encoder(5, 2, np.random.default_rng(1), hidden=hidden)
                path = pathlib.Path(tempdir) / 'encoder.txt'

                save_encoder(enc, path)
                loaded = load_encoder(path)

                self.assertEqual(loaded.nonlinear, enc.nonlinear)
                for ((name0, array0), (name1, array1)) in zip(enc.named_arrays(),
                                                              loaded.named_arrays()):
                    self.assertEqual(name0, name1)
                    np.testing.assert_array_equal(array0, array1)

    def test_critic(self):
        with mktestdir() as tempdir:
            path = pathlib.Path(tempdir) / 'critic.txt'
            save_critic(CriticState(np.array([0.1, -0.03]), 0.2), path)
            cr = load_critic(path)

        np.testing.assert_array_equal(cr.w, [0.1, -0.03])
        self.assertEqual(cr.c_clip, 0.2)

    def test_classifier(self):
        with mktestdir() as tempdir:
            path = pathlib.Path(tempdir) / 'classifier.txt'
            save_classifier(ClassifierState(np.array([1.5, 2.0]), -0.25, 0.01), path)
            clf = load_classifier(path)

        np.testing.assert_array_equal(clf.W, [1.5, 2.0])
        self.assertEqual((clf.b, clf.lam), (-0.25, 0.01))

    def test_missing_array(self):
        with mktestdir() as tempdir:
            path = pathlib.Path(tempdir) / 'critic.txt'
            path.write_text('critic.w 1 2\n0.1 0.2\n')

            with self.assertRaises(ModelError) as context:
                load_critic(path)

        self.assertEqual(context.exception.code, 'format')
