"""Pipeline Step to ingest tabular data: Prepare"""
import os
import typing

from fairlatent import pipeline
from fairlatent.command import registries
from fairlatent.util import DirectoryAccessType, FileAccessType, format_handlers

from .dataset import Dataset, load_csv, preprocess
from .store import SIDECAR_NAME, load_dataset, save_dataset, summarize


class PrepareResult(typing.NamedTuple):
    """Pipeline Step results for Prepare"""
    dataset: Dataset
    data_path: typing.Optional[str]


class Prepare(pipeline.Step, commands=registries()):
    """Extend given `ArgumentParser` with the data interface and either
    preprocess the configured CSV (writing the prepared dataset to the
    output directory) or load a previously prepared dataset directory.

    Returns a `PrepareResult`.

    """
    __provides__ = PrepareResult

    data_dirname = 'data'

    def __init__(self, parser):
        group_parser = parser.add_argument_group("data")

        group_parser.add_argument(
            '--csv',
            dest='cfg.data.path',
            metavar='FILE',
            type=FileAccessType(os.R_OK),
            help="raw CSV to preprocess (overriding configuration [data] path)",
        )
        group_parser.add_argument(
            '--data',
            dest='data_dir',
            metavar='DIR',
            type=DirectoryAccessType(contains=SIDECAR_NAME),
            help="previously prepared dataset directory to load "
                 "(in place of preprocessing a CSV)",
        )
        group_parser.add_argument(
            '--format',
            dest='data_format',
            default='csv',
            metavar='FORMAT',
            help="file format of the prepared dataset: csv, parquet or feather, "
                 "optionally suffixed by compression, e.g. csv.gz (default: %(default)s)",
        )

    def __pre__(self, parser, args, results):
        if args.data_dir is not None:
            if getattr(args, 'cfg.data.path') is not None:
                parser.error("argument --data: not allowed with argument --csv")
            return

        if results.config.data.path is None:
            parser.error("no input data: supply --csv FILE, --data DIR or "
                         "configuration [data] path")

        try:
            format_handlers.get_writer(args.data_format)
        except NotImplementedError:
            parser.error(f"unsupported dataset format: {args.data_format}")

        # report schema errors before reading
        results.config.data.schema

    def __call__(self, args, results):
        if args.data_dir is not None:
            dataset = load_dataset(args.data_dir)
            data_path = None
        else:
            config = results.config.data
            raw = load_csv(config.path, config.schema, config.missing)
            dataset = preprocess(raw, config.schema, missing=config.missing,
                                 positive=config.positive)
            data_path = save_dataset(dataset, args.outdir / self.data_dirname, args.data_format)

        if args.verbosity >= 1:
            for note in dataset.notes:
                print('note:', note)

        if args.verbosity >= 2:
            summary = summarize(dataset)
            print(f"{summary['n']} samples of {summary['m']} features "
                  f"({summary['dropped']} rows dropped); "
                  f"positive rate {summary['positive_rate']:.3f}")
            for (level, frequency) in summary['protected'].items():
                print(f'  protected {level}: {frequency:.3f}')

        return PrepareResult(dataset, data_path and str(data_path))
