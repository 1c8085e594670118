"""Pipeline Steps to score representations: Evaluate, Compare & Sweep"""
import concurrent.futures
import contextlib
import typing

import pandas as pd
import toml

from fairlatent import pipeline
from fairlatent.command import registries
from fairlatent.metrics import FairnessReport, pca_project
from fairlatent.method import COMPARISON, Fit, get_method, registry as methods
from fairlatent.train.step import CHECKPOINT_NAME, add_arguments as add_train_arguments
from fairlatent.train.step import load_checkpoint, progress_printer
from fairlatent.util import DirectoryAccessType, NumericListType, NumericRangeType

from .protocol import SWEEP_AXES, evaluate_fit, run_protocol, sweep


REPORT_NAME = 'report.toml'
PROJECTION_NAME = 'projection.csv'
CLASSES_NAME = 'classes.csv'
COMPARE_NAME = 'compare.csv'
COMPARE_CLASSES_NAME = 'compare-classes.csv'
SWEEP_NAME = 'sweep.csv'

#: methods of the comparison on a protected attribute of more than two classes
MULTICLASS_COMPARISON = ('original', 'original_p', 'ae', 'mae', 'nrl_multiclass')

FLOAT_FORMAT = '%.6g'


def add_arguments(parser):
    """Extend `parser` with overrides of the evaluation configuration."""
    group_parser = parser.add_argument_group("evaluation")

    group_parser.add_argument(
        '--train-fraction',
        dest='cfg.evaluate.train_fraction',
        metavar='FLOAT',
        type=NumericRangeType(float, (0, 1)),
        help="fraction of samples on which the classifier is fit",
    )
    group_parser.add_argument(
        '--classifier-c',
        dest='cfg.evaluate.classifier_c',
        metavar='FLOAT',
        type=NumericRangeType(float, (0, None)),
        help="inverse regularization strength C of the classifier "
             "(penalty lambda = 1 / (C · training samples))",
    )
    group_parser.add_argument(
        '--classifier-lambda',
        dest='cfg.evaluate.classifier_lambda',
        metavar='FLOAT',
        type=NumericRangeType(float, [0, None]),
        help="classifier penalty lambda (overriding --classifier-c)",
    )
    group_parser.add_argument(
        '--split-repeats',
        dest='cfg.evaluate.split_repeats',
        metavar='INTEGER',
        type=NumericRangeType(int, [1, None]),
        help="seeded train/test splits per representation",
    )
    group_parser.add_argument(
        '--protocol-repeats',
        dest='cfg.evaluate.protocol_repeats',
        metavar='INTEGER',
        type=NumericRangeType(int, [1, None]),
        help="retrainings of the method (each of its own seed)",
    )
    group_parser.add_argument(
        '--consistency-k',
        dest='cfg.evaluate.consistency_k',
        metavar='INTEGER',
        type=NumericRangeType(int, [1, None]),
        help="neighbors of the consistency score",
    )


def executor(args):
    """Thread pool bounded by `--concurrency` (or none for one)."""
    if args.concurrency > 1:
        return concurrent.futures.ThreadPoolExecutor(max_workers=args.concurrency)

    return contextlib.nullcontext()


def report_header(evaluation):
    mapping = evaluation.classifier

    if mapping['mapping'] == 'direct':
        return (f"# classifier penalty lambda = {mapping['classifier_lambda']:.6g} "
                "(given directly)\n")

    return (f"# classifier penalty {mapping['mapping']}: C = {mapping['classifier_c']:.6g}, "
            f"n_train = {mapping['n_train']}, lambda = {mapping['classifier_lambda']:.6g}\n")


def write_report(path, evaluation, **meta):
    with path.open('w') as fd:
        fd.write(report_header(evaluation))
        toml.dump(dict(meta,
                       classifier=evaluation.classifier,
                       report=evaluation.report.rounded(),
                       flags=list(evaluation.report.flags)), fd)


def projection_frame(ds, Z):
    projection = pca_project(Z, 2)
    frame = pd.DataFrame(projection.points, columns=['pc1', 'pc2'])
    frame['label'] = ds.y
    frame['protected'] = [ds.protected_levels[group] for group in ds.p]
    return (frame, projection.deficient)


def report_frame(rows):
    """One row per (name, FairnessReport)."""
    return pd.DataFrame([dict(method=name, **report.values()) for (name, report) in rows],
                        columns=('method',) + FairnessReport.FIELDS)


class EvaluateResult(typing.NamedTuple):
    """Pipeline Step results for Evaluate"""
    report_path: str
    report: FairnessReport


class Evaluate(pipeline.Step, commands=registries('evaluate')):
    """Extend given `ArgumentParser` with the evaluation interface and
    score a representation of the prepared `dataset`: that of a given
    checkpoint or, without one, of the configured method retrained per
    protocol repeat.

    Returns an `EvaluateResult`.

    """
    __provides__ = EvaluateResult
    __requires__ = ('dataset',)

    def __init__(self, parser):
        parser.add_argument(
            '--checkpoint',
            metavar='DIR',
            type=DirectoryAccessType(contains=CHECKPOINT_NAME),
            help="model directory written by the train command",
        )
        add_train_arguments(parser)
        add_arguments(parser)

    def __call__(self, args, results):
        config = results.config

        if args.checkpoint is not None:
            (method_name, encoder) = load_checkpoint(args.checkpoint)
            method = get_method(method_name)

            if args.verbosity >= 1 and method_name != config.method:
                print(f'note: evaluating checkpoint method {method_name} '
                      f'(not configured method {config.method})')

            prepared = method.prepare(results.dataset)
            evaluation = evaluate_fit(method, Fit(encoder), prepared, config.evaluate,
                                      config.seed)
        else:
            method = get_method(config.method)
            prepared = method.prepare(results.dataset)

            with executor(args) as pool:
                evaluation = run_protocol(method, results.dataset,
                                          config.train.replace(seed=config.seed),
                                          config.evaluate, config.seed, executor=pool,
                                          callback=progress_printer(args, method.name))

        report_path = args.outdir / REPORT_NAME
        write_report(report_path, evaluation, method=method.name, seed=config.seed,
                     checkpoint=str(args.checkpoint) if args.checkpoint else '')

        (projection, deficient) = projection_frame(prepared, evaluation.representation)
        projection.to_csv(args.outdir / PROJECTION_NAME, index=False, float_format=FLOAT_FORMAT)

        if prepared.n_protected > 2:
            evaluation.classes.to_csv(args.outdir / CLASSES_NAME, index=False,
                                      float_format=FLOAT_FORMAT)

        if args.verbosity >= 1:
            if deficient:
                print('note: representation has rank below 2: projection zero-filled')
            for flag in evaluation.report.flags:
                print('flag:', flag)

        if args.verbosity >= 2:
            print(report_header(evaluation), end='')
            for (name, value) in evaluation.report.rounded().items():
                print(f'  {name}: {value}')

        return EvaluateResult(str(report_path), evaluation.report)


class CompareResult(typing.NamedTuple):
    """Pipeline Step results for Compare"""
    compare_path: str
    methods: typing.Tuple[str, ...]


class Compare(pipeline.Step, commands=registries('compare')):
    """Extend given `ArgumentParser` with the comparison interface and
    run the evaluation protocol for each method of the comparison.

    Returns a `CompareResult`.

    """
    __provides__ = CompareResult
    __requires__ = ('dataset',)

    def __init__(self, parser):
        parser.add_argument(
            '--methods',
            metavar='NAMES',
            type=lambda value: tuple(name.strip() for name in value.split(',') if name.strip()),
            help="comma-separated methods to compare (default: "
                 f"{', '.join(COMPARISON)}; or for a protected attribute of more than two "
                 f"classes: {', '.join(MULTICLASS_COMPARISON)})",
        )
        add_train_arguments(parser)
        add_arguments(parser)

    def __pre__(self, parser, args, results):
        for name in args.methods or ():
            if name not in methods:
                parser.error(f"argument --methods: unknown method {name!r} "
                             f"(select from: {', '.join(methods)})")

    def __call__(self, args, results):
        config = results.config
        dataset = results.dataset

        names = args.methods or (COMPARISON if dataset.n_protected == 2
                                 else MULTICLASS_COMPARISON)
        for name in names:
            get_method(name).check(dataset)

        train_cfg = config.train.replace(seed=config.seed)

        def run(name):
            method = get_method(name)
            return run_protocol(method, dataset, train_cfg, config.evaluate, config.seed,
                                callback=progress_printer(args, name))

        with executor(args) as pool:
            mapper = map if pool is None else pool.map
            evaluations = list(mapper(run, names))

        compare_path = args.outdir / COMPARE_NAME
        report_frame(
            (name, evaluation.report) for (name, evaluation) in zip(names, evaluations)
        ).to_csv(compare_path, index=False, float_format=FLOAT_FORMAT)

        if dataset.n_protected > 2:
            classes = pd.concat([evaluation.classes.assign(method=name)
                                 for (name, evaluation) in zip(names, evaluations)])
            classes[['method', 'class', 'average_score', 'emd']].to_csv(
                args.outdir / COMPARE_CLASSES_NAME, index=False, float_format=FLOAT_FORMAT,
            )

        if args.verbosity >= 2:
            for (name, evaluation) in zip(names, evaluations):
                values = evaluation.report.rounded()
                print(f"  {name}: emd={values['emd']} parity={values['parity']} "
                      f"f1={values['f1']} consistency={values['consistency']}")

        return CompareResult(str(compare_path), tuple(names))


class SweepResult(typing.NamedTuple):
    """Pipeline Step results for Sweep"""
    sweep_path: str
    axis: str


class Sweep(pipeline.Step, commands=registries('sweep')):
    """Extend given `ArgumentParser` with the sweep interface and run
    the evaluation protocol of the configured method at each value of
    one parameter.

    Returns a `SweepResult`.

    """
    __provides__ = SweepResult
    __requires__ = ('dataset',)

    def __init__(self, parser):
        group_parser = parser.add_argument_group("sweep")

        group_parser.add_argument(
            '--axis',
            required=True,
            choices=tuple(SWEEP_AXES),
            help="parameter to vary",
        )
        group_parser.add_argument(
            '--values',
            required=True,
            metavar='NUMBERS',
            type=NumericListType(NumericRangeType(float, [0, None])),
            help="comma-separated parameter values, e.g. 0,10,100",
        )
        add_train_arguments(parser)
        add_arguments(parser)

    def __call__(self, args, results):
        config = results.config
        method = get_method(config.method)

        with executor(args) as pool:
            frame = sweep(method, results.dataset, args.axis, args.values,
                          config.train.replace(seed=config.seed), config.evaluate,
                          config.seed, executor=pool)

        sweep_path = args.outdir / SWEEP_NAME
        frame.insert(0, 'axis', args.axis)
        frame.to_csv(sweep_path, index=False, float_format=FLOAT_FORMAT)

        if args.verbosity >= 2:
            print(frame.to_string(index=False))

        return SweepResult(str(sweep_path), args.axis)

