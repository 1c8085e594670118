"""fairlatent command-line interface entry-point"""
import argparse
import itertools
import multiprocessing
import os
import pathlib
import re
import sys
import textwrap
import time

import argparse_formatter
import toml

import fairlatent
from fairlatent.command import COMMANDS, DESCRIPTIONS
from fairlatent.config import load_config, presets
from fairlatent.error import FairLatentError
from fairlatent.method import registry as methods
from fairlatent.pipeline import Pipeline
from fairlatent.util import FileAccessType, HelpAction, NumericRangeType

# ensure steps of all pipelines auto-load
import fairlatent.data.step
import fairlatent.train.step
import fairlatent.evaluate.step
import fairlatent.audit.step


ANIMALS = ('aardvark', 'bison', 'canary', 'dalmation', 'emu', 'falcon', 'gnu',
           'hamster', 'impala', 'jellyfish', 'kiwi', 'lemur', 'manatee',
           'nutria', 'okapi', 'porcupine', 'quetzal', 'roadrunner', 'seal',
           'turtle', 'unicorn', 'vole', 'wombat', 'xerus', 'yak', 'zebra')


PROGRAM_DESCRIPTION = """\
learn & audit fair representations of tabular data

each command executes a pipeline which first prepares the data -- \
preprocessing a raw CSV per its column schema, or loading a previously-\
prepared dataset directory (--data) -- and then:

  prepare    writes the prepared dataset only
  train      trains a representation method and writes its checkpoint
  evaluate   scores a representation by the evaluation protocol
  compare    evaluates the baseline methods & the fair representation
  audit      injects label bias by flipping & measures its discovery
  sweep      evaluates a method across values of one parameter

configuration is layered: defaults, --preset, --config file, FAIRLATENT_* \
environment variables and finally command-line flags.
"""

#: prefix of argument destinations collected as configuration overrides
OVERRIDE_PREFIX = 'cfg.'

META_NAME = 'meta.toml'


def execute(argv=None, **parser_kwargs):
    """Execute the fairlatent CLI command."""
    args = None

    try:
        (parser, pipelines) = build_parser(**parser_kwargs)

        args = parser.parse_args(argv)

        if args.command is None:
            parser.error("a command is required")

        command_parser = args.__parser__
        pipeline = pipelines[args.command]

        config = load_config(preset=args.preset,
                             path=args.config,
                             overrides=overrides_from_args(args))

        check_output_directory(args)

        meta = {
            'command': args.command,
            'method': config.method,
            'seed': config.seed,
            'version': fairlatent.__version__,
            'config': config.echo(),
        }

        for (step, results) in pipeline(command_parser, args, config=config, meta=meta):
            if args.verbosity >= 1:
                print(step, results, sep=' → ')

        with (args.outdir / META_NAME).open('w') as meta_file:
            dump_meta(pipeline.results, meta_file)

        if args.verbosity >= 1:
            print('done →', args.outdir)
    except KeyboardInterrupt:
        print('interrupted ✕')
        sys.exit(130)
    except Exception as exc:
        if args is not None and args.traceback:
            raise

        print(f'error:{exc_repr(exc)} ✕')
        sys.exit(1)


def build_parser(**parser_kwargs):
    """Construct the parser for fairlatent, with a subparser (and step
    pipeline) per command.

    Link back to the command's parser is set on any resulting parsed
    argument `Namespace` as `__parser__`.

    Returns the parser and the mapping of command name to `Pipeline`.

    """
    parser = argparse.ArgumentParser(
        description=PROGRAM_DESCRIPTION,
        formatter_class=argparse_formatter.FlexiFormatter,
        **parser_kwargs,
    )

    version = f'fairlatent {fairlatent.__version__}'
    # support published command aliases
    prog = pathlib.Path(sys.argv[0])
    if prog.name != 'fairlatent' and prog.suffix != '.py':
        version = f'%(prog)s | {version}'

    parser.add_argument(
        '--version',
        action='version',
        help="show program version and exit",
        version=version,
    )
    parser.add_argument(
        '--help-methods',
        action=HelpAction,
        help_action=print_methods,
        help="describe the representation methods and exit",
    )

    common = build_common_parser()

    subparsers = parser.add_subparsers(
        title="commands",
        dest='command',
        metavar='COMMAND',
    )

    pipelines = {}

    for (name, description) in DESCRIPTIONS.items():
        command_parser = subparsers.add_parser(
            name,
            description=description,
            help=description,
            parents=[common],
            formatter_class=argparse_formatter.FlexiFormatter,
        )
        command_parser.set_defaults(__parser__=command_parser)

        pipelines[name] = Pipeline(command_parser, COMMANDS[name])

    parser.set_defaults(command=None, verbosity=1, traceback=False)

    return (parser, pipelines)


def build_common_parser():
    """Parser of the arguments shared by all commands."""
    common = argparse.ArgumentParser(add_help=False)

    group_parser = common.add_argument_group("configuration")
    group_parser.add_argument(
        '--config',
        metavar='FILE',
        type=FileAccessType(os.R_OK),
        help="TOML run configuration file",
    )
    group_parser.add_argument(
        '--preset',
        choices=presets(),
        help="shipped run configuration to layer beneath --config",
    )
    group_parser.add_argument(
        '--seed',
        dest='cfg.seed',
        metavar='INTEGER',
        type=NumericRangeType(int, [0, None]),
        help="seed of every random draw of the run",
    )
    group_parser.add_argument(
        '--method',
        dest='cfg.method',
        metavar='NAME',
        help="representation method (see --help-methods)",
    )

    group_parser = common.add_argument_group("execution")
    group_parser.add_argument(
        '-o', '--out',
        default=get_default_directory(),
        dest='outdir',
        metavar='DIR',
        type=pathlib.Path,
        help="output directory path to which to write artifacts and results "
             "(default: %(default)s)",
    )
    group_parser.add_argument(
        '-Q', '--quiet',
        dest='verbosity',
        action='store_const',
        const=0,
        help="minimal output verbosity",
    )
    group_parser.add_argument(
        '-V', '--verbose',
        dest='verbosity',
        action='store_const',
        const=2,
        help="increased output verbosity (e.g. training progress)",
    )
    group_parser.add_argument(
        '-VV', '--very-verbose',
        dest='verbosity',
        action='store_const',
        const=3,
        help="high output verbosity (e.g. progress of every epoch)",
    )
    group_parser.add_argument(
        '-VVV', '--debug',
        dest='verbosity',
        action='store_const',
        const=4,
        help="highest output verbosity",
    )
    group_parser.add_argument(
        '--tb', '--traceback',
        action='store_true',
        dest='traceback',
        help="print exception tracebacks",
    )

    try:
        # glibc-only
        sched_getaffinity = os.sched_getaffinity
    except AttributeError:
        cpu_available_count = multiprocessing.cpu_count()
    else:
        cpu_available_count = len(sched_getaffinity(0))

    group_parser.add_argument(
        '--concurrency',
        default=1,
        metavar='INTEGER',
        type=NumericRangeType(int, [1, cpu_available_count]),
        help="maximum number of concurrent threads applied to protocol repeats, "
             f"sweep points and compared methods (at most {cpu_available_count}; "
             "default: %(default)s)",
    )

    common.set_defaults(verbosity=1)

    return common


def print_methods(parser, namespace, values, option_string=None):
    """Print the description of every registered method."""
    for method_class in methods.values():
        print(textwrap.dedent(method_class.__doc__).strip(), end='\n\n')


def overrides_from_args(args):
    """Nested configuration mapping of the supplied `cfg.*` arguments."""
    overrides = {}

    for (dest, value) in vars(args).items():
        if not dest.startswith(OVERRIDE_PREFIX) or value is None:
            continue

        (*sections, key) = dest[len(OVERRIDE_PREFIX):].split('.')

        target = overrides
        for section in sections:
            target = target.setdefault(section, {})

        target[key] = value

    return overrides


def exc_repr(exc):
    """Construct representation of given exception appropriate for
    printed output.

    """
    exc_repr = ''

    if exc.__class__.__module__ != 'builtins':
        exc_repr += f'{exc.__class__.__module__}.'

    exc_repr += exc.__class__.__name__

    if isinstance(exc, FairLatentError):
        exc_repr += f'[{exc.code}]: {exc.message}'
    elif exc.args:
        exc_repr += ': ' + ', '.join(map(str, exc.args))

    return exc_repr


def pairwise(iterable):
    """s -> (s0, s1), (s1, s2), (s2, s3), ..., (sn, None)"""
    (a, b) = itertools.tee(iterable)
    next(b, None)
    return itertools.zip_longest(a, b)


def get_default_directory(base_name='fairlatent', words=ANIMALS):
    """Construct user-friendly default output directory path."""
    path = pathlib.Path(base_name)

    if path.exists():
        word_options = '|'.join(words)
        run_pattern = re.compile(rf'run-({word_options})-', re.I)
        run_matches = (run_pattern.match(run_path.name) for run_path in path.glob('run-*'))
        words_used = sorted(
            (run_match.group(1).lower() for run_match in run_matches if run_match),
            reverse=True,
        )

        if words_used:
            last_word = words_used[0]
            for (word0, word1) in pairwise(words):
                if word0 == last_word:
                    next_word = word1 or words[0]
                    break
        else:
            next_word = words[0]
    else:
        next_word = words[0]

    return path / f'run-{next_word}-{int(time.time())}-{os.getpid()}'


def check_output_directory(args):
    """Ensure output directory exists and is empty."""
    if args.outdir.exists():
        if args.outdir.is_dir():
            if any(args.outdir.iterdir()):
                args.__parser__.error(f'output directory non-empty: {args.outdir}')
        else:
            args.__parser__.error(f'output path exists and is not a directory: {args.outdir}')
    else:
        args.outdir.mkdir(parents=True)


def dump_meta(results, meta_file):
    step_timing = (
        (step.__name__, tuple(timing))
        for (step, timing) in results.__timing_steps__.items()
    )
    meta_timing = dict(step_timing, total=tuple(results.__timing__))

    meta = dict(results.meta, timing=meta_timing)

    toml.dump(meta, meta_file)
