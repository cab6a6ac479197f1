# -*- coding: utf-8 -*-

# ******************************************************************************
#
# Copyright (C) 2020-2021 The dsverify developers
#
# This file is part of the dsverify distribution.
#
# dsverify is free software; you can redistribute it and/or
# modify it under the terms of the GNU General Public License
# version 3 as published by the Free Software Foundation.
#
# dsverify is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with dsverify.  If not, see <https://www.gnu.org/licenses/>.
#
# ******************************************************************************

"""
Command-line entry point.

    dsverify [--zmalloc] [--json] [--func NAME] [--timeout SECS]
             [--budget N] [--dump-rules] [--dump-vcs] [--trace]
             [--oracle-bounds N] [-v] FILE

Exit status is 0 when every analyzed function is D-safe and memory-safe,
1 when one of them is (possibly) unsafe and 2 on errors.
"""

import argparse
import logging
import sys

from .frontend import SourceError, is_record_pointer, load_program
from .oracle import DEFAULT_BOUNDS, Bounds, Memory, find_counterexample
from .report import JSON, TEXT, analyze_program, render_report
from .schema import (
    SchemaError, extract_schema, generate_d_rules, generate_negation_rewrites
)
from .solver import DEFAULT_BUDGET
from .vcgen import MALLOC, MODES, ZMALLOC, generate_vcs

logger = logging.getLogger(__name__)

EXIT_SAFE = 0
EXIT_UNSAFE = 1
EXIT_ERROR = 2


class Config(object):

    """
    Settings of one analysis run.

    Args:
    mode -- MALLOC or ZMALLOC
    timeout -- wall-clock seconds per verification condition, positive
    budget -- case splits per verification condition, positive
    output -- TEXT or JSON
    functions -- names of the functions to analyze, None for all
    dump_rules -- print the generated rules before analyzing
    dump_vcs -- print the verification conditions before analyzing
    trace -- print the solver trace of every condition
    oracle_bounds -- the address bound A of the concrete check: its
                     context has A words and integer arguments range
                     over 0..A-1
    dynamic -- run the concrete check on functions with integer arguments
    verbosity -- 0 for warnings, 1 for info, 2 for debug messages

    Raise ValueError: on an unknown mode or output, a non-positive timeout,
                      budget or bound
    """

    def __init__(self, mode=MALLOC, timeout=10.0, budget=DEFAULT_BUDGET,
                 output=TEXT, functions=None, dump_rules=False,
                 dump_vcs=False, trace=False,
                 oracle_bounds=DEFAULT_BOUNDS.max_addr, dynamic=False,
                 verbosity=0):
        if mode not in MODES:
            raise ValueError('unknown allocation mode %r' % (mode,))
        if output not in (TEXT, JSON):
            raise ValueError('unknown output format %r' % (output,))
        if timeout <= 0:
            raise ValueError('the timeout must be positive')
        if budget <= 0:
            raise ValueError('the budget must be positive')
        self.mode = mode
        self.timeout = timeout
        self.budget = budget
        self.output = output
        self.functions = functions
        self.dump_rules = dump_rules
        self.dump_vcs = dump_vcs
        self.trace = trace
        self.oracle_bounds = oracle_bounds
        self.bounds = Bounds(max_addr=oracle_bounds)
        self.dynamic = dynamic
        self.verbosity = verbosity

    def __repr__(self):
        return '<Config mode=%s output=%s timeout=%s budget=%d>' % (
            self.mode, self.output, self.timeout, self.budget)


def _positive(convert):
    def parse(text):
        try:
            value = convert(text)
        except ValueError:
            raise argparse.ArgumentTypeError('invalid value %r' % text)
        if value <= 0:
            raise argparse.ArgumentTypeError('%r is not positive' % text)
        return value
    return parse


def build_parser():
    from . import __version__

    parser = argparse.ArgumentParser(
        prog='dsverify',
        description='Check that the functions of a mini-C file preserve '
                    'the integrity of their data structures and only '
                    'access their own memory.')
    parser.add_argument('file', metavar='FILE', help='mini-C source file')
    parser.add_argument('--zmalloc', action='store_true',
                        help='malloc returns zero-filled memory')
    parser.add_argument('--json', action='store_true',
                        help='print the machine-readable report')
    parser.add_argument('--func', metavar='NAME', action='append',
                        help='only analyze the named function; may be '
                             'repeated')
    parser.add_argument('--timeout', metavar='SECS', type=_positive(float),
                        default=10.0,
                        help='seconds per verification condition '
                             '(default: %(default)s)')
    parser.add_argument('--budget', metavar='N', type=_positive(int),
                        default=DEFAULT_BUDGET,
                        help='case splits per verification condition '
                             '(default: %(default)s)')
    parser.add_argument('--dump-rules', action='store_true',
                        help='print the generated solver rules')
    parser.add_argument('--dump-vcs', action='store_true',
                        help='print the verification conditions')
    parser.add_argument('--trace', action='store_true',
                        help='print the solver derivations')
    parser.add_argument('--oracle-bounds', metavar='N', type=_positive(int),
                        help='also run functions taking integers next to '
                             'a context of N words, on every argument in '
                             '0..N-1, and report concrete counterexamples')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='log progress; twice for debug output')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    return parser


def parse_args(argv=None):
    """
    Parse the command line.

    Return: a (Config, source path) pair
    """
    args = build_parser().parse_args(argv)
    dynamic = args.oracle_bounds is not None
    config = Config(
        mode=ZMALLOC if args.zmalloc else MALLOC,
        timeout=args.timeout,
        budget=args.budget,
        output=JSON if args.json else TEXT,
        functions=args.func,
        dump_rules=args.dump_rules,
        dump_vcs=args.dump_vcs,
        trace=args.trace,
        oracle_bounds=(args.oracle_bounds if dynamic
                       else DEFAULT_BOUNDS.max_addr),
        dynamic=dynamic,
        verbosity=args.verbose)
    return config, args.file


def _dump_rules(schema, out):
    out.write('# integrity rules\n')
    for rule in generate_d_rules(schema):
        out.write('%s\n' % (rule,))
    out.write('# negation rewrites\n')
    for rule in generate_negation_rewrites(schema):
        out.write('%s\n' % (rule,))


def _dump_vcs(program, schema, config, out):
    vcs = generate_vcs(program, schema, config.mode, config.functions)
    for name, conditions in vcs.items():
        out.write('# %s: %d conditions\n' % (name, len(conditions)))
        for vc in conditions:
            out.write('%s\n' % (vc,))


def _dump_traces(report, out):
    for func in report.functions:
        for result in func.results:
            out.write('# %s: %s\n' % (result.vc.describe(), result.status))
            if result.trace is not None:
                out.write('%s\n' % result.trace.render())


def _dynamic_check(program, schema, report, config):
    size = config.bounds.max_addr
    arg_range = range(size)
    for func in report.functions:
        decl = program.function(func.name)
        if any(is_record_pointer(kind) for _, kind in decl.params):
            logger.info('%s: pointer arguments, no concrete check', func.name)
            continue
        outcome = find_counterexample(program, schema, func.name,
                                      [arg_range] * len(decl.params),
                                      config.mode,
                                      Memory.with_context(size))
        func.dynamic_checked = True
        if outcome is not None:
            func.dynamic = outcome.describe()


def run(config, path, out=None):
    """
    Analyze a source file and print the report.

    Args:
    config -- the Config
    path -- path of the mini-C file
    out -- the text stream of the report, stdout when omitted

    Return: the exit status
    """
    if out is None:
        out = sys.stdout
    try:
        with open(path, encoding='utf-8') as f:
            source = f.read()
        program = load_program(source)
        schema = extract_schema(program)
        if config.functions:
            for name in config.functions:
                program.function(name)
    except (SourceError, SchemaError, OSError) as error:
        sys.stderr.write('dsverify: %s: %s\n' % (path, error))
        return EXIT_ERROR
    except KeyError as error:
        sys.stderr.write('dsverify: no function %s in %s\n' % (error, path))
        return EXIT_ERROR
    try:
        if config.dump_rules:
            _dump_rules(schema, out)
        if config.dump_vcs:
            _dump_vcs(program, schema, config, out)
        report = analyze_program(program, schema, config.mode,
                                 config.functions, config.timeout,
                                 config.budget, config.trace)
        if config.dynamic:
            _dynamic_check(program, schema, report, config)
    except Exception:
        logger.exception('internal error while analyzing %s', path)
        return EXIT_ERROR
    if config.trace:
        _dump_traces(report, out)
    out.write(render_report(report, config.output) + '\n')
    return report.exit_code


def _configure_logging(verbosity):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')


def main(argv=None):
    config, path = parse_args(argv)
    _configure_logging(config.verbosity)
    return run(config, path)


if __name__ == '__main__':
    sys.exit(main())
