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
Per-function verdicts of an analysis run and their renderings.
"""

from collections import namedtuple
import json
import logging
import time

from .schema import (
    extract_schema, generate_d_rules, generate_negation_rewrites
)
from .solver import DEFAULT_BUDGET, INVALID, UNKNOWN, VALID, check_validity
from .vcgen import DPRESERVE, MALLOC, MEMSAFETY, generate_vcs

logger = logging.getLogger(__name__)

YES = 'yes'
NO = 'no'
MAYBE = 'unknown'

TEXT = 'text'
JSON = 'json'
FORMATS = (TEXT, JSON)

#: Version of the machine-readable report layout.
SCHEMA_VERSION = 1


class Failure(namedtuple('Failure', ['kind', 'location', 'description',
                                     'status', 'diagnostics'])):

    """A verification condition that was not proven valid."""

    __slots__ = ()

    @classmethod
    def of(cls, result):
        vc = result.vc
        return cls(vc.kind, vc.location, vc.describe(), result.status,
                   tuple(str(lit) for lit in result.diagnostics))

    def to_dict(self):
        return {
            'kind': self.kind,
            'location': self.location,
            'description': self.description,
            'status': self.status,
            'diagnostics': list(self.diagnostics),
        }


def _verdict(results):
    statuses = set(r.status for r in results)
    if INVALID in statuses:
        return NO
    if UNKNOWN in statuses:
        return MAYBE
    return YES


class FunctionReport(object):

    """
    Verdicts for one function.

    *d_safe* is 'yes' when every DPreserve condition is valid, 'no' when
    one is invalid and 'unknown' otherwise; *mem_safe* likewise for the
    MemSafety conditions.  *dynamic* holds the description of a concrete
    counterexample when the bounded dynamic check found one.
    """

    def __init__(self, name, pos, results, elapsed):
        self.name = name
        self.pos = pos
        self.results = list(results)
        self.elapsed = elapsed
        self.dynamic = None
        self.dynamic_checked = False

    @property
    def d_safe(self):
        return _verdict(r for r in self.results if r.vc.kind == DPRESERVE)

    @property
    def mem_safe(self):
        return _verdict(r for r in self.results if r.vc.kind == MEMSAFETY)

    @property
    def safe(self):
        return self.d_safe == YES and self.mem_safe == YES

    @property
    def vc_count(self):
        return len(self.results)

    @property
    def failures(self):
        return [Failure.of(r) for r in self.results if r.status != VALID]

    def to_dict(self, timings=True):
        data = {
            'name': self.name,
            'line': self.pos[0] if self.pos else None,
            'd_safe': self.d_safe,
            'mem_safe': self.mem_safe,
            'vc_count': self.vc_count,
            'failures': [f.to_dict() for f in self.failures],
        }
        if self.dynamic_checked:
            data['counterexample'] = self.dynamic
        if timings:
            data['time'] = round(self.elapsed, 3)
        return data


class AnalysisReport(object):

    """The verdicts of every analyzed function, in source order."""

    def __init__(self, mode, functions=(), elapsed=0.0):
        self.mode = mode
        self.functions = list(functions)
        self.elapsed = elapsed

    def function(self, name):
        for report in self.functions:
            if report.name == name:
                return report
        raise KeyError(name)

    @property
    def d_count(self):
        return sum(1 for f in self.functions if f.d_safe == YES)

    @property
    def m_count(self):
        return sum(1 for f in self.functions if f.mem_safe == YES)

    @property
    def safe(self):
        return all(f.safe for f in self.functions)

    @property
    def exit_code(self):
        """0 when every function is safe on both counts, else 1."""
        return 0 if self.safe else 1

    def to_dict(self, timings=True):
        data = {
            'schema_version': SCHEMA_VERSION,
            'mode': self.mode,
            'functions': [f.to_dict(timings) for f in self.functions],
            'totals': {
                'functions': len(self.functions),
                'd_safe': self.d_count,
                'mem_safe': self.m_count,
            },
        }
        if timings:
            data['totals']['time'] = round(self.elapsed, 3)
        return data


def analyze_program(program, schema=None, mode=MALLOC, only=None,
                    timeout=10.0, budget=DEFAULT_BUDGET, trace=False):
    """
    Decide every verification condition of a lowered program.

    Args:
    program -- a lowered Program
    schema -- its TypeSchema, extracted when omitted
    mode -- MALLOC or ZMALLOC
    only -- a collection of function names to restrict the analysis to
    timeout -- wall-clock seconds per condition
    budget -- case splits per condition
    trace -- keep the solver trace of every condition

    Return: an AnalysisReport
    Raise SchemaError: when the record declarations are not a valid schema
    """
    start = time.time()
    if schema is None:
        schema = extract_schema(program)
    rules = generate_d_rules(schema)
    rewrites = generate_negation_rewrites(schema)
    positions = dict((f.name, f.pos) for f in program.functions)
    report = AnalysisReport(mode)
    for name, vcs in generate_vcs(program, schema, mode, only).items():
        func_start = time.time()
        results = [check_validity(vc, rules, rewrites, budget=budget,
                                  timeout=timeout, trace=trace)
                   for vc in vcs]
        func = FunctionReport(name, positions[name], results,
                              time.time() - func_start)
        logger.info('%s: D %s, M %s (%d conditions)', name, func.d_safe,
                    func.mem_safe, func.vc_count)
        report.functions.append(func)
    report.elapsed = time.time() - start
    return report


def _render_text(report, timings):
    width = max([len('function')] + [len(f.name) for f in report.functions])
    lines = ['%-*s  %-7s  %-7s  %s' % (width, 'function', 'D', 'M', 'VCs')]
    for func in report.functions:
        row = '%-*s  %-7s  %-7s  %d' % (width, func.name, func.d_safe,
                                        func.mem_safe, func.vc_count)
        if timings:
            row += '  %.2fs' % func.elapsed
        lines.append(row)
        for failure in func.failures:
            lines.append('  %s %s: %s' % (failure.status, failure.location,
                                          failure.description))
            if failure.diagnostics:
                lines.append('    %s' % ' ∧ '.join(failure.diagnostics))
        if func.dynamic is not None:
            lines.append('  concrete: %s' % func.dynamic)
    total = len(report.functions)
    summary = 'D: %d/%d  M: %d/%d' % (report.d_count, total, report.m_count,
                                      total)
    if timings:
        summary += '  time: %.2fs' % report.elapsed
    lines.append(summary)
    return '\n'.join(lines)


def render_report(report, format=TEXT, timings=True):
    """
    Render a report.

    Args:
    report -- an AnalysisReport
    format -- TEXT for the table or JSON for the machine-readable layout
    timings -- include wall times; without them the output only depends
               on the analyzed program and the configuration

    Return: the rendering, without a trailing newline
    Raise ValueError: on an unknown format
    """
    if format == TEXT:
        return _render_text(report, timings)
    if format == JSON:
        output = json.dumps(report.to_dict(timings), indent=2,
                            ensure_ascii=False)
        logger.info('JSON report: %d function(s), %d bytes',
                    len(report.functions), len(output))
        return output
    raise ValueError('unknown report format %r' % (format,))


__all__ = ['analyze_program', 'render_report', 'AnalysisReport',
           'FunctionReport', 'Failure', 'YES', 'NO', 'MAYBE', 'TEXT', 'JSON',
           'SCHEMA_VERSION']
