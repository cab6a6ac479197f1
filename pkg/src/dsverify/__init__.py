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
Shape-neutral analysis of data-structure integrity and spatial memory
safety for a small subset of C.

A program is parsed and lowered to a statement IR, the record declarations
give the type schema, every function is split at its cut-points into
branch-free segments, and each segment yields verification conditions that
the solver decides.

A typical use of the library:

>>> import dsverify
>>> program = dsverify.load_program('''
... struct node { int val; struct node *next; };
... void set(struct node *xs, int v) {
...     if (xs != NULL) xs->val = v;
... }
... ''')
>>> report = dsverify.analyze_program(program)
>>> print(report.function('set').d_safe, report.function('set').mem_safe)
yes yes
>>> print(dsverify.render_report(report, timings=False).splitlines()[-1])
D: 1/1  M: 1/1
"""


def _make_version(version_info):
    return '.'.join(str(i) for i in version_info)


#: A tuple containing the three components of the version number:
#: major, minor, micro.
version_info = (0, 1, 0, "dev0")

#: The version of the module as a string (major.minor.micro).
__version__ = _make_version(version_info)

from .cli import Config, main, run  # noqa: E402
from .formula import FormulaError  # noqa: E402
from .frontend import (  # noqa: E402
    SourceError, format_program, load_program, lower, parse_program
)
from .oracle import BoundsError, RuntimeFault  # noqa: E402
from .report import (  # noqa: E402
    AnalysisReport, analyze_program, render_report
)
from .schema import (  # noqa: E402
    SchemaError, extract_schema, generate_d_rules, generate_negation_rewrites
)
from .solver import BudgetExhausted, check_validity, solve  # noqa: E402
from .vcgen import MALLOC, ZMALLOC, generate_vcs  # noqa: E402

__all__ = [
    'AnalysisReport',
    'BoundsError',
    'BudgetExhausted',
    'Config',
    'FormulaError',
    'MALLOC',
    'RuntimeFault',
    'SchemaError',
    'SourceError',
    'ZMALLOC',
    '__version__',
    'analyze_program',
    'check_validity',
    'extract_schema',
    'format_program',
    'generate_d_rules',
    'generate_negation_rewrites',
    'generate_vcs',
    'load_program',
    'lower',
    'main',
    'parse_program',
    'render_report',
    'run',
    'solve',
    'version_info',
]
