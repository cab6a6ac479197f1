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

from collections import namedtuple
import os.path

from dsverify.formula import Term
from dsverify.frontend import load_program
from dsverify.schema import (
    extract_schema, generate_d_rules, generate_negation_rewrites
)

#: The structures of the unsafe-variant corpus.
STRUCTURES = ('list', 'dag', 'graph')

#: The variants that break integrity or memory safety.
UNSAFE_VARIANTS = (
    'overlap_node', 'wrong_node', 'wrong_size', 'not_array', 'cast_int',
    'uninit_ptr', 'uninit_ptr_stk', 'arith_ptr',
)

#: The functions of the list library.
LIBRARY_FUNCTIONS = (
    'prepend', 'last', 'append', 'nth', 'reverse', 'length', 'find',
    'remove',
)

LIST_DECL = 'struct list_node { int val; struct list_node *next; };\n'

#: The list field heaps in schema order.
F_VAL = 'F_val'
F_NEXT = 'F_next'
LIST_FIELDS = (F_VAL, F_NEXT)


def get_absolute_file_path(*filepath):
    """
    Return the absolute file path for the file path given in argument,
    considering it is relative to the caller script's directory.
    """
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), *filepath)


SourceFile = namedtuple('SourceFile', ('filepath', 'source'))


def load_data_file(name):
    filepath = get_absolute_file_path("data", name)
    with open(filepath, encoding='utf-8') as fp:
        return SourceFile(filepath, fp.read())


def corpus_name(variant, structure):
    return '%s_%s.mc' % (variant, structure)


def load_corpus(name):
    """Load and lower a corpus file; return (program, schema)."""
    program = load_program(load_data_file(name).source)
    return program, extract_schema(program)


def list_schema():
    return extract_schema(load_program(LIST_DECL))


def list_rules():
    schema = list_schema()
    return (schema, generate_d_rules(schema),
            generate_negation_rewrites(schema))


# Shorthand for terms.
def V(name, offset=0):
    return Term(name, offset)


def C(value):
    return Term(None, value)
