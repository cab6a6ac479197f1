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
The generated rules and rewrites checked against the direct semantics of
node pointers and closed field heaps, on random small heaps.
"""

import random

import pytest

from dsverify.formula import (
    Closed, DomSub, Heq, Node, Or, SubHeap, int_vars
)
from dsverify.frontend import load_program
from dsverify.oracle import Model, evaluate
from dsverify.schema import (
    extract_schema, generate_d_rules, generate_negation_rewrites
)
from dsverify.utils import FreshNames

from .helpers import LIST_DECL

TREE_DECL = '''
struct tree { int key; struct tree *left; struct tree *right; };
struct item { int key; struct tree *owner; };
'''

ADDRESSES = range(1, 9)
WINDOW = range(-1, 11)


def random_heaps(schema, rng):
    """Field heaps over small addresses; now and then every pointer is null."""
    starts = [0] + list(ADDRESSES)
    if rng.random() < 0.3:
        starts = [0]
    heaps = {}
    for info in schema.fields:
        cells = {}
        for addr in ADDRESSES:
            if rng.random() < 0.6:
                if info.is_pointer:
                    cells[addr] = rng.choice(starts)
                else:
                    cells[addr] = rng.randrange(3)
        heaps[info.heap] = cells
    return heaps


def witnesses(formula):
    """Every assignment of the free variables of a rewrite in the window."""
    names = sorted(int_vars(formula))
    for values in _grid(len(names)):
        yield dict(zip(names, values))


def _grid(n):
    if n == 0:
        yield ()
        return
    for head in WINDOW:
        for tail in _grid(n - 1):
            yield (head,) + tail


def exists(formula, heaps):
    if isinstance(formula, Or):
        return any(exists(arg, heaps) for arg in formula.args)
    for assignment in witnesses(formula):
        if evaluate(formula, Model(assignment, heaps)):
            return True
    return False


@pytest.fixture(params=[LIST_DECL, TREE_DECL], ids=['list', 'tree'])
def schema(request):
    return extract_schema(load_program(request.param))


def test_rules_are_sound(schema):
    rules = generate_d_rules(schema)
    fields = schema.heaps
    rng = random.Random(11)
    for _ in range(200):
        heaps = random_heaps(schema, rng)
        for rule in rules:
            if rule.kind == 'closed':
                for addr, value in heaps[fields[rule.position]].items():
                    model = Model({'p': addr, 'v': value}, heaps)
                    head = rule.head(fields, addr, value)
                    if all(evaluate(lit, model, schema) for lit in head):
                        assert evaluate(rule.body(fields, addr, value),
                                        model, schema), rule
            else:
                for addr in ADDRESSES:
                    model = Model({}, heaps)
                    head = rule.head(fields, addr)
                    if all(evaluate(lit, model, schema) for lit in head):
                        assert evaluate(rule.body(fields, addr), model,
                                        schema), rule


def test_closed_rewrite_is_exact(schema):
    rewrite = [r for r in generate_negation_rewrites(schema)
               if r.key == 'closed'][0]
    fields = schema.heaps
    closed = Closed(fields)
    negation = rewrite.apply(closed, FreshNames())
    rng = random.Random(12)
    outcomes = set()
    for _ in range(60):
        heaps = random_heaps(schema, rng)
        is_closed = evaluate(closed, Model({}, heaps), schema)
        outcomes.add(is_closed)
        assert exists(negation, heaps) == (not is_closed)
    assert outcomes == {True, False}


def test_node_rewrites_are_exact(schema):
    fields = schema.heaps
    rewrites = [r for r in generate_negation_rewrites(schema)
                if r.pattern == '¬node']
    assert len(rewrites) == len(schema.types)
    rng = random.Random(13)
    for _ in range(60):
        heaps = random_heaps(schema, rng)
        for rewrite in rewrites:
            node = Node(rewrite.node_type.name, 'p', fields)
            negation = rewrite.apply(node, FreshNames())
            for addr in WINDOW:
                model = Model({'p': addr}, heaps)
                assert (evaluate(negation, model, schema) ==
                        (not evaluate(node, model, schema)))


def test_heap_relation_rewrites_are_exact():
    schema = extract_schema(load_program(LIST_DECL))
    table = dict((r.key, r) for r in generate_negation_rewrites(schema))
    rng = random.Random(14)
    atoms = [SubHeap('A', 'B'), DomSub('A', 'B'), Heq('H', 'A', 'B')]
    for _ in range(150):
        heaps = {}
        for name in ('H', 'A', 'B'):
            heaps[name] = dict((a, rng.randrange(2)) for a in range(1, 4)
                               if rng.random() < 0.5)
        if rng.random() < 0.3:
            heaps['H'] = dict(heaps['A'])
            heaps['H'].update(heaps['B'])
        for atom in atoms:
            negation = table[atom.kind].apply(atom, FreshNames())
            holds = evaluate(atom, Model({}, heaps))
            assert exists(negation, heaps) == (not holds), atom
