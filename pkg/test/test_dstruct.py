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

from dsverify.arith import ArithStore
from dsverify.dstruct import RuleEngine
from dsverify.formula import (
    Closed, Elem, InDom, IntRel, Node, conj
)
from dsverify.heap import HeapStore

from .helpers import F_NEXT, F_VAL, LIST_FIELDS, V, list_rules


def make_engine(*literals):
    schema, rules, _ = list_rules()
    arith = ArithStore()
    heap = HeapStore(arith)
    engine = RuleEngine(rules, arith, heap)
    for lit in literals:
        if lit.kind in ('closed', 'node'):
            engine.add(lit)
        elif lit.kind == 'int':
            arith.assert_literal(lit)
        else:
            heap.add(lit)
    return engine


def list_node(addr):
    return Node('list_node', addr, LIST_FIELDS)


def test_closed_pointer_field_yields_node():
    engine = make_engine(Closed(LIST_FIELDS), Elem(F_NEXT, 'p', 'v'))
    literals, clauses = engine.propagate()
    assert literals == [list_node(V('v'))]
    assert clauses == []
    assert engine.propagate() == ([], [])


def test_data_fields_are_ignored():
    engine = make_engine(Closed(LIST_FIELDS), Elem(F_VAL, 'p', 'v'))
    assert engine.propagate() == ([], [])


def test_no_nodes_without_closed():
    engine = make_engine(Elem(F_NEXT, 'p', 'v'))
    assert engine.propagate() == ([], [])


def test_node_splits_on_null():
    engine = make_engine(list_node('v'))
    literals, clauses = engine.propagate()
    assert literals == [IntRel('<=', 0, V('v'))]
    assert clauses == [(
        IntRel('=', V('v'), 0),
        conj(InDom(F_VAL, V('v')), InDom(F_NEXT, V('v', 1))),
    )]


def test_node_holds_up_to_equality():
    engine = make_engine(list_node('x'), IntRel('=', V('x'), V('y')))
    assert engine.holds(list_node('y'))
    assert not engine.holds(list_node('z'))
    assert not engine.holds(Closed(LIST_FIELDS))
    assert not engine.refutes(list_node('x'))


def test_push_pop_forgets_nodes_and_firings():
    engine = make_engine()
    engine.push()
    engine.add(list_node('x'))
    _, clauses = engine.propagate()
    assert len(clauses) == 1
    engine.pop()
    assert not engine.holds(list_node('x'))
    engine.add(list_node('x'))
    _, clauses = engine.propagate()
    assert len(clauses) == 1
