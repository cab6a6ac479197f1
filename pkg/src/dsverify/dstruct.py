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
Propagation engine running the generated data-structure rules.

Closed-rules turn a pointer value stored in a closed field heap into a
node atom; node-rules turn a node atom into the case split "null, or all
the node's field cells are present".  Each rule instance fires once per
search branch.
"""

import logging

from .formula import IntRel, Or

logger = logging.getLogger(__name__)


class RuleEngine(object):

    """
    Args:
    rules -- the DRule list generated for the schema
    arith -- the ArithStore of the search
    heap -- the HeapStore providing the field heap contents
    """

    def __init__(self, rules, arith, heap):
        self._closed_rules = [r for r in rules if r.kind == 'closed']
        self._node_rules = dict((r.node_type.name, r) for r in rules
                                if r.kind == 'node')
        self._arith = arith
        self._heap = heap
        self._closed = []
        self._nodes = []
        self._known = set()
        self._fired = set()
        self._fired_log = []
        self._stack = []

    def add(self, literal):
        if literal in self._known:
            return
        self._known.add(literal)
        if literal.kind == 'closed':
            self._closed.append(literal)
        else:
            self._nodes.append(literal)

    def holds(self, literal):
        if literal in self._known:
            return True
        if literal.kind != 'node':
            return False
        canon = self._arith.canon(literal.addr)
        return any(node.type == literal.type and
                   node.fields == literal.fields and
                   self._arith.canon(node.addr) == canon
                   for node in self._nodes)

    def refutes(self, literal):
        return False

    def _fire(self, key):
        if key in self._fired:
            return False
        self._fired.add(key)
        self._fired_log.append(key)
        return True

    def propagate(self):
        """
        Fire the rules whose heads are matched by the store.

        Return: (literals, clauses) newly derived
        """
        literals = []
        clauses = []
        for closed in self._closed:
            for rule in self._closed_rules:
                heap = closed.fields[rule.position]
                for addr, value in self._heap.elems_of(heap):
                    if not self._fire((rule.key, closed, addr, value)):
                        continue
                    node = rule.body(closed.fields, addr, value)
                    if not self.holds(node):
                        literals.append(node)
        for node in self._nodes:
            rule = self._node_rules.get(node.type)
            if rule is None or not self._fire((rule.key, node)):
                continue
            literals.append(IntRel('<=', 0, node.addr))
            body = rule.body(node.fields, node.addr)
            clauses.append(body.args if isinstance(body, Or) else (body,))
        return literals, clauses

    def push(self):
        self._stack.append((len(self._closed), len(self._nodes),
                            len(self._fired_log)))

    def pop(self):
        closed, nodes, fired = self._stack.pop()
        for lit in self._closed[closed:] + self._nodes[nodes:]:
            self._known.discard(lit)
        del self._closed[closed:]
        del self._nodes[nodes:]
        for key in self._fired_log[fired:]:
            self._fired.discard(key)
        del self._fired_log[fired:]
