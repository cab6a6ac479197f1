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
Decision procedure for heap literals.

Heaps are finite partial maps from addresses to values.  The store keeps
the asserted heap literals and saturates them with a fixed set of sound
propagation rules; address equality questions are delegated to the
arithmetic store.  Case splits the rules cannot decide on their own are
returned as clauses for the search to branch on.
"""

import logging

from .arith import DISEQUAL, EQUAL, UNKNOWN
from .formula import (
    Conflict, Elem, InDom, IntRel, NotElem, NotInDom, Term, conj
)

logger = logging.getLogger(__name__)

_FACT_KINDS = ('elem', 'notelem', 'indom', 'notindom')
_STRUCT_KINDS = ('heq', 'diff', 'subheap', 'domsub', 'update', 'chunk')
HEAP_KINDS = _FACT_KINDS + _STRUCT_KINDS

# Chunks larger than this only get interval reasoning.
_MAX_EXPANDED_CHUNK = 64


class _Index(object):

    """Heap facts grouped by heap and canonical address."""

    def __init__(self, store):
        canon = store._arith.canon
        self.elems = {}
        self.notelems = {}
        self.indom = {}
        self.notindom = {}
        for lit in store._lists['elem']:
            ca = canon(lit.addr)
            self.elems.setdefault(lit.heap, {}).setdefault(ca, []).append(
                (lit.addr, lit.val))
            self.indom.setdefault(lit.heap, {}).setdefault(ca, lit.addr)
        for lit in store._lists['indom']:
            self.indom.setdefault(lit.heap, {}).setdefault(
                canon(lit.addr), lit.addr)
        for lit in store._lists['notindom']:
            self.notindom.setdefault(lit.heap, {}).setdefault(
                canon(lit.addr), lit.addr)
        for lit in store._lists['notelem']:
            self.notelems.setdefault(lit.heap, {}).setdefault(
                canon(lit.addr), []).append((lit.addr, lit.val))

    def cells(self, table, heap):
        return table.get(heap, {})

    def elem_pairs(self, heap):
        for pairs in self.elems.get(heap, {}).values():
            for pair in pairs:
                yield pair


class HeapStore(object):

    """
    Incremental store of heap literals with push/pop.

    Args:
    arith -- the ArithStore answering address and value equalities
    """

    def __init__(self, arith):
        self._arith = arith
        self._lists = dict((kind, []) for kind in HEAP_KINDS)
        self._known = set()
        self._fired = set()
        self._fired_log = []
        self._stack = []
        self._index = None
        self._index_key = None

    def add(self, literal):
        """Record a heap literal; duplicates are ignored."""
        if literal in self._known:
            return
        self._known.add(literal)
        self._lists[literal.kind].append(literal)
        self._index = None

    def literals(self, kind):
        return self._lists[kind]

    def elems_of(self, heap):
        """Asserted (address, value) pairs of *heap*, in assertion order."""
        return [(lit.addr, lit.val) for lit in self._lists['elem']
                if lit.heap == heap]

    def _get_index(self):
        key = (sum(len(v) for v in self._lists.values()), self._arith.version)
        if self._index is None or self._index_key != key:
            self._index = _Index(self)
            self._index_key = key
        return self._index

    # Queries

    def holds(self, literal):
        """Tell whether *literal* is entailed by the store."""
        if literal.kind in _STRUCT_KINDS:
            return literal in self._known
        index = self._get_index()
        canon = self._arith.canon
        ca = canon(literal.addr)
        if literal.kind == 'indom':
            return ca in index.cells(index.indom, literal.heap)
        if literal.kind == 'notindom':
            return ca in index.cells(index.notindom, literal.heap)
        if literal.kind == 'elem':
            pairs = index.cells(index.elems, literal.heap).get(ca, ())
            cv = canon(literal.val)
            return any(canon(v) == cv for _, v in pairs)
        if literal.kind == 'notelem':
            if ca in index.cells(index.notindom, literal.heap):
                return True
            pairs = index.cells(index.elems, literal.heap).get(ca, ())
            if any(self._arith.known_relation(v, literal.val) == DISEQUAL
                   for _, v in pairs):
                return True
            pairs = index.cells(index.notelems, literal.heap).get(ca, ())
            cv = canon(literal.val)
            return any(canon(v) == cv for _, v in pairs)
        return literal in self._known

    def refutes(self, literal):
        """Tell whether the negation of *literal* is entailed."""
        if literal.kind in _STRUCT_KINDS:
            return False
        index = self._get_index()
        ca = self._arith.canon(literal.addr)
        if literal.kind == 'indom':
            return ca in index.cells(index.notindom, literal.heap)
        if literal.kind == 'notindom':
            return ca in index.cells(index.indom, literal.heap)
        if literal.kind == 'elem':
            return self.holds(NotElem(*literal))
        if literal.kind == 'notelem':
            return self.holds(Elem(*literal))
        return False

    # Propagation

    def propagate(self):
        """
        Run every rule once over the current store.

        Return: (literals, clauses) newly derived; clauses are tuples of
        alternative formulas
        Raise Conflict: if the store is inconsistent
        """
        run = _Round(self, self._get_index())
        run.check_conflicts()
        run.positivity()
        for lit in self._lists['heq']:
            run.heq(lit)
        for lit in self._lists['diff']:
            run.diff(lit)
        for lit in self._lists['subheap']:
            run.subheap(lit)
        for lit in self._lists['domsub']:
            run.domsub(lit)
        for lit in self._lists['update']:
            run.update(lit)
        for lit in self._lists['chunk']:
            run.chunk(lit)
        return run.literals, run.clauses

    def request_splits(self):
        """
        Return address case splits needed to decide the saturated store,
        highest priority first.  Only the first one is meant to be used
        before propagating again.
        """
        index = self._get_index()
        relation = self._arith.known_relation
        for lit in self._lists['update']:
            for heap in (lit.heap, lit.result):
                for q, _ in index.elem_pairs(heap):
                    if relation(lit.addr, q) == UNKNOWN:
                        return [_equality_split(lit.addr, q)]
        for heap, cells in index.notindom.items():
            for q in cells.values():
                for p in index.cells(index.indom, heap).values():
                    if relation(p, q) == UNKNOWN:
                        return [_equality_split(p, q)]
        for heap, cells in index.notelems.items():
            for pairs in cells.values():
                for q, _ in pairs:
                    for p, _ in index.elem_pairs(heap):
                        if relation(p, q) == UNKNOWN:
                            return [_equality_split(p, q)]
        for lit in self._lists['chunk']:
            if lit.size.var is not None:
                continue
            last = lit.addr + (lit.size.offset - 1)
            for q in index.cells(index.notindom, lit.heap).values():
                inside = conj(IntRel('<=', lit.addr, q), IntRel('<=', q, last))
                below = IntRel('<', q, lit.addr)
                above = IntRel('<', last, q)
                if not any(self._entailed(f) for f in (below, above)):
                    return [(below, above, inside)]
        for heap in list(index.elems):
            pairs = list(index.elem_pairs(heap))
            for i, (p, v) in enumerate(pairs):
                for q, w in pairs[i + 1:]:
                    if (relation(p, q) == UNKNOWN and
                            relation(v, w) != EQUAL):
                        return [_equality_split(p, q)]
        return []

    def _entailed(self, literal):
        return self._arith.entails(literal)

    # Backtracking

    def push(self):
        marks = dict((kind, len(lits)) for kind, lits in self._lists.items())
        self._stack.append((marks, len(self._fired_log)))

    def pop(self):
        marks, fired = self._stack.pop()
        for kind, mark in marks.items():
            lits = self._lists[kind]
            for lit in lits[mark:]:
                self._known.discard(lit)
            del lits[mark:]
        for key in self._fired_log[fired:]:
            self._fired.discard(key)
        del self._fired_log[fired:]
        self._index = None

    def fire(self, key):
        """Mark a one-shot rule instance; return False if it already ran."""
        if key in self._fired:
            return False
        self._fired.add(key)
        self._fired_log.append(key)
        return True


def _equality_split(p, q):
    return (IntRel('=', p, q), IntRel('!=', p, q))


class _Round(object):

    """One saturation pass over the store."""

    def __init__(self, store, index):
        self.store = store
        self.index = index
        self.arith = store._arith
        self.literals = []
        self.clauses = []
        self._seen = set()

    def emit(self, literal):
        if literal in self._seen:
            return
        self._seen.add(literal)
        if isinstance(literal, IntRel):
            if self.arith.entails(literal):
                return
        elif self.store.holds(literal):
            return
        self.literals.append(literal)

    def post(self, key, alternatives):
        if self.store.fire(key):
            self.clauses.append(tuple(alternatives))

    def cells(self, table, heap):
        return self.index.cells(table, heap)

    def has(self, table, heap, addr):
        return self.arith.canon(addr) in self.index.cells(table, heap)

    # Rules

    def check_conflicts(self):
        index = self.index
        relation = self.arith.known_relation
        for heap, cells in index.notindom.items():
            present = index.cells(index.indom, heap)
            for ca, addr in cells.items():
                if ca in present:
                    raise Conflict('H', [InDom(heap, present[ca]),
                                         NotInDom(heap, addr)],
                                   '%s ∈ dom(%s) and %s ∉ dom(%s)' %
                                   (present[ca], heap, addr, heap))
        for heap, cells in index.elems.items():
            for ca, pairs in cells.items():
                addr, first = pairs[0]
                for other_addr, value in pairs[1:]:
                    rel = relation(first, value)
                    if rel == DISEQUAL:
                        raise Conflict('H', [Elem(heap, addr, first),
                                             Elem(heap, other_addr, value)],
                                       '%s maps %s to both %s and %s' %
                                       (heap, addr, first, value))
                    if rel == UNKNOWN:
                        self.emit(IntRel('=', first, value))
        for heap, cells in index.notelems.items():
            present = index.cells(index.elems, heap)
            for ca, pairs in cells.items():
                for addr, value in pairs:
                    for _, stored in present.get(ca, ()):
                        rel = relation(stored, value)
                        if rel == EQUAL:
                            raise Conflict(
                                'H', [Elem(heap, addr, stored),
                                      NotElem(heap, addr, value)],
                                '%s[%s] ↪ %s is both asserted and denied' %
                                (heap, addr, value))
                        if rel == UNKNOWN:
                            self.emit(IntRel('!=', stored, value))

    def positivity(self):
        for cells in self.index.indom.values():
            for addr in cells.values():
                self.emit(IntRel('<', 0, addr))

    def heq(self, lit):
        index = self.index
        heap, left, right = lit
        for part, other in ((left, right), (right, left)):
            for addr, value in index.elem_pairs(part):
                self.emit(Elem(heap, addr, value))
            for addr in self.cells(index.indom, part).values():
                self.emit(InDom(heap, addr))
                self.emit(NotInDom(other, addr))
        for addr in self.cells(index.notindom, heap).values():
            self.emit(NotInDom(left, addr))
            self.emit(NotInDom(right, addr))
        for addr in self.cells(index.notindom, left).values():
            if self.has(index.notindom, right, addr):
                self.emit(NotInDom(heap, addr))
        for addr, value in index.elem_pairs(heap):
            for part in (left, right):
                if self.has(index.indom, part, addr):
                    self.emit(Elem(part, addr, value))
        for addr in self.cells(index.indom, heap).values():
            if (self.has(index.indom, left, addr) or
                    self.has(index.indom, right, addr)):
                continue
            out_left = self.has(index.notindom, left, addr)
            out_right = self.has(index.notindom, right, addr)
            if out_left and out_right:
                raise Conflict('H', [lit, InDom(heap, addr)],
                               '%s ∈ dom(%s) but in neither %s nor %s' %
                               (addr, heap, left, right))
            if out_left:
                self.emit(InDom(right, addr))
            elif out_right:
                self.emit(InDom(left, addr))
            else:
                self.post(('heq', lit, addr),
                          (InDom(left, addr), InDom(right, addr)))

    def diff(self, lit):
        index = self.index
        heap, context, footprint = lit
        for addr, value in index.elem_pairs(heap):
            if self.has(index.notindom, context, addr):
                self.emit(Elem(footprint, addr, value))
        for addr in self.cells(index.indom, heap).values():
            if self.has(index.notindom, context, addr):
                self.emit(InDom(footprint, addr))
            elif not self.has(index.indom, context, addr):
                self.post(('diff', lit, addr),
                          (InDom(context, addr), NotInDom(context, addr)))
        for addr, value in index.elem_pairs(footprint):
            self.emit(Elem(heap, addr, value))
        for addr in self.cells(index.indom, footprint).values():
            self.emit(InDom(heap, addr))
            self.emit(NotInDom(context, addr))
        for addr in self.cells(index.indom, context).values():
            self.emit(NotInDom(footprint, addr))
        for addr in self.cells(index.notindom, heap).values():
            self.emit(NotInDom(footprint, addr))

    def subheap(self, lit):
        index = self.index
        sub, heap = lit
        for addr, value in index.elem_pairs(sub):
            self.emit(Elem(heap, addr, value))
        for addr in self.cells(index.indom, sub).values():
            self.emit(InDom(heap, addr))
        for addr in self.cells(index.notindom, heap).values():
            self.emit(NotInDom(sub, addr))
        for addr, value in index.elem_pairs(heap):
            if self.has(index.indom, sub, addr):
                self.emit(Elem(sub, addr, value))

    def domsub(self, lit):
        index = self.index
        sub, sup = lit
        for addr in self.cells(index.indom, sub).values():
            self.emit(InDom(sup, addr))
        for addr in self.cells(index.notindom, sup).values():
            self.emit(NotInDom(sub, addr))

    def update(self, lit):
        index = self.index
        relation = self.arith.known_relation
        heap, addr, value, result = lit
        self.emit(Elem(result, addr, value))
        self.emit(InDom(heap, addr))
        for a, b in ((heap, result), (result, heap)):
            for q in self.cells(index.indom, a).values():
                self.emit(InDom(b, q))
            for q in self.cells(index.notindom, a).values():
                self.emit(NotInDom(b, q))
            for q, u in index.elem_pairs(a):
                if relation(addr, q) == DISEQUAL:
                    self.emit(Elem(b, q, u))

    def chunk(self, lit):
        index = self.index
        heap, addr, size, vals, fill = lit
        if self.store.fire(('chunk', lit)):
            for i, value in enumerate(vals):
                self.emit(Elem(heap, addr + i, value))
            if size.var is None and not vals:
                for i in range(min(size.offset, _MAX_EXPANDED_CHUNK)):
                    self.emit(InDom(heap, addr + i))
        if fill is not None:
            for _, value in index.elem_pairs(heap):
                self.emit(IntRel('=', value, fill))
        last = None
        length = size.offset if size.var is None else self.arith.value(size)
        if length is not None:
            last = addr + (length - 1)
        for q in self.cells(index.indom, heap).values():
            self.emit(IntRel('<=', addr, q))
            bound = self.chunk_end(addr, size, last, q)
            if bound is not None:
                self.emit(bound)
        if last is not None:
            for q in self.cells(index.notindom, heap).values():
                if (self.arith.entails(IntRel('<=', addr, q)) and
                        self.arith.entails(IntRel('<=', q, last))):
                    raise Conflict('H', [lit, NotInDom(heap, q)],
                                   '%s lies inside %s' % (q, lit))

    def chunk_end(self, addr, size, last, q):
        """
        The upper bound ``q ≤ addr + size - 1`` of a chunk cell as a
        difference literal, or None while it has no such form.
        """
        if last is not None:
            return IntRel('<=', q, last)
        start = self.arith.value(addr)
        if start is not None:
            return IntRel('<=', q, size + (start - 1))
        root_q, kq = self.arith.canon(q)
        root_a, ka = self.arith.canon(addr)
        if root_q == root_a:
            return IntRel('<=', Term(None, kq - ka + 1), size)
        return None
