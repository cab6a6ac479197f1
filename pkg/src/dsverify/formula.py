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
Terms, literals and formulas of the VC language.

Integer terms are restricted to the shape ``x + c`` (a variable plus a
constant offset) or a plain constant.  Heap terms are variable names.
Literals are immutable and hashable; formulas are built from them with
:func:`conj`, :func:`disj` and :func:`neg`.

>>> from dsverify.formula import Term, Elem, InDom, conj
>>> xs = Term('xs')
>>> print(conj(Elem('H', xs + 1, Term("xs'")), InDom('Hc', xs + 1)))
H[xs+1] ↪ xs' ∧ xs+1 ∈ dom(Hc)
"""

from collections import namedtuple


class FormulaError(ValueError):

    """
    Exception raised when a formula falls outside of the supported fragment.
    """

    def __init__(self, formula, reason):
        self.formula = formula
        self.reason = reason

    def __str__(self):
        return 'Unsupported formula [%s]: %s' % (self.formula, self.reason)


class Conflict(Exception):

    """
    Raised by a theory when the asserted literals are contradictory.

    Args:
    tag -- 'H' (heap), 'D' (data structure rules) or 'I' (arithmetic)
    literals -- the literals taking part in the contradiction
    reason -- a short human readable explanation
    """

    def __init__(self, tag, literals, reason):
        super(Conflict, self).__init__(reason)
        self.tag = tag
        self.literals = tuple(literals)
        self.reason = reason

    def __str__(self):
        return '(%s) %s' % (self.tag, self.reason)


class Term(namedtuple('Term', ['var', 'offset'])):

    """
    An integer term ``var + offset``.  *var* is None for constants.
    """

    __slots__ = ()

    def __new__(cls, var=None, offset=0):
        return super(Term, cls).__new__(cls, var, int(offset))

    @staticmethod
    def of(value):
        """
        Coerce a value to a term.

        Args:
        value -- a Term, an int (constant) or a str (variable)

        Return: the corresponding term
        Raise FormulaError: if the value has another type
        """
        if isinstance(value, Term):
            return value
        if isinstance(value, bool):
            raise FormulaError(value, 'not an integer term')
        if isinstance(value, int):
            return Term(None, value)
        if isinstance(value, str):
            return Term(value, 0)
        raise FormulaError(value, 'not an integer term')

    @property
    def is_const(self):
        return self.var is None

    def __add__(self, k):
        return Term(self.var, self.offset + k)

    def __sub__(self, k):
        return Term(self.var, self.offset - k)

    def __str__(self):
        if self.var is None:
            return str(self.offset)
        if self.offset == 0:
            return self.var
        if self.offset > 0:
            return '%s+%d' % (self.var, self.offset)
        return '%s-%d' % (self.var, -self.offset)


ZERO = Term(None, 0)


class _Typed(object):

    # Tuples of different classes with equal fields are different formulas.

    __slots__ = ()

    def __eq__(self, other):
        return type(self) is type(other) and tuple.__eq__(self, other)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((type(self).__name__, tuple.__hash__(self)))


class _Literal(_Typed):

    # Names of the namedtuple fields holding heaps and integer terms.
    _heap_fields = ()
    _term_fields = ()
    kind = None

    __slots__ = ()

    def heaps(self):
        for name in self._heap_fields:
            value = getattr(self, name)
            if isinstance(value, tuple):
                for heap in value:
                    yield heap
            else:
                yield value

    def terms(self):
        for name in self._term_fields:
            value = getattr(self, name)
            if value is None:
                continue
            if isinstance(value, Term):
                yield value
            else:
                for term in value:
                    yield term


_INT_OPS = {'=': '=', '!=': '≠', '<': '<', '<=': '≤'}
_INT_NEGATION = {'=': '!=', '!=': '=', '<': '<=', '<=': '<'}


class IntRel(_Literal, namedtuple('IntRel', ['op', 'lhs', 'rhs'])):

    """
    An integer relation.  ``>`` and ``>=`` are stored swapped.
    """

    __slots__ = ()
    kind = 'int'
    _term_fields = ('lhs', 'rhs')

    def __new__(cls, op, lhs, rhs):
        lhs, rhs = Term.of(lhs), Term.of(rhs)
        if op == '>':
            op, lhs, rhs = '<', rhs, lhs
        elif op == '>=':
            op, lhs, rhs = '<=', rhs, lhs
        elif op == '==':
            op = '='
        if op not in _INT_OPS:
            raise FormulaError(op, 'unknown integer relation')
        return super(IntRel, cls).__new__(cls, op, lhs, rhs)

    def negate(self):
        op = _INT_NEGATION[self.op]
        if op in ('<', '<='):
            return IntRel(op, self.rhs, self.lhs)
        return IntRel(op, self.lhs, self.rhs)

    def __str__(self):
        return '%s %s %s' % (self.lhs, _INT_OPS[self.op], self.rhs)


class Heq(_Literal, namedtuple('Heq', ['heap', 'left', 'right'])):

    """heap ≐ left ∗ right"""

    __slots__ = ()
    kind = 'heq'
    _heap_fields = ('heap', 'left', 'right')

    def __str__(self):
        return '%s ≐ %s ∗ %s' % self

    def components(self):
        return (self.left, self.right)


class Elem(_Literal, namedtuple('Elem', ['heap', 'addr', 'val'])):

    """heap[addr] ↪ val"""

    __slots__ = ()
    kind = 'elem'
    _heap_fields = ('heap',)
    _term_fields = ('addr', 'val')

    def __new__(cls, heap, addr, val):
        return super(Elem, cls).__new__(cls, heap, Term.of(addr), Term.of(val))

    def __str__(self):
        return '%s[%s] ↪ %s' % self


class NotElem(_Literal, namedtuple('NotElem', ['heap', 'addr', 'val'])):

    """¬ heap[addr] ↪ val"""

    __slots__ = ()
    kind = 'notelem'
    _heap_fields = ('heap',)
    _term_fields = ('addr', 'val')

    def __new__(cls, heap, addr, val):
        return super(NotElem, cls).__new__(
            cls, heap, Term.of(addr), Term.of(val))

    def __str__(self):
        return '¬%s[%s] ↪ %s' % self


class InDom(_Literal, namedtuple('InDom', ['heap', 'addr'])):

    """addr ∈ dom(heap)"""

    __slots__ = ()
    kind = 'indom'
    _heap_fields = ('heap',)
    _term_fields = ('addr',)

    def __new__(cls, heap, addr):
        return super(InDom, cls).__new__(cls, heap, Term.of(addr))

    def __str__(self):
        return '%s ∈ dom(%s)' % (self.addr, self.heap)


class NotInDom(_Literal, namedtuple('NotInDom', ['heap', 'addr'])):

    """addr ∉ dom(heap)"""

    __slots__ = ()
    kind = 'notindom'
    _heap_fields = ('heap',)
    _term_fields = ('addr',)

    def __new__(cls, heap, addr):
        return super(NotInDom, cls).__new__(cls, heap, Term.of(addr))

    def __str__(self):
        return '%s ∉ dom(%s)' % (self.addr, self.heap)


class Diff(_Literal, namedtuple('Diff', ['heap', 'context', 'footprint'])):

    """footprint = heap − context"""

    __slots__ = ()
    kind = 'diff'
    _heap_fields = ('heap', 'context', 'footprint')

    def __str__(self):
        return '%s = %s − %s' % (self.footprint, self.heap, self.context)


class SubHeap(_Literal, namedtuple('SubHeap', ['sub', 'heap'])):

    """sub ⊆ heap"""

    __slots__ = ()
    kind = 'subheap'
    _heap_fields = ('sub', 'heap')

    def __str__(self):
        return '%s ⊆ %s' % self


class DomSub(_Literal, namedtuple('DomSub', ['sub', 'sup'])):

    """dom(sub) ⊆ dom(sup)"""

    __slots__ = ()
    kind = 'domsub'
    _heap_fields = ('sub', 'sup')

    def __str__(self):
        return 'dom(%s) ⊆ dom(%s)' % self


class Update(_Literal,
             namedtuple('Update', ['heap', 'addr', 'val', 'result'])):

    """result = heap with addr now mapped to val; addr ∈ dom(heap)"""

    __slots__ = ()
    kind = 'update'
    _heap_fields = ('heap', 'result')
    _term_fields = ('addr', 'val')

    def __new__(cls, heap, addr, val, result):
        return super(Update, cls).__new__(
            cls, heap, Term.of(addr), Term.of(val), result)

    def __str__(self):
        return 'assign(%s, %s, %s, %s)' % self


class Chunk(_Literal,
            namedtuple('Chunk', ['heap', 'addr', 'size', 'vals', 'fill'])):

    """
    heap is exactly the block [addr, addr+size).  Cell i holds vals[i]
    when given, every cell holds *fill* when it is not None.
    """

    __slots__ = ()
    kind = 'chunk'
    _heap_fields = ('heap',)
    _term_fields = ('addr', 'size', 'vals', 'fill')

    def __new__(cls, heap, addr, size, vals=(), fill=None):
        vals = tuple(Term.of(v) for v in vals)
        if fill is not None:
            fill = Term.of(fill)
        return super(Chunk, cls).__new__(
            cls, heap, Term.of(addr), Term.of(size), vals, fill)

    def __str__(self):
        if self.vals:
            contents = '[%s]' % ', '.join(str(v) for v in self.vals)
        elif self.fill is not None:
            contents = '%s...' % (self.fill,)
        else:
            contents = '?'
        return 'chunk(%s, %s, %s, %s)' % (
            self.heap, self.addr, self.size, contents)


class Closed(_Literal, namedtuple('Closed', ['fields'])):

    """closed(F_1, ..., F_n)"""

    __slots__ = ()
    kind = 'closed'
    _heap_fields = ('fields',)

    def __new__(cls, fields):
        return super(Closed, cls).__new__(cls, tuple(fields))

    def __str__(self):
        return 'closed(%s)' % ', '.join(self.fields)


class Node(_Literal, namedtuple('Node', ['type', 'addr', 'fields'])):

    """node_T(addr, F_1, ..., F_n)"""

    __slots__ = ()
    kind = 'node'
    _heap_fields = ('fields',)
    _term_fields = ('addr',)

    def __new__(cls, type, addr, fields):
        return super(Node, cls).__new__(
            cls, type, Term.of(addr), tuple(fields))

    def __str__(self):
        return 'node_%s(%s, %s)' % (
            self.type, self.addr, ', '.join(self.fields))


LITERAL_TYPES = (IntRel, Heq, Elem, NotElem, InDom, NotInDom, Diff, SubHeap,
                 DomSub, Update, Chunk, Closed, Node)


class Truth(_Typed, namedtuple('Truth', ['value'])):

    __slots__ = ()

    def __str__(self):
        return 'true' if self.value else 'false'


TRUE = Truth(True)
FALSE = Truth(False)


class And(_Typed, namedtuple('And', ['args'])):

    __slots__ = ()

    def __str__(self):
        return ' ∧ '.join(_wrap(a) for a in self.args)


class Or(_Typed, namedtuple('Or', ['args'])):

    __slots__ = ()

    def __str__(self):
        return ' ∨ '.join(_wrap(a) for a in self.args)


class Not(_Typed, namedtuple('Not', ['arg'])):

    __slots__ = ()

    def __str__(self):
        return '¬%s' % _wrap(self.arg, True)


def _wrap(formula, tight=False):
    if isinstance(formula, (And, Or)) or (tight and is_literal(formula)):
        return '(%s)' % (formula,)
    return str(formula)


def is_literal(formula):
    return isinstance(formula, _Literal)


def conj(*formulas):
    """
    Conjunction of *formulas*, flattened and simplified.
    """
    args = []
    for f in formulas:
        if f == TRUE:
            continue
        if f == FALSE:
            return FALSE
        if isinstance(f, And):
            args.extend(f.args)
        else:
            args.append(f)
    if not args:
        return TRUE
    if len(args) == 1:
        return args[0]
    return And(tuple(args))


def disj(*formulas):
    """
    Disjunction of *formulas*, flattened and simplified.
    """
    args = []
    for f in formulas:
        if f == FALSE:
            continue
        if f == TRUE:
            return TRUE
        if isinstance(f, Or):
            args.extend(f.args)
        else:
            args.append(f)
    if not args:
        return FALSE
    if len(args) == 1:
        return args[0]
    return Or(tuple(args))


def neg(formula):
    if formula == TRUE:
        return FALSE
    if formula == FALSE:
        return TRUE
    if isinstance(formula, Not):
        return formula.arg
    return Not(formula)


def literals(formula):
    """Yield the literals occurring in *formula*, left to right."""
    if isinstance(formula, (And, Or)):
        for arg in formula.args:
            for lit in literals(arg):
                yield lit
    elif isinstance(formula, Not):
        for lit in literals(formula.arg):
            yield lit
    elif is_literal(formula):
        yield formula


def int_vars(formula):
    """Return the set of integer variable names of *formula*."""
    return set(t.var for lit in literals(formula) for t in lit.terms()
               if t.var is not None)


def heap_vars(formula):
    """Return the set of heap names of *formula*."""
    return set(h for lit in literals(formula) for h in lit.heaps())
