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
Type schema of the analyzed program and the rules generated from it.

The schema lists the node types (records), every field in a global order
and the pointer fields.  From it two rule sets are generated:

 * the propagation rules of the data-structure solver, one closed-rule per
   pointer field and one node-rule per type;
 * the rewrite rules eliminating negated closed, node, subheap, domsub and
   partition atoms before solving.
"""

from collections import namedtuple
import logging

from .formula import (
    Closed, DomSub, Elem, Heq, InDom, IntRel, Node, NotElem, NotInDom,
    SubHeap, FALSE, Term, conj, disj
)
from .frontend import INT, is_record_pointer

logger = logging.getLogger(__name__)


class SchemaError(ValueError):

    """
    Exception raised when record declarations do not form a valid schema.
    """

    def __init__(self, message, record=None):
        self.message = message
        self.record = record

    def __str__(self):
        if self.record is None:
            return self.message
        return 'struct %s: %s' % (self.record, self.message)


class FieldInfo(namedtuple('FieldInfo',
                           ['name', 'owner', 'offset', 'kind', 'heap'])):

    """
    One field of the schema.

    *name* is qualified by the owner record (``list_node.next``), *heap*
    is the name of the field heap holding the field's cells (``F_next``).
    """

    __slots__ = ()

    @property
    def short_name(self):
        return self.name.split('.', 1)[1]

    @property
    def is_pointer(self):
        return is_record_pointer(self.kind)

    @property
    def target(self):
        return self.kind.record if self.is_pointer else None


class NodeType(namedtuple('NodeType', ['name', 'fields'])):

    __slots__ = ()

    @property
    def size(self):
        return len(self.fields)


class TypeSchema(object):

    """
    The node types of a program with their fields in declaration order.
    """

    def __init__(self, types):
        self._types = tuple(types)
        self._by_name = dict((t.name, t) for t in self._types)
        self._fields = tuple(f for t in self._types for f in t.fields)
        self._index = dict((f.name, i) for i, f in enumerate(self._fields))

    @property
    def types(self):
        return self._types

    @property
    def fields(self):
        return self._fields

    @property
    def ptr_fields(self):
        return tuple(f for f in self._fields if f.is_pointer)

    @property
    def heaps(self):
        """Names of the field heaps, in global field order."""
        return tuple(f.heap for f in self._fields)

    def node_type(self, name):
        try:
            return self._by_name[name]
        except KeyError:
            raise SchemaError('unknown node type', name)

    def field(self, type_name, field_name):
        for info in self.node_type(type_name).fields:
            if info.short_name == field_name:
                return info
        raise SchemaError('no field %s' % field_name, type_name)

    def offsetof(self, type_name, field_name):
        return self.field(type_name, field_name).offset

    def typeof(self, qualified_name):
        return self._fields[self._index[qualified_name]].kind

    def sizeof(self, type_name):
        return self.node_type(type_name).size

    def field_index(self, info):
        """Position of a field in the global order."""
        return self._index[info.name]

    def __repr__(self):
        return 'TypeSchema(%s)' % ', '.join(
            '%s{%s}' % (t.name, ', '.join(f.short_name for f in t.fields))
            for t in self._types)


def extract_schema(prog):
    """
    Build the type schema of a program.

    Args:
    prog -- a parsed or lowered Program

    Return: a TypeSchema listing records and fields in source order
    Raise SchemaError: for a record without fields or a pointer to an
                       undeclared record
    """
    names = [record.name for record in prog.records]
    counts = {}
    for record in prog.records:
        for name, _ in record.fields:
            counts[name] = counts.get(name, 0) + 1
    types = []
    for record in prog.records:
        if not record.fields:
            raise SchemaError('record has no fields', record.name)
        fields = []
        for offset, (name, kind) in enumerate(record.fields):
            if kind != INT and not is_record_pointer(kind):
                raise SchemaError('unsupported field type %s' % (kind,),
                                  record.name)
            if is_record_pointer(kind) and kind.record not in names:
                raise SchemaError('field %s points to an undeclared record'
                                  % name, record.name)
            if counts[name] == 1:
                heap = 'F_%s' % name
            else:
                heap = 'F_%s_%s' % (record.name, name)
            fields.append(FieldInfo('%s.%s' % (record.name, name),
                                    record.name, offset, kind, heap))
        types.append(NodeType(record.name, tuple(fields)))
    schema = TypeSchema(types)
    logger.debug('schema: %r', schema)
    return schema


###############################################################################
# Data-structure solver rules

def node_body(node_type, schema, addr, heaps):
    """
    The definition of a valid node pointer: null, or every field cell of
    the node lies in its field heap.
    """
    cells = [InDom(heaps[schema.field_index(f)], addr + f.offset)
             for f in node_type.fields]
    return disj(IntRel('=', addr, 0), conj(*cells))


def node_negation(node_type, schema, addr, heaps):
    """The negation of node_body without negated atoms."""
    cells = [NotInDom(heaps[schema.field_index(f)], addr + f.offset)
             for f in node_type.fields]
    return conj(IntRel('!=', addr, 0), disj(*cells))


_P = Term('p')
_V = Term('v')


class DRule(object):

    """
    A propagation rule of the data-structure solver.
    """

    kind = None

    def __init__(self, schema):
        self._schema = schema

    def __eq__(self, other):
        return type(self) is type(other) and self.key == other.key

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return '<%s %s>' % (self.__class__.__name__, self)


class ClosedRule(DRule):

    """closed(F..) ∧ F_f[p] ↪ v ⟹ node_T(v, F..) for a pointer field f."""

    kind = 'closed'

    def __init__(self, schema, field):
        super(ClosedRule, self).__init__(schema)
        self.field = field
        self.target = field.target
        self.position = schema.field_index(field)

    @property
    def key(self):
        return ('closed', self.field.name)

    def head(self, heaps, addr, val):
        return (Closed(heaps), Elem(heaps[self.position], addr, val))

    def body(self, heaps, addr, val):
        return Node(self.target, val, heaps)

    def __str__(self):
        heaps = self._schema.heaps
        return '%s ⟹ %s' % (' ∧ '.join(str(l) for l in
                                        self.head(heaps, _P, _V)),
                             self.body(heaps, _P, _V))


class NodeRule(DRule):

    """node_T(p, F..) ⟹ p = 0 ∨ (p+off_f ∈ dom(F_f) for every f of T)."""

    kind = 'node'

    def __init__(self, schema, node_type):
        super(NodeRule, self).__init__(schema)
        self.node_type = node_type

    @property
    def key(self):
        return ('node', self.node_type.name)

    def head(self, heaps, addr):
        return (Node(self.node_type.name, addr, heaps),)

    def body(self, heaps, addr):
        return node_body(self.node_type, self._schema, addr, heaps)

    def __str__(self):
        heaps = self._schema.heaps
        return '%s ⟹ %s' % (self.head(heaps, _P)[0], self.body(heaps, _P))


def generate_d_rules(schema):
    """
    Generate the data-structure solver for *schema*.

    Return: one ClosedRule per pointer field followed by one NodeRule per
    type
    """
    rules = [ClosedRule(schema, f) for f in schema.ptr_fields]
    rules.extend(NodeRule(schema, t) for t in schema.types)
    return rules


###############################################################################
# Negation rewrites

class RewriteRule(object):

    """
    Replaces a negated atom by an equisatisfiable negation-free formula.

    *key* identifies the atoms the rule applies to.  ``apply`` takes the
    (positive) atom and a fresh-name supply.
    """

    key = None
    pattern = None

    def __init__(self, schema):
        self._schema = schema

    def apply(self, literal, fresh):
        raise NotImplementedError

    def _sample(self):
        raise NotImplementedError

    def __str__(self):
        literal = self._sample()
        return '¬%s ⟶ %s' % (_paren(literal), self.apply(literal,
                                                         lambda name: name))

    def __repr__(self):
        return '<%s %s>' % (self.__class__.__name__, self.key)


def _paren(literal):
    text = str(literal)
    if ' ' in text and not text.startswith(('closed', 'node')):
        return '(%s)' % text
    return text


class ClosedRewrite(RewriteRule):

    key = 'closed'
    pattern = '¬closed'

    def apply(self, literal, fresh):
        heaps = literal.fields
        cases = []
        for field in self._schema.ptr_fields:
            s, t = Term(fresh('s')), Term(fresh('t'))
            target = self._schema.node_type(field.target)
            cases.append(conj(
                Elem(heaps[self._schema.field_index(field)], s, t),
                node_negation(target, self._schema, t, heaps)))
        if not cases:
            return FALSE
        return disj(*cases)

    def _sample(self):
        return Closed(self._schema.heaps)


class NodeRewrite(RewriteRule):

    pattern = '¬node'

    def __init__(self, schema, node_type):
        super(NodeRewrite, self).__init__(schema)
        self.node_type = node_type

    @property
    def key(self):
        return ('node', self.node_type.name)

    def apply(self, literal, fresh):
        return node_negation(self.node_type, self._schema, literal.addr,
                             literal.fields)

    def _sample(self):
        return Node(self.node_type.name, _P, self._schema.heaps)


class SubHeapRewrite(RewriteRule):

    key = 'subheap'
    pattern = '¬subheap'

    def apply(self, literal, fresh):
        s, t = Term(fresh('s')), Term(fresh('t'))
        return conj(Elem(literal.sub, s, t), NotElem(literal.heap, s, t))

    def _sample(self):
        return SubHeap('F', 'H')


class DomSubRewrite(RewriteRule):

    key = 'domsub'
    pattern = '¬domsub'

    def apply(self, literal, fresh):
        s = Term(fresh('s'))
        return conj(InDom(literal.sub, s), NotInDom(literal.sup, s))

    def _sample(self):
        return DomSub('F1', 'F2')


class HeqRewrite(RewriteRule):

    """
    ¬(H ≐ H1 ∗ H2): the components overlap, or some cell of H is in
    neither component, or some cell of a component is not in H.
    """

    key = 'heq'
    pattern = '¬heq'

    def apply(self, literal, fresh):
        h, h1, h2 = literal
        s, v = Term(fresh('s')), Term(fresh('v'))
        return disj(
            conj(InDom(h1, s), InDom(h2, s)),
            conj(Elem(h, s, v), NotElem(h1, s, v), NotElem(h2, s, v)),
            conj(Elem(h1, s, v), NotElem(h, s, v)),
            conj(Elem(h2, s, v), NotElem(h, s, v)))

    def _sample(self):
        return Heq('H', 'H1', 'H2')


def generate_negation_rewrites(schema):
    """
    Generate the rewrite rules eliminating negated atoms.

    Return: rewrites for ¬closed, ¬node_T for every type, ¬subheap,
    ¬domsub and ¬heq
    """
    rules = [ClosedRewrite(schema)]
    rules.extend(NodeRewrite(schema, t) for t in schema.types)
    rules.extend([SubHeapRewrite(schema), DomSubRewrite(schema),
                  HeqRewrite(schema)])
    return rules


def rewrite_key(literal):
    """The key of the rewrite rule applying to a negated *literal*."""
    if isinstance(literal, Node):
        return ('node', literal.type)
    return literal.kind
