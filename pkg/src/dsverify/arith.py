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
Decision procedure for the integer fragment.

Terms are ``x + c``.  Equalities are kept in a union-find structure with
offsets; inequalities form a difference-bound graph over the union-find
roots, closed under shortest paths as they arrive.  Disequalities are
checked against both and a disequality whose two sides are already
ordered tightens the order to a strict one.
"""

import copy
import logging

from .formula import Conflict, IntRel, Term, ZERO

logger = logging.getLogger(__name__)

#: Results of :meth:`ArithStore.known_relation`.
EQUAL = 'equal'
DISEQUAL = 'disequal'
UNKNOWN = 'unknown'

# The union-find root standing for the constant 0.
_CONST = None


class ArithStore(object):

    """
    Incremental store of integer literals with push/pop.

    Every mutation bumps :attr:`version`, so that other theories can tell
    when their cached views of the term equivalence are stale.
    """

    def __init__(self):
        self._parent = {}
        # dist[x][y] is the best known upper bound of x - y.
        self._dist = {_CONST: {_CONST: 0}}
        self._diseqs = []
        self._implied = []
        self._stack = []
        self.version = 0

    # Union-find

    def _find(self, var):
        path = []
        offset = 0
        node = var
        while node in self._parent:
            parent, k = self._parent[node]
            path.append((node, offset))
            offset += k
            node = parent
        for child, before in path:
            if self._parent[child][0] != node:
                self._parent[child] = (node, offset - before)
        return node, offset

    def canon(self, term):
        """
        Return the canonical form ``(root, offset)`` of *term*.  Two terms
        are known equal iff their canonical forms are equal.
        """
        term = Term.of(term)
        if term.var is None:
            return _CONST, term.offset
        root, offset = self._find(term.var)
        return root, offset + term.offset

    def value(self, term):
        """Return the integer value of *term* if it is known, else None."""
        root, offset = self.canon(term)
        if root is _CONST:
            return offset
        return None

    # Difference bounds

    def _node(self, root):
        if root not in self._dist:
            self._dist[root] = {root: 0}

    def _upper(self, x, y):
        return self._dist.get(x, {}).get(y)

    def _add_bound(self, x, y, c, literal):
        """Record root_x - root_y <= c and close the graph."""
        if x == y:
            if c < 0:
                raise Conflict('I', [literal],
                               '%s contradicts known equalities'
                               % (literal,))
            return False
        self._node(x)
        self._node(y)
        back = self._upper(y, x)
        if back is not None and back + c < 0:
            raise Conflict('I', [literal], '%s contradicts %s' % (
                literal, self._describe(y, x, back)))
        current = self._upper(x, y)
        if current is not None and current <= c:
            return False
        sources = [(i, row[x]) for i, row in self._dist.items() if x in row]
        targets = list(self._dist[y].items())
        for i, d_ix in sources:
            row = self._dist[i]
            for j, d_yj in targets:
                candidate = d_ix + c + d_yj
                known = row.get(j)
                if known is None or candidate < known:
                    row[j] = candidate
        return True

    def _describe(self, x, y, c):
        return str(_bound_literal(x, y, c))

    def _merge(self, x, kx, y, ky, literal):
        """Merge roots with x + kx = y + ky."""
        if x is _CONST:
            x, kx, y, ky = y, ky, x, kx
        # x = y + (ky - kx)
        delta = ky - kx
        if x in self._dist:
            self._add_bound(x, y, delta, literal)
            self._add_bound(y, x, -delta, literal)
            del self._dist[x]
            for row in self._dist.values():
                row.pop(x, None)
        self._parent[x] = (y, delta)

    # Assertion

    def assert_literal(self, literal):
        """
        Add an integer literal.

        Raise Conflict: if the store becomes inconsistent
        """
        self.version += 1
        x, kx = self.canon(literal.lhs)
        y, ky = self.canon(literal.rhs)
        if literal.op == '=':
            if x == y:
                if kx != ky:
                    raise Conflict('I', [literal],
                                   '%s contradicts known equalities'
                                   % (literal,))
            else:
                self._merge(x, kx, y, ky, literal)
        elif literal.op == '!=':
            self._diseqs.append(literal)
        else:
            strict = 1 if literal.op == '<' else 0
            # x + kx <= y + ky - strict
            self._add_bound(x, y, ky - kx - strict, literal)
        self._settle()

    def _settle(self):
        """Merge implied equalities and tighten disequalities."""
        changed = True
        while changed:
            changed = False
            for x, row in list(self._dist.items()):
                for y, c in list(row.items()):
                    if x == y or x not in self._dist or y not in self._dist:
                        continue
                    back = self._upper(y, x)
                    if back is not None and back == -c:
                        # x - y = c
                        literal = _equality_literal(x, y, c)
                        self._implied.append(literal)
                        self._merge(x, 0, y, c, literal)
                        changed = True
                        break
                if changed:
                    break
            if changed:
                continue
            for literal in self._diseqs:
                x, kx = self.canon(literal.lhs)
                y, ky = self.canon(literal.rhs)
                if x == y:
                    if kx == ky:
                        raise Conflict('I', [literal],
                                       '%s contradicts known equalities'
                                       % (literal,))
                    continue
                # l - r = x - y + kx - ky
                upper = self._upper(x, y)
                if upper is not None and upper + kx - ky == 0:
                    # l <= r and l != r, so l < r
                    strict = IntRel('<', literal.lhs, literal.rhs)
                    self._implied.append(strict)
                    self._add_bound(x, y, ky - kx - 1, literal)
                    changed = True
                    break
                lower = self._upper(y, x)
                if lower is not None and lower - kx + ky == 0:
                    strict = IntRel('<', literal.rhs, literal.lhs)
                    self._implied.append(strict)
                    self._add_bound(y, x, kx - ky - 1, literal)
                    changed = True
                    break

    def take_implied(self):
        """Return and forget the literals derived since the last call."""
        implied, self._implied = self._implied, []
        return implied

    # Queries

    def known_relation(self, t1, t2):
        """
        Return EQUAL, DISEQUAL or UNKNOWN for the pair of terms.
        """
        x, kx = self.canon(t1)
        y, ky = self.canon(t2)
        if x == y:
            return EQUAL if kx == ky else DISEQUAL
        upper = self._upper(x, y)
        if upper is not None and upper + kx - ky < 0:
            return DISEQUAL
        lower = self._upper(y, x)
        if lower is not None and lower - kx + ky < 0:
            return DISEQUAL
        for literal in self._diseqs:
            pair = (self.canon(literal.lhs), self.canon(literal.rhs))
            if pair in (((x, kx), (y, ky)), ((y, ky), (x, kx))):
                return DISEQUAL
        return UNKNOWN

    def entails(self, literal):
        """Tell whether *literal* follows from the store."""
        if literal.op == '=':
            return self.known_relation(literal.lhs, literal.rhs) == EQUAL
        if literal.op == '!=':
            return self.known_relation(literal.lhs, literal.rhs) == DISEQUAL
        x, kx = self.canon(literal.lhs)
        y, ky = self.canon(literal.rhs)
        strict = 1 if literal.op == '<' else 0
        if x == y:
            return kx - ky <= -strict
        upper = self._upper(x, y)
        return upper is not None and upper + kx - ky <= -strict

    def refutes(self, literal):
        """Tell whether the negation of *literal* follows from the store."""
        return self.entails(literal.negate())

    def request_splits(self):
        """
        Return case splits ``l < r ∨ r < l`` for the disequalities whose
        sides are not ordered yet.
        """
        for literal in self._diseqs:
            lt = IntRel('<', literal.lhs, literal.rhs)
            gt = IntRel('<', literal.rhs, literal.lhs)
            if not (self.entails(lt) or self.entails(gt)):
                return [(lt, gt)]
        return []

    # Backtracking

    def push(self):
        self._stack.append((dict(self._parent), copy.deepcopy(self._dist),
                            list(self._diseqs), self.version))

    def pop(self):
        self._parent, self._dist, self._diseqs, _ = self._stack.pop()
        self._implied = []
        self.version += 1


def _root_term(root, offset=0):
    if root is _CONST:
        return Term(None, offset)
    return Term(root, offset)


def _bound_literal(x, y, c):
    # x - y <= c
    if c < 0:
        return IntRel('<', _root_term(x), _root_term(y, c + 1))
    return IntRel('<=', _root_term(x), _root_term(y, c))


def _equality_literal(x, y, c):
    return IntRel('=', _root_term(x), _root_term(y, c))


__all__ = ['ArithStore', 'EQUAL', 'DISEQUAL', 'UNKNOWN', 'ZERO']
