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
Satisfiability of VC formulas.

``normalize`` pushes negations down to the literals and eliminates the
negated atoms that have no native negative form.  ``solve`` runs a
depth-first case-splitting search: at every node the arithmetic, heap and
data-structure theories propagate to a fixpoint, then the first open
disjunction (in creation order) is split, first alternative first.  With
no disjunction left the theories are asked for equality splits; when none
remain the branch is satisfiable.
"""

from collections import deque, namedtuple
import logging

from .arith import ArithStore
from .dstruct import RuleEngine
from .formula import (
    And, Conflict, Elem, FormulaError, InDom, IntRel, Not, NotElem, NotInDom,
    Or, Term, Truth, conj, disj, is_literal, neg, FALSE, TRUE
)
from .heap import HEAP_KINDS, HeapStore
from .schema import rewrite_key
from .utils import Deadline, FreshNames

logger = logging.getLogger(__name__)

SAT = 'sat'
UNSAT = 'unsat'
UNKNOWN = 'unknown'

VALID = 'valid'
INVALID = 'invalid'

#: Default number of case splits before giving up.
DEFAULT_BUDGET = 100000


class BudgetExhausted(RuntimeError):

    """
    Raised inside the search when the split budget or the deadline is
    exceeded.  ``solve`` turns it into an UNKNOWN result.
    """

    def __init__(self, reason):
        self.reason = reason

    def __str__(self):
        return self.reason


###############################################################################
# Normalization

def normalize(formula, rewrites, fresh=None):
    """
    Put *formula* in negation normal form without negated atoms.

    Args:
    formula -- a formula over the VC literals
    rewrites -- the RewriteRule list for the schema
    fresh -- the FreshNames supply for rewrite witnesses; a new one is
             used when omitted

    Return: an equisatisfiable formula where negation only appears through
    the native negative literals (≠, ∉, ¬↪)
    Raise FormulaError: when a negated update or difference atom, or a
                        negated chunk of symbolic size, is met
    """
    table = dict((rule.key, rule) for rule in rewrites)
    if fresh is None:
        fresh = FreshNames()

    def negate(literal):
        kind = literal.kind
        if kind == 'int':
            return literal.negate()
        if kind in ('indom', 'notindom', 'elem', 'notelem'):
            return _NATIVE_NEGATION[kind](*literal)
        if kind == 'chunk' and literal.size.var is None:
            return _negate_chunk(literal, fresh)
        rule = table.get(rewrite_key(literal))
        if rule is None:
            raise FormulaError(literal, 'negation cannot be eliminated')
        return rule.apply(literal, fresh)

    def nnf(f, positive):
        if isinstance(f, (And, Or)):
            args = [nnf(a, positive) for a in f.args]
            if isinstance(f, And) == positive:
                return conj(*args)
            return disj(*args)
        if isinstance(f, Not):
            return nnf(f.arg, not positive)
        if isinstance(f, Truth):
            return f if positive else neg(f)
        if positive:
            return f
        return negate(f)

    return nnf(formula, True)


_NATIVE_NEGATION = {'indom': NotInDom, 'notindom': InDom,
                    'elem': NotElem, 'notelem': Elem}


def _negate_chunk(literal, fresh):
    """
    The negation of a chunk of constant size: some cell lies outside the
    block, or some block cell is missing or holds another value.
    """
    heap, addr, size, vals, fill = literal
    length = size.offset
    cell = Term(fresh('s'))
    outside = InDom(heap, cell)
    if length > 0:
        outside = conj(outside, disj(IntRel('<', cell, addr),
                                     IntRel('<', addr + (length - 1), cell)))
    cases = [outside]
    cases.extend(NotInDom(heap, addr + i) for i in range(length))
    cases.extend(NotElem(heap, addr + i, value)
                 for i, value in enumerate(vals))
    if fill is not None:
        value = Term(fresh('v'))
        cases.append(conj(Elem(heap, Term(fresh('s')), value),
                          IntRel('!=', value, fill)))
    return disj(*cases)


###############################################################################
# Trace

class TraceEvent(namedtuple('TraceEvent',
                            ['kind', 'label', 'depth', 'tag', 'text'])):

    """
    One line of a solver trace.

    *kind* is 'assert', 'derive', 'branch', 'conflict', 'sat' or
    'unknown'; *tag* names the theory behind a derivation or conflict.
    """

    __slots__ = ()

    def __str__(self):
        pad = '  ' * self.depth
        tag = ' (%s)' % self.tag if self.tag else ''
        if self.kind == 'conflict':
            return '%s   false%s: %s' % (pad, tag, self.text)
        if self.kind in ('sat', 'unknown'):
            return '%s%s' % (pad, self.text)
        return '%s%s) %s%s' % (pad, self.label, self.text, tag)


class Trace(object):

    """Numbered derivation of one solver run."""

    def __init__(self):
        self.events = []
        self._step = 0

    def next_step(self):
        self._step += 1
        return self._step

    def record(self, kind, depth, text, tag=None, label=None):
        if label is None and kind in ('assert', 'derive'):
            label = str(self.next_step())
        self.events.append(TraceEvent(kind, label, depth, tag, text))

    @property
    def branches(self):
        return [e for e in self.events if e.kind == 'branch']

    @property
    def conflicts(self):
        return [e for e in self.events if e.kind == 'conflict']

    def render(self):
        return '\n'.join(str(e) for e in self.events)


###############################################################################
# Search

class SolveResult(object):

    """
    Outcome of a solver run.

    *literals* is the saturated literal set of the satisfiable branch, or
    empty.  *reason* explains an UNKNOWN status.
    """

    def __init__(self, status, literals=(), decisions=0, elapsed=0.0,
                 trace=None, reason=None):
        self.status = status
        self.literals = tuple(literals)
        self.decisions = decisions
        self.elapsed = elapsed
        self.trace = trace
        self.reason = reason

    def __repr__(self):
        return '<SolveResult %s after %d decisions>' % (self.status,
                                                        self.decisions)


class _Clause(object):

    # Heap case splits (priority 1) come after the formula and data-structure
    # disjunctions (priority 0).
    __slots__ = ('alternatives', 'unit', 'priority')

    def __init__(self, alternatives, unit, priority=0):
        self.alternatives = tuple(alternatives)
        self.unit = unit
        self.priority = priority


class _Frame(object):

    __slots__ = ('alternatives', 'next', 'step')

    def __init__(self, alternatives, step):
        self.alternatives = alternatives
        self.next = 0
        self.step = step


_CONFLICT = object()
_SATISFIED = object()


class _Search(object):

    def __init__(self, rules, budget, deadline, trace):
        self.arith = ArithStore()
        self.heap = HeapStore(self.arith)
        self.dstruct = RuleEngine(rules, self.arith, self.heap)
        self.budget = budget
        self.deadline = deadline
        self.trace = trace
        self.decisions = 0
        self.depth = 0
        self.asserted = []
        self._asserted_set = set()
        self.clauses = []
        self._done = set()
        self._queue = deque()
        self._stack = []

    # State

    def push(self):
        self._stack.append((len(self.asserted), len(self.clauses),
                            set(self._done)))
        self.arith.push()
        self.heap.push()
        self.dstruct.push()
        self.depth += 1

    def pop(self):
        asserted, clauses, done = self._stack.pop()
        for lit in self.asserted[asserted:]:
            self._asserted_set.discard(lit)
        del self.asserted[asserted:]
        del self.clauses[clauses:]
        self._done = done
        self._queue.clear()
        self.arith.pop()
        self.heap.pop()
        self.dstruct.pop()
        self.depth -= 1

    def _theory(self, literal):
        if literal.kind == 'int':
            return self.arith
        if literal.kind in HEAP_KINDS:
            return self.heap
        return self.dstruct

    # Assertion

    def assert_formula(self, formula, unit=True):
        if isinstance(formula, And):
            for arg in formula.args:
                self.assert_formula(arg, unit)
        elif isinstance(formula, Or):
            self.clauses.append(_Clause(formula.args, unit))
        elif isinstance(formula, Truth):
            if not formula.value:
                raise Conflict(None, [], 'false asserted')
        elif is_literal(formula):
            self._queue.append((formula, None))
        else:
            raise FormulaError(formula, 'formula is not normalized')

    def _drain(self):
        while self._queue:
            literal, tag = self._queue.popleft()
            if literal in self._asserted_set:
                continue
            self._asserted_set.add(literal)
            self.asserted.append(literal)
            if tag is not None and self.trace is not None:
                self.trace.record('derive', self.depth, str(literal), tag)
            theory = self._theory(literal)
            if theory is self.arith:
                theory.assert_literal(literal)
            else:
                theory.add(literal)
        if self.trace is not None:
            for literal in self.arith.take_implied():
                if literal not in self._asserted_set:
                    self.trace.record('derive', self.depth, str(literal), 'I')
        else:
            self.arith.take_implied()

    def _enqueue(self, literals, tag):
        added = False
        for literal in literals:
            if literal not in self._asserted_set:
                self._queue.append((literal, tag))
                added = True
        return added

    def propagate(self):
        """Run the theories to a fixpoint.  Raise Conflict."""
        while True:
            self._check_deadline()
            self._drain()
            progress = False
            for tag, theory in (('H', self.heap), ('D', self.dstruct)):
                literals, clauses = theory.propagate()
                for alternatives in clauses:
                    self.clauses.append(_Clause(alternatives, tag != 'D',
                                                int(tag == 'H')))
                    progress = True
                if self._enqueue(literals, tag):
                    progress = True
                    self._drain()
            if self._unit_propagate():
                progress = True
            if not progress:
                return

    # Clause bookkeeping

    def holds(self, formula):
        if isinstance(formula, And):
            return all(self.holds(a) for a in formula.args)
        if isinstance(formula, Or):
            return any(self.holds(a) for a in formula.args)
        if isinstance(formula, Truth):
            return formula.value
        theory = self._theory(formula)
        if theory is self.arith:
            return theory.entails(formula)
        return theory.holds(formula)

    def refuted(self, formula):
        if isinstance(formula, And):
            return any(self.refuted(a) for a in formula.args)
        if isinstance(formula, Or):
            return all(self.refuted(a) for a in formula.args)
        if isinstance(formula, Truth):
            return not formula.value
        return self._theory(formula).refutes(formula)

    def _unit_propagate(self):
        progress = False
        for i, clause in enumerate(self.clauses):
            if i in self._done or not clause.unit:
                continue
            if any(self.holds(a) for a in clause.alternatives):
                self._done.add(i)
                continue
            open_ = [a for a in clause.alternatives if not self.refuted(a)]
            if not open_:
                raise Conflict('H', [], 'every case of %s is refuted' %
                               ' ∨ '.join(str(a) for a in
                                          clause.alternatives))
            if len(open_) == 1:
                self._done.add(i)
                if self.trace is not None:
                    self.trace.record('derive', self.depth, str(open_[0]),
                                      'H')
                self.assert_formula(open_[0])
                self._drain()
                progress = True
        return progress

    def next_clause(self):
        for priority in (0, 1):
            for i, clause in enumerate(self.clauses):
                if i in self._done or clause.priority != priority:
                    continue
                if any(self.holds(a) for a in clause.alternatives):
                    self._done.add(i)
                    continue
                self._done.add(i)
                return clause.alternatives
        return None

    # Budget

    def _check_deadline(self):
        if self.deadline.expired():
            raise BudgetExhausted('timeout after %.1fs' %
                                  self.deadline.elapsed)

    def _check_budget(self):
        if self.decisions > self.budget:
            raise BudgetExhausted('split budget of %d exhausted' %
                                  self.budget)
        self._check_deadline()

    # Search

    def _conflict(self, conflict):
        if self.trace is not None:
            self.trace.record('conflict', self.depth, conflict.reason,
                              conflict.tag)

    def _step(self):
        """Propagate, then pick the next case split."""
        try:
            self.propagate()
        except Conflict as conflict:
            self._conflict(conflict)
            return _CONFLICT
        alternatives = self.next_clause()
        if alternatives is None:
            splits = self.heap.request_splits() or self.arith.request_splits()
            if not splits:
                return _SATISFIED
            alternatives = splits[0]
        return alternatives

    def _try(self, frame):
        alternative = frame.alternatives[frame.next]
        letter = frame.next
        frame.next += 1
        self.decisions += 1
        self._check_budget()
        if self.trace is not None:
            self.trace.record('branch', self.depth - 1, str(alternative),
                              label='%d%s' % (frame.step, _letter(letter)))
        try:
            self.assert_formula(alternative)
        except Conflict as conflict:
            self._conflict(conflict)
            return _CONFLICT
        return self._step()

    def run(self, formula):
        frames = []
        try:
            self.assert_formula(formula)
        except Conflict as conflict:
            self._conflict(conflict)
            return UNSAT
        if self.trace is not None:
            self.trace.record('assert', 0, '{%s}' % ', '.join(
                str(lit) for lit, _ in self._queue))
        outcome = self._step()
        while True:
            if outcome is _SATISFIED:
                return SAT
            if outcome is _CONFLICT:
                outcome = None
                while frames:
                    self.pop()
                    frame = frames[-1]
                    if frame.next < len(frame.alternatives):
                        self.push()
                        outcome = self._try(frame)
                        break
                    frames.pop()
                if outcome is None:
                    return UNSAT
                continue
            step = self.trace.next_step() if self.trace is not None else 0
            frame = _Frame(outcome, step)
            frames.append(frame)
            self.push()
            outcome = self._try(frame)


def _letter(index):
    letters = 'abcdefghijklmnopqrstuvwxyz'
    if index < len(letters):
        return letters[index]
    return '_%d' % index


def solve(formula, rules, budget=DEFAULT_BUDGET, timeout=None, trace=False):
    """
    Decide the satisfiability of a normalized formula.

    Args:
    formula -- the output of normalize
    rules -- the DRule list of the schema
    budget -- the maximal number of case splits
    timeout -- wall-clock seconds, or None
    trace -- record a numbered derivation in the result

    Return: a SolveResult with status SAT, UNSAT or UNKNOWN
    """
    deadline = Deadline(timeout)
    search = _Search(rules, budget, deadline,
                     Trace() if trace else None)
    try:
        status = search.run(formula)
        reason = None
    except BudgetExhausted as exc:
        status = UNKNOWN
        reason = exc.reason
        if search.trace is not None:
            search.trace.record('unknown', 0, 'unknown: %s' % reason)
    if search.trace is not None and status != UNKNOWN:
        search.trace.record(status, 0, status)
    literals = search.asserted if status == SAT else ()
    logger.debug('solve: %s after %d decisions in %.3fs', status,
                 search.decisions, deadline.elapsed)
    return SolveResult(status, literals, search.decisions, deadline.elapsed,
                       search.trace, reason)


###############################################################################
# Validity of verification conditions

class ValidityResult(object):

    """
    Verdict on one verification condition.

    *status* is VALID, INVALID or UNKNOWN; an INVALID verdict carries the
    literal set of the counterexample branch in *diagnostics*.
    """

    def __init__(self, vc, status, solve_result):
        self.vc = vc
        self.status = status
        self.solve_result = solve_result

    @property
    def diagnostics(self):
        return self.solve_result.literals

    @property
    def trace(self):
        return self.solve_result.trace

    def __repr__(self):
        return '<ValidityResult %s %s>' % (self.status, self.vc)


def vc_formula(vc, rewrites):
    """The formula W ∧ path ∧ ¬post whose unsatisfiability proves *vc*."""
    return normalize(conj(vc.witness, vc.path, neg(vc.post)), rewrites,
                     FreshNames())


def check_validity(vc, rules, rewrites, budget=DEFAULT_BUDGET, timeout=None,
                   trace=False):
    """
    Decide a verification condition.

    Args:
    vc -- a VerificationCondition
    rules -- the DRule list of the schema
    rewrites -- the RewriteRule list of the schema
    budget -- the maximal number of case splits
    timeout -- wall-clock seconds, or None

    Return: a ValidityResult; VALID iff W ∧ path ∧ ¬post is unsatisfiable
    """
    result = solve(vc_formula(vc, rewrites), rules, budget=budget,
                   timeout=timeout, trace=trace)
    status = {UNSAT: VALID, SAT: INVALID}.get(result.status, UNKNOWN)
    if status == UNKNOWN:
        logger.warning('%s: %s', vc.describe(), result.reason)
    else:
        logger.debug('%s: %s', vc.describe(), status)
    return ValidityResult(vc, status, result)


__all__ = ['normalize', 'solve', 'check_validity', 'SolveResult',
           'ValidityResult', 'BudgetExhausted', 'Trace', 'TRUE', 'FALSE',
           'SAT', 'UNSAT', 'UNKNOWN', 'VALID', 'INVALID']
