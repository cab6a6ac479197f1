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
Verification condition generation.

A function body is cut at its entry, its exit and every loop header.  The
paths between two cut-points are straight-line segments; each one is
executed symbolically with fresh names instead of substitution, starting
from the data-structure integrity constraint of the live pointers at its
first cut-point.  Each segment yields a D-preservation condition (the
constraint holds again at the last cut-point) and each heap access a
memory-safety condition (the address is outside the context heap).
"""

from collections import namedtuple
import logging

from .formula import (
    Chunk, Diff, DomSub, Elem, Heq, InDom, IntRel, Node, NotInDom, SubHeap,
    Term, Closed, Update, FALSE, TRUE, conj, disj, neg
)
from .frontend import (
    Abort, Assign, Call, CondAnd, CondNot, CondOr, Compare, If, Load, Malloc,
    Return, Seq, Skip, Store, While, flatten, is_record_pointer, is_temporary,
    walk_ir
)
from .utils import unique, versioned

logger = logging.getLogger(__name__)

MALLOC = 'malloc'
ZMALLOC = 'zmalloc'
MODES = (MALLOC, ZMALLOC)

DPRESERVE = 'dpreserve'
MEMSAFETY = 'memsafety'

ENTRY = 'entry'
LOOP = 'loop'
EXIT = 'exit'
CALL = 'call'

#: Name of the symbolic return value.
RETURN_VAR = '$ret'

HEAP = 'H'
FOOTPRINT = 'Hf'
CONTEXT = 'Hc'
EMPTY = 'E'


###############################################################################
# Cut-points and segments

class CutPoint(namedtuple('CutPoint', ['kind', 'index', 'pos'])):

    """
    A program point where the integrity constraint is assumed and checked.

    *index* numbers the loop headers in source order; it is None for the
    entry and the exit.
    """

    __slots__ = ()

    def __str__(self):
        if self.kind == LOOP:
            if self.pos is not None:
                return 'loop@%d:%d' % self.pos
            return 'loop#%d' % self.index
        return self.kind


class Assume(namedtuple('Assume', ['cond', 'pos'])):

    """A branch condition taken by a segment."""

    __slots__ = ()


class _LoopEnd(namedtuple('_LoopEnd', ['index'])):

    __slots__ = ()


class Segment(object):

    """
    A branch-free path between two cut-points.

    *steps* are the IR statements executed along the path, interleaved with
    the Assume steps of the branches taken.  *live_start* and *live_end*
    name the pointer variables required to be valid nodes at the two ends.
    """

    def __init__(self, function, start, end, steps):
        self.function = function
        self.start = start
        self.end = end
        self.steps = tuple(steps)
        self.live_start = ()
        self.live_end = ()

    @property
    def guards(self):
        return tuple(step.cond for step in self.steps
                     if isinstance(step, Assume))

    @property
    def stmts(self):
        return tuple(step for step in self.steps
                     if not isinstance(step, Assume))

    def __repr__(self):
        return '<Segment %s: %s -> %s>' % (self.function.name, self.start,
                                           self.end)


def _loops(func):
    return [s for s in walk_ir(func.body) if isinstance(s, While)]


def select_cutpoints(func):
    """
    Return the cut-points of a lowered function: the entry, every loop
    header in source order and the exit.
    """
    loops = [CutPoint(LOOP, i, loop.pos)
             for i, loop in enumerate(_loops(func))]
    return tuple([CutPoint(ENTRY, None, func.pos)] + loops +
                 [CutPoint(EXIT, None, None)])


def enumerate_segments(func, cuts=None):
    """
    Split a lowered function into its cut-point to cut-point paths.

    Args:
    func -- a lowered FuncDecl
    cuts -- the cut-points of select_cutpoints, computed when omitted

    Return: the list of Segment in a deterministic order; the live pointer
    sets of their ends are filled in
    """
    if cuts is None:
        cuts = select_cutpoints(func)
    entry, exit_ = cuts[0], cuts[-1]
    headers = dict((id(loop), i) for i, loop in enumerate(_loops(func)))
    points = dict((cut.index, cut) for cut in cuts if cut.kind == LOOP)
    pending = [(entry, tuple(flatten(func.body)), ())]
    scheduled = set()
    segments = []

    while pending:
        start, work, steps = pending.pop(0)
        stack = [(work, steps)]
        while stack:
            work, steps = stack.pop()
            if not work:
                segments.append(Segment(func, start, exit_, steps))
                continue
            stmt, rest = work[0], work[1:]
            if isinstance(stmt, If):
                orelse = tuple(flatten(stmt.orelse)) + rest
                then = tuple(flatten(stmt.then)) + rest
                stack.append((orelse, steps + (Assume(CondNot(stmt.cond),
                                                      stmt.pos),)))
                stack.append((then, steps + (Assume(stmt.cond, stmt.pos),)))
            elif isinstance(stmt, While):
                index = headers[id(stmt)]
                segments.append(Segment(func, start, points[index], steps))
                if index not in scheduled:
                    scheduled.add(index)
                    body = tuple(flatten(stmt.body)) + (_LoopEnd(index),)
                    pending.append((points[index], body,
                                    (Assume(stmt.cond, stmt.pos),)))
                    pending.append((points[index], rest,
                                    (Assume(CondNot(stmt.cond), stmt.pos),)))
            elif isinstance(stmt, _LoopEnd):
                segments.append(Segment(func, start, points[stmt.index],
                                        steps))
            elif isinstance(stmt, (Return, Abort)):
                segments.append(Segment(func, start, exit_, steps + (stmt,)))
            else:
                stack.append((rest, steps + (stmt,)))
    _annotate_live(func, cuts, segments)
    logger.debug('%s: %d cut-points, %d segments', func.name, len(cuts),
                 len(segments))
    return segments


def _assigned(segment):
    for stmt in segment.stmts:
        if isinstance(stmt, (Assign, Load, Malloc)):
            yield stmt.target
        elif isinstance(stmt, Call) and stmt.target is not None:
            yield stmt.target


def _pointer_vars(func):
    return [name for name, kind in func.params + func.locals
            if is_record_pointer(kind) and not is_temporary(name)]


def _annotate_live(func, cuts, segments):
    """
    Live pointers at a cut-point: the pointer parameters and the pointer
    locals assigned on every path reaching it.  At the exit, the returned
    pointer.
    """
    pointers = _pointer_vars(func)
    params = set(name for name, kind in func.params
                 if is_record_pointer(kind))
    entry = cuts[0]
    assigned = {entry: params}
    changed = True
    while changed:
        changed = False
        incoming = {}
        for segment in segments:
            if segment.start not in assigned or segment.end == entry:
                continue
            out = assigned[segment.start] | set(_assigned(segment))
            if segment.end in incoming:
                incoming[segment.end] &= out
            else:
                incoming[segment.end] = out
        for point, names in incoming.items():
            if assigned.get(point) != names:
                assigned[point] = names
                changed = True
    live = {}
    for point in cuts:
        if point.kind == EXIT:
            live[point] = ((RETURN_VAR,) if is_record_pointer(func.ret)
                           else ())
        else:
            names = assigned.get(point, set())
            live[point] = tuple(name for name in pointers if name in names)
    for segment in segments:
        segment.live_start = live[segment.start]
        segment.live_end = live[segment.end]


def live_pointer_vars(func):
    """
    Map every reachable cut-point of *func* to the names of the pointers
    that must be valid nodes there.
    """
    live = {}
    for segment in enumerate_segments(func):
        live[segment.start] = segment.live_start
        live[segment.end] = segment.live_end
    return live


###############################################################################
# Integrity constraints

def chain_heaps(schema, version=0):
    """
    The heaps of the field partition of *version*: the field heaps in
    schema order followed by the intermediate unions of the chain.

    Return: a list of (name, fields) pairs where *fields* are the
    FieldInfo whose cells the heap holds
    """
    fields = schema.fields
    heaps = [(versioned(f.heap, version), (f,)) for f in fields]
    for j in range(2, len(fields)):
        heaps.append((versioned('I_%d' % j, version), tuple(fields[:j])))
    return heaps


def _chain(schema, footprint, version):
    names = [versioned(h, version) for h in schema.heaps]
    if not names:
        return TRUE
    if len(names) == 1:
        return conj(Heq(footprint, names[0], EMPTY), Chunk(EMPTY, 1, 0))
    parts = []
    acc = names[0]
    for j in range(1, len(names)):
        if j == len(names) - 1:
            target = footprint
        else:
            target = versioned('I_%d' % (j + 1), version)
        parts.append(Heq(target, acc, names[j]))
        acc = target
    return conj(*reversed(parts))


def build_dsic(schema, live_ptrs, heap=FOOTPRINT, version=0):
    """
    The integrity constraint of *heap*: it is partitioned into the field
    heaps, the pointer fields are closed and the live pointers are nodes.

    Args:
    schema -- the TypeSchema
    live_ptrs -- (term, node type name) pairs
    heap -- the name of the partitioned heap
    version -- the version of the field heap names
    """
    fields = [versioned(h, version) for h in schema.heaps]
    return conj(_chain(schema, heap, version), Closed(fields),
                *[Node(type_name, term, fields)
                  for term, type_name in live_ptrs])


def build_dsic_m(schema, live_ptrs, heap=HEAP, version=0):
    """
    The integrity constraint of the footprint part of *heap*, the rest of
    which is the context heap.
    """
    footprint = versioned(FOOTPRINT, version)
    return conj(Heq(heap, footprint, CONTEXT),
                build_dsic(schema, live_ptrs, footprint, version))


###############################################################################
# Symbolic execution

Alloc = namedtuple('Alloc', ['addr', 'size', 'type'])


class SymState(object):

    """
    The symbolic state along a segment.

    Args:
    function -- the lowered FuncDecl being executed
    schema -- the TypeSchema
    mode -- MALLOC or ZMALLOC
    functions -- the lowered functions of the program, by name, for calls
    live -- the pointer variables assumed to be nodes at the start
    """

    def __init__(self, function, schema, mode=MALLOC, functions=None,
                 live=()):
        if mode not in MODES:
            raise ValueError('unknown allocation mode %r' % (mode,))
        self.function = function
        self.schema = schema
        self.mode = mode
        self.functions = functions or {}
        self.live = tuple(live)
        self.versions = {}
        self.heap_version = 0
        self.blocks = 0
        self.epoch = 0
        self.allocs = []
        self.assigned = []

    def copy(self):
        other = SymState.__new__(SymState)
        other.__dict__.update(self.__dict__)
        other.versions = dict(self.versions)
        other.allocs = list(self.allocs)
        other.assigned = list(self.assigned)
        return other

    @property
    def heap(self):
        return versioned(HEAP, self.heap_version)

    @property
    def var_map(self):
        return dict((var, versioned(var, k))
                    for var, k in self.versions.items())

    def current(self, var):
        return Term(versioned(var, self.versions.get(var, 0)))

    def term(self, term):
        """Rename the variable of a program term to its current version."""
        if term.var is None:
            return term
        return self.current(term.var) + term.offset

    def define(self, var):
        self.versions[var] = self.versions.get(var, 0) + 1
        if var not in self.assigned:
            self.assigned.append(var)
        return self.current(var)

    def new_heap(self):
        self.heap_version += 1
        return self.heap

    def new_block(self):
        self.blocks += 1
        return 'N_%d' % self.blocks

    def live_pointers(self):
        """
        The pointers required to be nodes now: the live pointers of the
        start and the pointer variables assigned since.
        """
        result = []
        for name, kind in self.function.params + self.function.locals:
            if not is_record_pointer(kind) or is_temporary(name):
                continue
            if name in self.live or name in self.assigned:
                result.append((self.current(name), kind.record))
        return result

    def pointer_args(self, call):
        callee = self.functions[call.func]
        result = []
        for arg, (_, kind) in zip(call.args, callee.params):
            if is_record_pointer(kind):
                result.append((self.term(arg), kind.record))
        return result


def cond_formula(cond, state):
    """Translate an IR condition over the current variable versions."""
    if isinstance(cond, Compare):
        return IntRel(cond.op, state.term(cond.lhs), state.term(cond.rhs))
    if isinstance(cond, CondAnd):
        return conj(cond_formula(cond.left, state),
                    cond_formula(cond.right, state))
    if isinstance(cond, CondOr):
        return disj(cond_formula(cond.left, state),
                    cond_formula(cond.right, state))
    return neg(cond_formula(cond.operand, state))


def _havoc_call(stmt, state):
    schema = state.schema
    callee = state.functions[stmt.func]
    nodes = list(unique(state.live_pointers() + state.pointer_args(stmt)))
    old = chain_heaps(schema, state.epoch)
    state.epoch += 1
    new = chain_heaps(schema, state.epoch)
    heap = state.new_heap()
    parts = [build_dsic_m(schema, nodes, heap, state.epoch)]
    parts.extend(DomSub(x, y) for (x, _), (y, _) in zip(old, new))
    state.allocs = []
    if stmt.target is not None:
        result = state.define(stmt.target)
        if is_record_pointer(callee.ret):
            fields = [versioned(h, state.epoch) for h in schema.heaps]
            parts.append(Node(callee.ret.record, result, fields))
    return conj(*parts)


def _step_formula(stmt, state):
    if isinstance(stmt, Assume):
        return cond_formula(stmt.cond, state)
    if isinstance(stmt, Assign):
        value = state.term(stmt.value)
        return IntRel('=', state.define(stmt.target), value)
    if isinstance(stmt, Load):
        addr = state.term(stmt.addr)
        return Elem(state.heap, addr, state.define(stmt.target))
    if isinstance(stmt, Store):
        addr = state.term(stmt.addr)
        value = state.term(stmt.value)
        old = state.heap
        return Update(old, addr, value, state.new_heap())
    if isinstance(stmt, Malloc):
        size = state.term(stmt.count)
        old = state.heap
        block = state.new_block()
        heap = state.new_heap()
        addr = state.define(stmt.target)
        fill = 0 if state.mode == ZMALLOC else None
        state.allocs.append(Alloc(addr, size, stmt.type))
        return conj(Heq(heap, block, old), Chunk(block, addr, size, fill=fill),
                    IntRel('<', 0, addr))
    if isinstance(stmt, Abort):
        return FALSE
    if isinstance(stmt, Return):
        if stmt.value is None:
            return TRUE
        return IntRel('=', Term(RETURN_VAR), state.term(stmt.value))
    if isinstance(stmt, Call):
        return _havoc_call(stmt, state)
    if isinstance(stmt, Skip):
        return TRUE
    raise ValueError('%s is not a straight-line statement' %
                     stmt.__class__.__name__)


def sp(stmt, phi, state):
    """
    Strongest postcondition of a branch-free statement.

    Args:
    stmt -- an IR statement without If or While, or an Assume step
    phi -- the formula holding before
    state -- the SymState before; it is not modified

    Return: (formula, state) after the statement
    Raise ValueError: for a branching statement
    """
    if isinstance(stmt, Seq):
        phi, state = sp(stmt.first, phi, state)
        return sp(stmt.second, phi, state)
    state = state.copy()
    return conj(phi, _step_formula(stmt, state)), state


###############################################################################
# Witnesses

def _alloc_cells(allocs, fields, schema):
    """
    Split the cells of *fields* in the allocated nodes into the ones
    certainly allocated and the ones depending on a symbolic size.
    """
    certain = []
    guarded = []
    for alloc in allocs:
        if alloc.type is None:
            continue
        for info in schema.node_type(alloc.type).fields:
            if info not in fields:
                continue
            cell = alloc.addr + info.offset
            if alloc.size.var is None:
                # Cells past a constant size were never allocated.
                if info.offset < alloc.size.offset:
                    certain.append(cell)
            else:
                guarded.append(cell)
    return certain, guarded


def generate_witness(state, schema):
    """
    Instantiate the post-state field heaps of a DPreserve condition.

    The new footprint is the final heap minus the context.  Every new
    partition heap is a sub-heap of it, keeps the domain of the old heap
    and gains the cells allocated for its fields, and nothing else.

    Args:
    state -- the SymState at the end of the path
    schema -- the TypeSchema

    Return: the witness formula
    """
    post = state.epoch + 1
    footprint = versioned(FOOTPRINT, post)
    parts = [Diff(state.heap, CONTEXT, footprint)]
    old = chain_heaps(schema, state.epoch)
    new = chain_heaps(schema, post)
    for (heap, fields), (heap_new, _) in zip(old, new):
        parts.append(SubHeap(heap_new, footprint))
        parts.append(DomSub(heap, heap_new))
        certain, guarded = _alloc_cells(state.allocs, fields, schema)
        parts.extend(InDom(heap_new, cell) for cell in certain)
        parts.extend(disj(NotInDom(footprint, cell), InDom(heap_new, cell))
                     for cell in guarded)
        if guarded:
            # The cells of a short block may belong to the old footprint.
            continue
        if not certain:
            parts.append(DomSub(heap_new, heap))
            continue
        union = heap
        for i, cell in enumerate(certain, 1):
            single = 'C_%s_%d' % (heap, i)
            grown = 'U_%s_%d' % (heap, i)
            parts.append(Chunk(single, cell, 1))
            parts.append(Heq(grown, union, single))
            union = grown
        parts.append(DomSub(heap_new, union))
    return conj(*parts)


###############################################################################
# Verification conditions

class VerificationCondition(object):

    """
    An entailment ``witness ∧ path ⟹ post``, proven by refuting
    ``witness ∧ path ∧ ¬post``.

    *kind* is DPRESERVE or MEMSAFETY.  A memory-safety condition also
    carries the accessed *address*, the *access* ('read' or 'write') and
    the IR statement.
    """

    def __init__(self, kind, function, path, post, witness=TRUE, pos=None,
                 start=None, end=None, address=None, access=None,
                 stmt=None):
        self.kind = kind
        self.function = function
        self.path = path
        self.post = post
        self.witness = witness
        self.pos = pos
        self.start = start
        self.end = end
        self.address = address
        self.access = access
        self.stmt = stmt

    @property
    def location(self):
        if self.pos is None:
            return '-'
        return '%d:%d' % self.pos

    def describe(self):
        if self.kind == MEMSAFETY:
            return '%s: %s of %s at %s' % (self.function, self.access,
                                           self.address, self.location)
        return '%s: D-preserve %s -> %s' % (self.function, self.start,
                                            self.end)

    def __str__(self):
        lines = ['[%s] %s' % (self.kind, self.describe())]
        if self.witness != TRUE:
            lines.append('  witness: %s' % (self.witness,))
        lines.append('  path: %s' % (self.path,))
        lines.append('  post: %s' % (self.post,))
        return '\n'.join(lines)

    def __repr__(self):
        return '<VerificationCondition %s>' % self.describe()


def _post_live(segment, state):
    if segment.end.kind == EXIT:
        func = segment.function
        if segment.live_end:
            return [(Term(RETURN_VAR), func.ret.record)]
        return []
    kinds = dict(segment.function.params + segment.function.locals)
    return [(state.current(name), kinds[name].record)
            for name in segment.live_end]


def build_vcs(segment, schema, mode=MALLOC, functions=None):
    """
    Build the verification conditions of one segment.

    Args:
    segment -- a Segment of enumerate_segments
    schema -- the TypeSchema
    mode -- MALLOC (fresh cells unconstrained) or ZMALLOC (fresh cells 0)
    functions -- the lowered functions by name, needed for calls

    Return: the DPreserve conditions (one per call and one for the end
    cut-point) followed by one MemSafety condition per heap access
    """
    func = segment.function
    state = SymState(func, schema, mode, functions, segment.live_start)
    phi = build_dsic_m(schema, state.live_pointers())
    preserve = []
    accesses = []
    for step in segment.steps:
        if isinstance(step, Call):
            nodes = list(unique(state.live_pointers() +
                                state.pointer_args(step)))
            post = build_dsic_m(schema, nodes, state.heap, state.epoch + 1)
            preserve.append(VerificationCondition(
                DPRESERVE, func.name, phi, post,
                generate_witness(state, schema), step.pos, segment.start,
                CutPoint(CALL, None, step.pos)))
        before = state
        phi, state = sp(step, phi, state)
        if isinstance(step, (Load, Store)):
            addr = before.term(step.addr)
            accesses.append(VerificationCondition(
                MEMSAFETY, func.name, phi, NotInDom(CONTEXT, addr),
                pos=step.pos, start=segment.start, end=segment.end,
                address=addr,
                access='read' if isinstance(step, Load) else 'write',
                stmt=step))
    post = build_dsic_m(schema, _post_live(segment, state), state.heap,
                        state.epoch + 1)
    preserve.append(VerificationCondition(
        DPRESERVE, func.name, phi, post, generate_witness(state, schema),
        segment.end.pos, segment.start, segment.end))
    return preserve + accesses


def _merge_accesses(vcs):
    """
    One MemSafety condition per access statement.  An access reached by
    several segments gets the disjunction of their paths, each binding
    the accessed address to a common variable.
    """
    groups = []
    by_stmt = {}
    for vc in vcs:
        key = id(vc.stmt)
        if key not in by_stmt:
            by_stmt[key] = []
            groups.append(by_stmt[key])
        by_stmt[key].append(vc)
    merged = []
    for group in groups:
        first = group[0]
        if len(group) == 1:
            merged.append(first)
            continue
        addr = Term('$addr')
        path = disj(*[conj(vc.path, IntRel('=', addr, vc.address))
                      for vc in group])
        merged.append(VerificationCondition(
            MEMSAFETY, first.function, path, NotInDom(CONTEXT, addr),
            pos=first.pos, start=first.start, end=first.end, address=addr,
            access=first.access, stmt=first.stmt))
    return merged


def function_vcs(func, schema, mode=MALLOC, functions=None):
    """
    All verification conditions of a lowered function: the DPreserve
    conditions segment by segment, then one MemSafety condition per heap
    access in the order the accesses are reached.
    """
    preserve = []
    accesses = []
    for segment in enumerate_segments(func):
        for vc in build_vcs(segment, schema, mode, functions):
            (accesses if vc.kind == MEMSAFETY else preserve).append(vc)
    accesses = _merge_accesses(accesses)
    logger.debug('%s: %d DPreserve and %d MemSafety conditions', func.name,
                 len(preserve), len(accesses))
    return preserve + accesses


def generate_vcs(prog, schema, mode=MALLOC, only=None):
    """
    Generate the verification conditions of a lowered program.

    Args:
    prog -- a lowered Program
    schema -- its TypeSchema
    mode -- MALLOC or ZMALLOC
    only -- a collection of function names to restrict the analysis to

    Return: a dict mapping function names, in source order, to their
    condition lists
    """
    functions = dict((f.name, f) for f in prog.functions)
    result = {}
    for func in prog.functions:
        if only is not None and func.name not in only:
            continue
        result[func.name] = function_vcs(func, schema, mode, functions)
    return result


__all__ = ['select_cutpoints', 'enumerate_segments', 'live_pointer_vars',
           'sp', 'build_dsic', 'build_dsic_m', 'generate_witness',
           'build_vcs', 'function_vcs', 'generate_vcs',
           'CutPoint', 'Segment', 'SymState', 'VerificationCondition',
           'MALLOC', 'ZMALLOC', 'DPRESERVE', 'MEMSAFETY']
