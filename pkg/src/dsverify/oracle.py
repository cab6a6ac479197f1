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
Ground truth for the analyzer.

 * ``enumerate_models`` decides normalized formulas by exhaustive search
   over small heaps, evaluating every literal by its set semantics.
 * ``interpret`` runs a lowered function on concrete values, with a
   concrete word memory where every block is followed by an unmapped
   guard word.
 * ``check_integrity`` evaluates the data-structure integrity constraint
   on a concrete memory, partitioning the allocated blocks by their
   allocation type.
"""

from collections import namedtuple
import itertools
import logging
import operator

from .formula import (
    And, FormulaError, Not, Or, Truth, heap_vars, int_vars, literals
)
from .frontend import (
    Abort, Assign, Call, CondAnd, CondNot, CondOr, Compare, If, Load, Malloc,
    Return, Skip, Store, While, flatten, is_record_pointer
)
from .vcgen import (
    ENTRY, EXIT, MALLOC, RETURN_VAR, ZMALLOC, _loops, live_pointer_vars,
    select_cutpoints
)

logger = logging.getLogger(__name__)


class BoundsError(ValueError):

    """
    Exception raised when a formula does not fit the search bounds.
    """

    def __init__(self, message, size=None):
        self.message = message
        self.size = size

    def __str__(self):
        if self.size is None:
            return self.message
        return '%s (%d)' % (self.message, self.size)


class RuntimeFault(RuntimeError):

    """
    A concrete execution fault.

    *kind* is 'unmapped' for an access outside every mapped word, 'abort'
    and 'step-limit'.  *snapshots* holds the cut-point states reached
    before the fault.
    """

    def __init__(self, kind, address=None, pos=None, function=None):
        self.kind = kind
        self.address = address
        self.pos = pos
        self.function = function
        self.snapshots = []

    def __str__(self):
        where = ''
        if self.function is not None:
            where = ' in %s' % self.function
        if self.pos is not None:
            where += ' at %d:%d' % self.pos
        if self.address is not None:
            return '%s access to %d%s' % (self.kind, self.address, where)
        return '%s%s' % (self.kind, where)


###############################################################################
# Bounded model enumeration

class Bounds(namedtuple('Bounds', ['max_addr', 'max_heaps', 'max_ints',
                                   'max_cubes'])):

    """
    Search bounds: heap domains are subsets of 1..max_addr and integer
    variables range over -max_addr..max_addr.
    """

    __slots__ = ()

    def __new__(cls, max_addr=4, max_heaps=3, max_ints=6, max_cubes=4096):
        if max_addr < 1:
            raise BoundsError('the address bound must be positive', max_addr)
        return super(Bounds, cls).__new__(cls, max_addr, max_heaps, max_ints,
                                          max_cubes)

    @property
    def addresses(self):
        return range(1, self.max_addr + 1)

    @property
    def values(self):
        """The integer window, small magnitudes first."""
        result = [0]
        for k in range(1, self.max_addr + 1):
            result.extend((k, -k))
        return result


DEFAULT_BOUNDS = Bounds()

# Integer assignments tried at most, across all variables.
_MAX_INT_SPACE = 10 ** 7


class Model(object):

    """An assignment of integers to variables and finite maps to heaps."""

    def __init__(self, ints, heaps):
        self.ints = dict(ints)
        self.heaps = dict((name, dict(cells)) for name, cells in heaps.items())

    def value(self, term):
        if term.var is None:
            return term.offset
        return self.ints[term.var] + term.offset

    def heap(self, name):
        return self.heaps.get(name, {})

    def __repr__(self):
        return '<Model %r %r>' % (self.ints, self.heaps)


_RELATIONS = {
    '=': operator.eq,
    '!=': operator.ne,
    '<': operator.lt,
    '<=': operator.le,
}


def _is_node(schema, type_name, addr, field_heaps):
    if addr == 0:
        return True
    return all(addr + f.offset in field_heaps[schema.field_index(f)]
               for f in schema.node_type(type_name).fields)


def _closed(schema, field_heaps):
    for info in schema.ptr_fields:
        heap = field_heaps[schema.field_index(info)]
        for value in heap.values():
            if not _is_node(schema, info.target, value, field_heaps):
                return False
    return True


def holds(literal, model, schema=None):
    """
    Evaluate a literal in a model.

    Raise ValueError: for a closed or node atom without a schema
    """
    kind = literal.kind
    value = model.value
    heap = model.heap
    if kind == 'int':
        return _RELATIONS[literal.op](value(literal.lhs), value(literal.rhs))
    if kind in ('elem', 'notelem'):
        cells = heap(literal.heap)
        addr = value(literal.addr)
        found = addr in cells and cells[addr] == value(literal.val)
        return found if kind == 'elem' else not found
    if kind in ('indom', 'notindom'):
        found = value(literal.addr) in heap(literal.heap)
        return found if kind == 'indom' else not found
    if kind == 'heq':
        left, right = heap(literal.left), heap(literal.right)
        if set(left) & set(right):
            return False
        union = dict(left)
        union.update(right)
        return heap(literal.heap) == union
    if kind == 'diff':
        whole, context = heap(literal.heap), heap(literal.context)
        rest = dict((a, v) for a, v in whole.items() if a not in context)
        return heap(literal.footprint) == rest
    if kind == 'subheap':
        whole = heap(literal.heap)
        return all(a in whole and whole[a] == v
                   for a, v in heap(literal.sub).items())
    if kind == 'domsub':
        return set(heap(literal.sub)) <= set(heap(literal.sup))
    if kind == 'update':
        old = heap(literal.heap)
        addr = value(literal.addr)
        if addr not in old:
            return False
        new = dict(old)
        new[addr] = value(literal.val)
        return heap(literal.result) == new
    if kind == 'chunk':
        cells = heap(literal.heap)
        start, size = value(literal.addr), value(literal.size)
        if set(cells) != set(range(start, start + max(size, 0))):
            return False
        if len(literal.vals) > max(size, 0):
            return False
        for i, v in enumerate(literal.vals):
            if cells[start + i] != value(v):
                return False
        if literal.fill is not None:
            fill = value(literal.fill)
            return all(v == fill for v in cells.values())
        return True
    if schema is None:
        raise ValueError('%s needs a type schema' % kind)
    field_heaps = [heap(name) for name in literal.fields]
    if kind == 'closed':
        return _closed(schema, field_heaps)
    return _is_node(schema, literal.type, value(literal.addr), field_heaps)


def evaluate(formula, model, schema=None):
    """Evaluate a formula in a model by direct semantics."""
    if isinstance(formula, Truth):
        return formula.value
    if isinstance(formula, And):
        return all(evaluate(a, model, schema) for a in formula.args)
    if isinstance(formula, Or):
        return any(evaluate(a, model, schema) for a in formula.args)
    if isinstance(formula, Not):
        return not evaluate(formula.arg, model, schema)
    return holds(formula, model, schema)


def _cubes(formula):
    """Yield the conjunctions of literals of the disjunctive normal form."""
    if isinstance(formula, Truth):
        if formula.value:
            yield ()
    elif isinstance(formula, And):
        for cube in _product(formula.args):
            yield cube
    elif isinstance(formula, Or):
        for arg in formula.args:
            for cube in _cubes(arg):
                yield cube
    elif isinstance(formula, Not):
        raise FormulaError(formula, 'formula is not normalized')
    else:
        yield (formula,)


def _product(args):
    if not args:
        yield ()
        return
    for head in _cubes(args[0]):
        for tail in _product(args[1:]):
            yield head + tail


def _term_vars(literal):
    return set(t.var for t in literal.terms() if t.var is not None)


def _int_assignments(variables, relations, bounds, fixed=None):
    """
    Yield the assignments of *variables* satisfying the int literals.
    The assignments extend *fixed*, which the literals may also refer to.
    """
    position = dict((var, i) for i, var in enumerate(variables))
    checks = [[] for _ in variables]
    ints = dict(fixed or {})
    model = Model({}, {})
    model.ints = ints
    for lit in relations:
        used = [position[v] for v in _term_vars(lit) if v in position]
        if not used:
            if not holds(lit, model):
                return
            continue
        checks[max(used)].append(lit)
    values = bounds.values

    def assign(i):
        if i == len(variables):
            yield dict(ints)
            return
        for v in values:
            ints[variables[i]] = v
            if all(holds(lit, model) for lit in checks[i]):
                for result in assign(i + 1):
                    yield result
        del ints[variables[i]]

    for result in assign(0):
        yield result


class _HeapSearch(object):

    """
    Search heaps for one cube under a fixed integer assignment.

    Cells are decided one address at a time.  Cell values range over the
    term values of the cube, 0, the addresses and one value distinct from
    all of them; this is enough since literals only compare cell values
    with terms and with node addresses.  Without a closed atom, the cells
    no literal refers to are left out of every heap.
    """

    def __init__(self, cube, ints, heaps, bounds, schema):
        self.model = Model(ints, {})
        self.heaps = list(heaps)
        self.position = dict((h, i) for i, h in enumerate(self.heaps))
        self.schema = schema
        self.addresses = list(bounds.addresses)
        value = self.model.value
        values = set([0]) | set(self.addresses)
        values.update(value(t) for lit in cube for t in lit.terms())
        self.options = [None] + sorted(values) + [min(values) - 1]
        self.closed = [lit for lit in cube if lit.kind == 'closed']
        self.required = []
        self.local = []
        self.impossible = False
        for lit in cube:
            if lit.kind == 'closed':
                continue
            if lit.kind == 'node':
                addr = value(lit.addr)
                if addr != 0:
                    for f in schema.node_type(lit.type).fields:
                        self.required.append(
                            (lit.fields[schema.field_index(f)],
                             addr + f.offset))
                continue
            self.local.append(lit)
        for lit in self.local:
            if lit.kind in ('elem', 'indom', 'update'):
                self.required.append((lit.heap, value(lit.addr)))
            elif lit.kind == 'chunk':
                start = value(lit.addr)
                if len(lit.vals) > max(value(lit.size), 0):
                    self.impossible = True
                for a in range(start, start + max(value(lit.size), 0)):
                    self.required.append((lit.heap, a))

    def _referenced(self):
        value = self.model.value
        cells = set(a for _, a in self.required)
        for lit in self.local:
            if lit.kind in ('notelem', 'notindom'):
                cells.add(value(lit.addr))
        return sorted(a for a in cells if a in self.addresses)

    def _local_ok(self, lit, addr, get):
        value = self.model.value
        kind = lit.kind
        if kind == 'elem':
            return addr != value(lit.addr) or get(lit.heap) == value(lit.val)
        if kind == 'notelem':
            return addr != value(lit.addr) or get(lit.heap) != value(lit.val)
        if kind == 'indom':
            return addr != value(lit.addr) or get(lit.heap) is not None
        if kind == 'notindom':
            return addr != value(lit.addr) or get(lit.heap) is None
        if kind == 'heq':
            left, right = get(lit.left), get(lit.right)
            if left is not None and right is not None:
                return False
            return get(lit.heap) == (left if left is not None else right)
        if kind == 'diff':
            whole = get(lit.heap)
            if get(lit.context) is not None:
                whole = None
            return get(lit.footprint) == whole
        if kind == 'subheap':
            sub = get(lit.sub)
            return sub is None or get(lit.heap) == sub
        if kind == 'domsub':
            return get(lit.sub) is None or get(lit.sup) is not None
        if kind == 'update':
            if addr == value(lit.addr):
                return (get(lit.heap) is not None and
                        get(lit.result) == value(lit.val))
            return get(lit.result) == get(lit.heap)
        if kind == 'chunk':
            start = value(lit.addr)
            size = max(value(lit.size), 0)
            cell = get(lit.heap)
            if not start <= addr < start + size:
                return cell is None
            if cell is None:
                return False
            i = addr - start
            if i < len(lit.vals) and cell != value(lit.vals[i]):
                return False
            return lit.fill is None or cell == value(lit.fill)
        return True

    def _combos(self, addr, referenced=True):
        """
        The cell contents allowed at *addr* by the local literals.  A cell
        no literal refers to only needs to be absent or hold 0.
        """
        options = self.options if referenced else [None, 0]
        unary = dict((h, []) for h in self.heaps)
        relational = []
        for lit in self.local:
            names = set(lit.heaps())
            if len(names) == 1:
                unary[names.pop()].append(lit)
            else:
                relational.append(lit)
        needed = set(h for h, a in self.required if a == addr)
        per_heap = []
        for h in self.heaps:
            allowed = []
            for option in options:
                if option is None and h in needed:
                    continue
                get = {h: option}.get
                if all(self._local_ok(lit, addr, get) for lit in unary[h]):
                    allowed.append(option)
            per_heap.append(allowed)
        combos = []
        for combo in itertools.product(*per_heap):
            get = dict(zip(self.heaps, combo)).get
            if all(self._local_ok(lit, addr, get) for lit in relational):
                combos.append(combo)
        return combos

    def run(self):
        """Return a heap assignment, or None."""
        if self.impossible:
            return None
        if any(a not in self.addresses for _, a in self.required):
            return None
        referenced = self._referenced()
        cells = self.addresses if self.closed else referenced
        static = dict((a, self._combos(a, a in referenced)) for a in cells)
        if any(not combos for combos in static.values()):
            return None
        chosen = {}
        if not self.closed:
            for a in cells:
                chosen[a] = static[a][0]
            return self._heaps(chosen)
        if self._assign(cells, 0, static, chosen, {}):
            return self._heaps(chosen)
        return None

    def _obligations(self, combo):
        """Cells the nodes stored in *combo* need, as (heap index, addr)."""
        schema = self.schema
        for lit in self.closed:
            for info in schema.ptr_fields:
                heap = lit.fields[schema.field_index(info)]
                stored = combo[self.position[heap]]
                if stored is None or stored == 0:
                    continue
                for f in schema.node_type(info.target).fields:
                    name = lit.fields[schema.field_index(f)]
                    yield self.position[name], stored + f.offset

    def _assign(self, cells, i, static, chosen, pending):
        if i == len(cells):
            return True
        addr = cells[i]
        for combo in static[addr]:
            if any(combo[h] is None for h in pending.get(addr, ())):
                continue
            added = []
            ok = True
            for h, a in self._obligations(combo):
                if a == addr:
                    ok = combo[h] is not None
                elif a in chosen:
                    ok = chosen[a][h] is not None
                elif a in static:
                    ok = any(c[h] is not None for c in static[a])
                    added.append((a, h))
                else:
                    ok = False
                if not ok:
                    break
            if not ok:
                continue
            for a, h in added:
                pending.setdefault(a, []).append(h)
            chosen[addr] = combo
            if self._assign(cells, i + 1, static, chosen, pending):
                return True
            del chosen[addr]
            for a, h in added:
                pending[a].remove(h)
        return False

    def _heaps(self, chosen):
        heaps = dict((h, {}) for h in self.heaps)
        for addr, combo in chosen.items():
            for h, cell in zip(self.heaps, combo):
                if cell is not None:
                    heaps[h][addr] = cell
        return heaps


def enumerate_models(formula, bounds=DEFAULT_BOUNDS, schema=None):
    """
    Search a model of a normalized formula within bounds.

    Args:
    formula -- a formula in negation normal form without negated atoms
    bounds -- the Bounds of the search
    schema -- the TypeSchema giving meaning to closed and node atoms

    Return: the first Model found, or None when there is none in bounds
    Raise BoundsError: when the formula has too many variables or
                       disjunctive cases for the bounds
    """
    heaps = sorted(heap_vars(formula))
    ints = sorted(int_vars(formula))
    if schema is None and any(lit.kind in ('closed', 'node')
                              for lit in literals(formula)):
        raise ValueError('closed and node atoms need a type schema')
    if len(heaps) > bounds.max_heaps:
        raise BoundsError('too many heap variables', len(heaps))
    if len(ints) > bounds.max_ints:
        raise BoundsError('too many integer variables', len(ints))
    for count, cube in enumerate(_cubes(formula)):
        if count >= bounds.max_cubes:
            raise BoundsError('too many disjunctive cases', count)
        int_lits = [lit for lit in cube if lit.kind == 'int']
        heap_lits = [lit for lit in cube if lit.kind != 'int']
        used = set(v for lit in cube for v in _term_vars(lit))
        space = len(bounds.values) ** len(used)
        if space > _MAX_INT_SPACE:
            raise BoundsError('integer search space exceeded', space)
        # Variables no heap literal mentions are only assigned once the
        # heaps are found.
        addressing = set(v for lit in heap_lits for v in _term_vars(lit))
        among = [lit for lit in int_lits if _term_vars(lit) <= addressing]
        for assignment in _int_assignments(sorted(addressing), among,
                                           bounds):
            search = _HeapSearch(heap_lits, assignment, heaps, bounds, schema)
            found = search.run()
            if found is None:
                continue
            for rest in _int_assignments(sorted(used - addressing), int_lits,
                                         bounds, assignment):
                full = dict((v, 0) for v in ints)
                full.update(rest)
                return Model(full, found)
    return None


###############################################################################
# Concrete memory

#: Value of uninitialised words; never a mapped address.
GARBAGE = 0x5a5a5a5a

DEFAULT_STEP_LIMIT = 10000


class Block(namedtuple('Block', ['addr', 'size', 'type', 'origin'])):

    """
    A block of words.  *type* is the node type it was allocated as, or
    None; *origin* is 'input' or 'malloc'.
    """

    __slots__ = ()

    def covers(self, addr):
        return self.addr <= addr < self.addr + self.size


class Memory(object):

    """
    A concrete word memory.  Words outside every block are the context.
    """

    def __init__(self, cells=None, blocks=()):
        self.cells = dict(cells or {})
        self.blocks = list(blocks)

    @classmethod
    def with_context(cls, size=4, value=0):
        """A memory whose words 1..size belong to the context."""
        return cls(dict((a, value) for a in range(1, size + 1)))

    def copy(self):
        return Memory(self.cells, self.blocks)

    @property
    def top(self):
        tops = [0] + list(self.cells)
        tops.extend(b.addr + b.size - 1 for b in self.blocks)
        return max(tops)

    def allocate(self, size, type_name=None, fill=GARBAGE, origin='malloc'):
        """Map a new block after an unmapped guard word."""
        addr = self.top + 2
        block = Block(addr, max(size, 0), type_name, origin)
        for i in range(block.size):
            self.cells[addr + i] = fill
        self.blocks.append(block)
        return addr

    def add_node(self, type_name, values):
        """Map an input node holding *values* and return its address."""
        addr = self.allocate(len(values), type_name, origin='input')
        for i, v in enumerate(values):
            self.cells[addr + i] = v
        return addr

    def block_of(self, addr):
        for block in self.blocks:
            if block.covers(addr):
                return block
        return None

    def in_context(self, addr):
        return addr in self.cells and self.block_of(addr) is None


###############################################################################
# Interpreter

class Snapshot(namedtuple('Snapshot', ['function', 'point', 'env', 'memory',
                                       'live'])):

    """The state of one frame at a cut-point; *live* holds (value, type)."""

    __slots__ = ()


Access = namedtuple('Access', ['kind', 'address', 'pos', 'function'])


class Execution(object):

    """Result of a concrete run."""

    def __init__(self, result, memory, snapshots, context_accesses, steps):
        self.result = result
        self.memory = memory
        self.snapshots = snapshots
        self.context_accesses = context_accesses
        self.steps = steps

    def __repr__(self):
        return '<Execution result=%r steps=%d>' % (self.result, self.steps)


class _Return(Exception):

    def __init__(self, value):
        self.value = value


_COMPARE = {
    '==': operator.eq,
    '!=': operator.ne,
    '<': operator.lt,
    '<=': operator.le,
    '>': operator.gt,
    '>=': operator.ge,
}


class _Interpreter(object):

    def __init__(self, functions, memory, mode, step_limit):
        self.functions = functions
        self.memory = memory
        self.fill = 0 if mode == ZMALLOC else GARBAGE
        self.step_limit = step_limit
        self.steps = 0
        self.snapshots = []
        self.accesses = []
        self._cuts = {}

    def _cut_table(self, func):
        if func.name not in self._cuts:
            cuts = select_cutpoints(func)
            loops = _loops(func)
            headers = dict((id(loop), cut) for loop, cut in
                           zip(loops, cuts[1:-1]))
            self._cuts[func.name] = (cuts, headers, live_pointer_vars(func))
        return self._cuts[func.name]

    def _snapshot(self, func, point, env, result=None):
        _, _, live = self._cut_table(func)
        pointers = []
        for name in live.get(point, ()):
            if name == RETURN_VAR:
                pointers.append((result, func.ret.record))
            else:
                pointers.append((env.get(name, GARBAGE),
                                 func.kind_of(name).record))
        self.snapshots.append(Snapshot(func.name, point, dict(env),
                                       self.memory.copy(), tuple(pointers)))

    def call(self, func, args):
        if len(args) != len(func.params):
            raise ValueError('%s expects %d arguments' % (func.name,
                                                         len(func.params)))
        env = dict((name, GARBAGE) for name, _ in func.locals)
        env.update((name, v) for (name, _), v in zip(func.params, args))
        cuts, _, _ = self._cut_table(func)
        self._snapshot(func, cuts[0], env)
        try:
            self._run(func, flatten(func.body), env)
            result = None
        except _Return as ret:
            result = ret.value
        self._snapshot(func, cuts[-1], env, result)
        return result

    def _tick(self, func, stmt):
        self.steps += 1
        if self.steps > self.step_limit:
            raise RuntimeFault('step-limit', pos=stmt.pos, function=func.name)

    def _value(self, term, env):
        if term.var is None:
            return term.offset
        return env.get(term.var, GARBAGE) + term.offset

    def _cond(self, cond, env):
        if isinstance(cond, Compare):
            return _COMPARE[cond.op](self._value(cond.lhs, env),
                                     self._value(cond.rhs, env))
        if isinstance(cond, CondAnd):
            return self._cond(cond.left, env) and self._cond(cond.right, env)
        if isinstance(cond, CondOr):
            return self._cond(cond.left, env) or self._cond(cond.right, env)
        if isinstance(cond, CondNot):
            return not self._cond(cond.operand, env)
        raise ValueError('unknown condition %r' % (cond,))

    def _access(self, func, stmt, addr, kind):
        memory = self.memory
        if addr not in memory.cells:
            raise RuntimeFault('unmapped', addr, stmt.pos, func.name)
        if memory.in_context(addr):
            self.accesses.append(Access(kind, addr, stmt.pos, func.name))

    def _run(self, func, stmts, env):
        for stmt in stmts:
            self._tick(func, stmt)
            if isinstance(stmt, Assign):
                env[stmt.target] = self._value(stmt.value, env)
            elif isinstance(stmt, Load):
                addr = self._value(stmt.addr, env)
                self._access(func, stmt, addr, 'read')
                env[stmt.target] = self.memory.cells[addr]
            elif isinstance(stmt, Store):
                addr = self._value(stmt.addr, env)
                self._access(func, stmt, addr, 'write')
                self.memory.cells[addr] = self._value(stmt.value, env)
            elif isinstance(stmt, Malloc):
                size = self._value(stmt.count, env)
                env[stmt.target] = self.memory.allocate(size, stmt.type,
                                                        self.fill)
            elif isinstance(stmt, If):
                branch = stmt.then if self._cond(stmt.cond, env) else \
                    stmt.orelse
                self._run(func, flatten(branch), env)
            elif isinstance(stmt, While):
                _, headers, _ = self._cut_table(func)
                while True:
                    self._snapshot(func, headers[id(stmt)], env)
                    if not self._cond(stmt.cond, env):
                        break
                    self._run(func, flatten(stmt.body), env)
                    self._tick(func, stmt)
            elif isinstance(stmt, Return):
                value = None
                if stmt.value is not None:
                    value = self._value(stmt.value, env)
                raise _Return(value)
            elif isinstance(stmt, Abort):
                raise RuntimeFault('abort', pos=stmt.pos, function=func.name)
            elif isinstance(stmt, Call):
                callee = self.functions[stmt.func]
                args = [self._value(a, env) for a in stmt.args]
                result = self.call(callee, args)
                if stmt.target is not None:
                    env[stmt.target] = GARBAGE if result is None else result
            elif not isinstance(stmt, Skip):
                raise ValueError('unknown statement %r' % (stmt,))


def interpret(func, args, memory=None, mode=MALLOC, program=None,
              step_limit=DEFAULT_STEP_LIMIT):
    """
    Run a lowered function on concrete arguments.

    Args:
    func -- the lowered FuncDecl, or its name when *program* is given
    args -- the integer argument values
    memory -- the initial Memory, copied; an empty one when omitted
    mode -- MALLOC (fresh words hold GARBAGE) or ZMALLOC (fresh words 0)
    program -- the lowered Program, needed for calls
    step_limit -- the maximal number of executed statements

    Return: an Execution with the snapshots of every frame at its
    cut-points and the list of context accesses
    Raise RuntimeFault: on an unmapped access, abort() or when the step
                        limit is reached
    """
    functions = {}
    if program is not None:
        functions = dict((f.name, f) for f in program.functions)
        if not hasattr(func, 'body'):
            func = functions[func]
    functions.setdefault(func.name, func)
    memory = Memory() if memory is None else memory.copy()
    run = _Interpreter(functions, memory, mode, step_limit)
    try:
        result = run.call(func, list(args))
    except RuntimeFault as fault:
        fault.snapshots = run.snapshots
        raise
    return Execution(result, memory, run.snapshots, run.accesses, run.steps)


###############################################################################
# Integrity of concrete memories

class Violation(namedtuple('Violation', ['kind', 'field', 'address'])):

    """
    A failed integrity clause.  *kind* is 'unallocated' (a node word
    outside its block), 'overlap' (a word in two nodes), 'dangling' (a
    pointer field not pointing to a node) or 'invalid' (a live pointer
    that is not a node).
    """

    __slots__ = ()

    def __str__(self):
        field = ' field %s' % self.field if self.field else ''
        return '%s%s at %d' % (self.kind, field, self.address)


def _label(memory, schema):
    """Assign the node words of the typed blocks to their fields."""
    labels = {}
    for block in memory.blocks:
        if block.type is None:
            continue
        node = schema.node_type(block.type)
        for i in range(max(1, block.size // node.size)):
            base = block.addr + i * node.size
            for info in node.fields:
                addr = base + info.offset
                if not block.covers(addr):
                    return labels, Violation('unallocated', info.name, addr)
                if addr in labels:
                    return labels, Violation('overlap', info.name, addr)
                labels[addr] = info
    return labels, None


def check_integrity(memory, schema, live=()):
    """
    Evaluate the integrity constraint on a concrete memory.

    Args:
    memory -- the Memory; its typed blocks form the footprint
    schema -- the TypeSchema
    live -- (value, node type name) pairs of the live pointers

    Return: None when the constraint holds, else the first Violation
    """
    labels, violation = _label(memory, schema)
    if violation is not None:
        return violation

    def is_node(type_name, addr):
        if addr == 0:
            return True
        return all(labels.get(addr + f.offset) == f
                   for f in schema.node_type(type_name).fields)

    for addr in sorted(labels):
        info = labels[addr]
        if info.is_pointer and not is_node(info.target, memory.cells[addr]):
            return Violation('dangling', info.name, addr)
    for value, type_name in live:
        if not is_node(type_name, value):
            return Violation('invalid', None, value)
    return None


###############################################################################
# Bounded exploration

class Outcome(namedtuple('Outcome', ['args', 'fault', 'accesses',
                                     'violation'])):

    """The verdict of one concrete run."""

    __slots__ = ()

    @property
    def bad(self):
        return bool(self.fault is not None or self.accesses or
                    self.violation is not None)

    def describe(self):
        if self.fault is not None:
            reason = str(self.fault)
        elif self.accesses:
            access = self.accesses[0]
            reason = 'context %s of %d in %s' % (access.kind, access.address,
                                                 access.function)
        elif self.violation is not None:
            reason = 'integrity violation: %s' % (self.violation,)
        else:
            reason = 'ok'
        return '%s(%s): %s' % ('call', ', '.join(str(a) for a in self.args),
                               reason)


def explore(program, schema, name, arg_ranges, mode=MALLOC, memory=None,
            step_limit=DEFAULT_STEP_LIMIT):
    """
    Run a function on every combination of argument values.

    Args:
    program -- the lowered Program
    schema -- its TypeSchema
    name -- the function to run; all its parameters must be integers
    arg_ranges -- one iterable of values per parameter
    memory -- the initial Memory; four context words when omitted

    Return: a generator of Outcome, one per argument tuple; an outcome
    checks the integrity constraint at every snapshot, step-limit faults
    excepted
    """
    func = program.function(name)
    if any(is_record_pointer(kind) for _, kind in func.params):
        raise ValueError('%s takes pointer arguments' % name)
    if memory is None:
        memory = Memory.with_context()
    for args in itertools.product(*arg_ranges):
        try:
            run = interpret(func, args, memory, mode, program, step_limit)
        except RuntimeFault as fault:
            if fault.kind == 'step-limit':
                continue
            yield Outcome(args, fault, (), None)
            continue
        violation = None
        for snap in run.snapshots:
            violation = check_integrity(snap.memory, schema, snap.live)
            if violation is not None:
                break
        yield Outcome(args, None, tuple(run.context_accesses), violation)


def find_counterexample(program, schema, name, arg_ranges, mode=MALLOC,
                        memory=None):
    """Return the first bad Outcome of explore, or None."""
    for outcome in explore(program, schema, name, arg_ranges, mode, memory):
        if outcome.bad:
            logger.info('%s: %s', name, outcome.describe())
            return outcome
    return None


__all__ = ['enumerate_models', 'evaluate', 'holds', 'interpret',
           'check_integrity', 'explore', 'find_counterexample', 'Bounds',
           'BoundsError', 'Model', 'Memory', 'Block', 'RuntimeFault',
           'Violation', 'GARBAGE', 'ENTRY', 'EXIT']
