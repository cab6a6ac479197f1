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

import pytest

from dsverify.formula import (
    Chunk, Closed, Elem, Heq, IntRel, Node, Update, conj, TRUE
)
from dsverify.frontend import PtrTo, Seq, load_program
from dsverify.report import NO, YES, analyze_program
from dsverify.schema import (
    extract_schema, generate_d_rules, generate_negation_rewrites
)
from dsverify.solver import SAT, UNSAT, VALID, check_validity, solve
from dsverify.vcgen import (
    DPRESERVE, ENTRY, EXIT, LOOP, MALLOC, MEMSAFETY, ZMALLOC, Assume,
    SymState, build_dsic, build_dsic_m, chain_heaps, enumerate_segments,
    generate_vcs, live_pointer_vars, select_cutpoints, sp
)

from .helpers import (
    C, F_NEXT, F_VAL, LIST_DECL, LIST_FIELDS, V, list_schema, load_corpus
)

WALK = LIST_DECL + '''
void walk(struct list_node *xs) {
    while (xs != NULL)
        xs = xs->next;
}
'''


def function_of(source, name='f'):
    return load_program(source).function(name)


def test_cutpoints_of_nested_loops():
    program, _ = load_corpus('nested_loops.mc')
    cuts = select_cutpoints(program.function('nested'))
    assert [c.kind for c in cuts] == [ENTRY, LOOP, LOOP, EXIT]
    assert [c.index for c in cuts] == [None, 0, 1, None]
    assert str(cuts[-1]) == 'exit'


def test_segments_of_nested_loops():
    program, _ = load_corpus('nested_loops.mc')
    func = program.function('nested')
    outer, inner = select_cutpoints(func)[1:3]
    segments = enumerate_segments(func)
    ends = [(s.start, s.end) for s in segments]
    assert len(segments) == 5
    assert set(ends) == {
        (select_cutpoints(func)[0], outer), (outer, inner),
        (outer, select_cutpoints(func)[-1]), (inner, inner), (inner, outer),
    }
    for segment in segments:
        assert segment.live_start == ('xs',)


def test_segment_guards():
    func = function_of(WALK, 'walk')
    segments = enumerate_segments(func)
    assert len(segments) == 3
    body = [s for s in segments if s.start.kind == LOOP and
            s.end.kind == LOOP][0]
    assert [g.op for g in body.guards] == ['!=']
    assert len(body.stmts) == 1


def test_live_pointers_at_exit():
    program, _ = load_corpus('safe_list.mc')
    live = live_pointer_vars(program.function('make_list'))
    kinds = dict((cut.kind, names) for cut, names in live.items())
    assert kinds[ENTRY] == ()
    assert kinds[EXIT] == ('$ret',)
    assert 'xs' in kinds[LOOP]


def test_temporaries_are_not_live():
    func = function_of(LIST_DECL + '''
void f(struct list_node *xs) {
    xs->next->next = NULL;
    while (xs != NULL)
        xs = xs->next;
}
''')
    assert ('%t1', PtrTo('list_node')) in func.locals
    live = live_pointer_vars(func)
    kinds = dict((cut.kind, names) for cut, names in live.items())
    assert kinds[LOOP] == ('xs',)


def test_dsic_of_a_list():
    schema = list_schema()
    dsic = build_dsic(schema, [(V('xs'), 'list_node')], heap='H')
    assert dsic == conj(Heq('H', F_VAL, F_NEXT), Closed(LIST_FIELDS),
                        Node('list_node', 'xs', LIST_FIELDS))


def test_dsic_m_splits_off_the_context():
    schema = list_schema()
    dsic = build_dsic_m(schema, [(V('xs'), 'list_node')])
    assert dsic.args[0] == Heq('H', 'Hf', 'Hc')
    assert Closed(LIST_FIELDS) in dsic.args
    assert Node('list_node', 'xs', LIST_FIELDS) in dsic.args


def test_chain_over_three_fields():
    _, schema = load_corpus('safe_dag.mc')
    assert [name for name, _ in chain_heaps(schema)] == [
        'F_val', 'F_left', 'F_right', 'I_2']
    dsic = build_dsic(schema, [])
    assert dsic.args[:2] == (Heq('Hf', 'I_2', 'F_right'),
                             Heq('I_2', 'F_val', 'F_left'))


def test_sp_of_heap_statements():
    schema = list_schema()
    func = function_of(LIST_DECL + '''
void f(struct list_node *xs, int v) {
    struct list_node *ys = NULL;
    xs = xs->next;
    xs->val = v;
    ys = malloc(sizeof(struct list_node));
}
''')
    state = SymState(func, schema)
    load, store, alloc = [s for s in enumerate_segments(func)[0].stmts][1:]
    phi, after = sp(load, TRUE, state)
    assert phi == Elem('H', V('xs', 1), V("xs'"))
    assert state.current('xs') == V('xs')
    phi, after = sp(store, TRUE, after)
    assert phi == Update('H', V("xs'"), V('v'), "H'")
    phi, after = sp(alloc, TRUE, after)
    assert phi.args == (Heq("H'2", 'N_1', "H'"),
                        Chunk('N_1', V("ys'"), C(2)),
                        IntRel('<', 0, V("ys'")))


def test_sp_zero_fills_in_zmalloc_mode():
    func = function_of(LIST_DECL + '''
void f(struct list_node *ys) { ys = malloc(sizeof(struct list_node)); }
''')
    state = SymState(func, list_schema(), ZMALLOC)
    phi, _ = sp(func.body, TRUE, state)
    assert Chunk('N_1', V("ys'"), C(2), fill=0) in phi.args


FRESH_READ = LIST_DECL + '''
void f(struct list_node *ys, struct list_node *zs) {
    ys = malloc(sizeof(struct list_node));
    zs = ys->next;
}
'''


@pytest.mark.parametrize("mode, status", [(MALLOC, SAT), (ZMALLOC, UNSAT)])
def test_fresh_cells_read_zero_only_in_zmalloc_mode(mode, status):
    func = function_of(FRESH_READ)
    schema = list_schema()
    phi, end = sp(func.body, TRUE, SymState(func, schema, mode))
    read = conj(phi, IntRel('!=', end.current('zs'), 0))
    assert solve(read, generate_d_rules(schema)).status == status


def sequence(steps):
    body = steps[-1]
    for step in reversed(steps[:-1]):
        body = Seq(step, body)
    return body


def test_sp_of_concatenated_segments():
    func = function_of(LIST_DECL + '''
void f(struct list_node *xs, int v) {
    struct list_node *ys = malloc(sizeof(struct list_node));
    ys->val = v;
    ys->next = xs->next;
    xs->next = ys;
    if (v > 0)
        xs = ys->next;
}
''')
    schema = list_schema()
    for segment in enumerate_segments(func):
        steps = segment.steps
        whole, end = sp(sequence(steps), TRUE, SymState(func, schema))
        for cut in range(1, len(steps)):
            phi, middle = sp(sequence(steps[:cut]), TRUE,
                             SymState(func, schema))
            phi, after = sp(sequence(steps[cut:]), phi, middle)
            assert phi == whole
            assert after.var_map == end.var_map
            assert after.heap == end.heap
            assert after.allocs == end.allocs


def test_zmalloc_makes_append_preserve_integrity():
    program, schema = load_corpus('list_library.mc')
    verdicts = dict(
        (mode, analyze_program(program, schema, mode,
                               only=('append',)).function('append').d_safe)
        for mode in (MALLOC, ZMALLOC))
    assert verdicts == {MALLOC: NO, ZMALLOC: YES}


def test_sp_of_guard():
    func = function_of(WALK, 'walk')
    body = [s for s in enumerate_segments(func)
            if s.start.kind == LOOP and s.end.kind == LOOP][0]
    guard = body.steps[0]
    assert isinstance(guard, Assume)
    phi, _ = sp(guard, TRUE, SymState(func, list_schema()))
    assert phi == IntRel('!=', V('xs'), 0)


def test_unknown_mode():
    func = function_of(WALK, 'walk')
    with pytest.raises(ValueError):
        SymState(func, list_schema(), 'calloc')


def test_conditions_per_function():
    program = load_program(WALK)
    vcs = generate_vcs(program, extract_schema(program))['walk']
    kinds = [vc.kind for vc in vcs]
    assert kinds == [DPRESERVE] * 3 + [MEMSAFETY]
    access = vcs[-1]
    assert access.access == 'read'
    assert access.address == V('xs', 1)
    assert access.describe().startswith('walk: read of xs+1 at ')


def test_next_access_condition_is_valid():
    program = load_program(WALK)
    schema = extract_schema(program)
    access = generate_vcs(program, schema)['walk'][-1]
    result = check_validity(access, generate_d_rules(schema),
                            generate_negation_rewrites(schema), trace=True)
    assert result.status == VALID
    tags = set(e.tag for e in result.trace.conflicts)
    assert {'I', 'H'} <= tags
    assert len(result.trace.branches) >= 2


@pytest.mark.parametrize("mode", [MALLOC, ZMALLOC])
def test_make_bad_breaks_integrity(mode):
    program, schema = load_corpus('make_bad.mc')
    report = analyze_program(program, schema, mode,
                             only=('make_bad', 'set'))
    assert report.function('make_bad').d_safe == NO
    assert report.function('make_bad').mem_safe == YES
    assert report.function('set').d_safe == YES
    assert report.function('set').mem_safe == YES


def test_single_field_record():
    program = load_program('''
struct cell { int x; };
void f(struct cell *p) {
    if (p != NULL)
        p->x = 1;
}
''')
    schema = extract_schema(program)
    assert Chunk('E', 1, 0) in build_dsic(schema, []).args
    report = analyze_program(program, schema)
    assert report.function('f').d_safe == YES
    assert report.function('f').mem_safe == YES
