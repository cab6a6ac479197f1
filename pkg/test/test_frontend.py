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

from dsverify.formula import Term
from dsverify.frontend import (
    INT, Abort, Call, Compare, If, Load, Malloc, PtrTo, Seq, Skip,
    SourceError, Store, While, flatten, format_program, is_temporary,
    load_program, lower, parse_program, walk_ir
)

from .helpers import LIST_DECL, load_data_file


def lowered_body(body, params='struct list_node *xs, int v', extra=''):
    source = '%s%s\nvoid f(%s) { %s }\n' % (LIST_DECL, extra, params, body)
    return load_program(source).function('f').body


def test_parse_records_and_functions():
    prog = parse_program(LIST_DECL + '''
int length(struct list_node *xs) {
    int n = 0;
    return n;
}
''')
    assert len(prog.records) == 1
    record = prog.records[0]
    assert record.name == 'list_node'
    assert record.fields == (('val', INT), ('next', PtrTo('list_node')))
    func = prog.function('length')
    assert func.ret == INT
    assert func.params == (('xs', PtrTo('list_node')),)
    assert func.locals == (('n', INT),)


def test_empty_program():
    prog = load_program('')
    assert prog.records == ()
    assert prog.functions == ()


def test_record_without_fields_parses():
    prog = load_program('struct empty { };\n')
    assert prog.records[0].name == 'empty'
    assert prog.records[0].fields == ()


def test_function_lookup_fails_for_unknown_name():
    prog = load_program(LIST_DECL)
    with pytest.raises(KeyError):
        prog.function('missing')


def test_lower_field_read():
    assert lowered_body('xs = xs->next;') == Load('xs', Term('xs', 1))


def test_lower_field_write():
    assert lowered_body('xs->val = v;') == Store(Term('xs'), Term('v'))


def test_lower_indexed_field():
    body = lowered_body('xs[1].next = NULL;')
    assert body == Store(Term('xs', 3), Term(None, 0))


def test_lower_pointer_arithmetic_is_scaled():
    body = lowered_body('(xs - 1)->val = v;')
    assert body == Store(Term('xs', -2), Term('v'))


def test_lower_typed_malloc():
    body = lowered_body('xs = malloc(sizeof(struct list_node));')
    assert body == Malloc('xs', Term(None, 2), 'list_node')


def test_lower_malloc_of_words():
    body = lowered_body('struct list_node *ys = malloc(3 * sizeof(void *));')
    assert body == Malloc('ys', Term(None, 3), 'list_node')


def test_lower_address_of_field():
    body = lowered_body('xs->next = (struct list_node *) &xs->next;')
    assert body == Store(Term('xs', 1), Term('xs', 1))


def test_lower_cast_int_to_pointer():
    body = lowered_body('xs->next = (struct list_node *) v;')
    assert body == Store(Term('xs', 1), Term('v'))


def test_lower_nested_field_read():
    body = lowered_body('xs->next->next = NULL;')
    assert body == Seq(Load('%t1', Term('xs', 1)),
                       Store(Term('%t1', 1), Term(None, 0)))


def test_lowering_declares_temporaries():
    source = LIST_DECL + 'void f(struct list_node *xs) ' \
        '{ int n = 0; xs->next->next = NULL; }'
    func = load_program(source).function('f')
    assert func.locals == (('n', INT), ('%t1', PtrTo('list_node')))
    assert func.kind_of('%t1') == PtrTo('list_node')
    assert is_temporary('%t1') and not is_temporary('n')


def test_lower_call():
    extra = '\nstruct list_node *make(int n) { return NULL; }'
    body = lowered_body('xs = make(v);', extra=extra)
    assert body == Call('xs', 'make', (Term('v'),))


def test_lower_abort():
    assert lowered_body('abort();') == Abort()


def test_lower_short_circuit_with_field_read():
    body = lowered_body('if (xs != NULL && xs->val == v) abort();')
    inner = Seq(Load('%t1', Term('xs')),
                If(Compare('==', Term('%t1'), Term('v')), Abort(), Skip()))
    assert body == If(Compare('!=', Term('xs'), Term(None, 0)), inner,
                      Skip())


def test_lower_loop():
    body = lowered_body('while (xs != NULL) xs = xs->next;')
    assert isinstance(body, While)
    assert body.body == Load('xs', Term('xs', 1))
    assert [type(s) for s in walk_ir(body)] == [While, Load]


def test_flatten_drops_skip():
    stmts = flatten(Seq(Skip(), Seq(Abort(), Skip())))
    assert stmts == [Abort()]


@pytest.mark.parametrize("source, message", [
    ('void f( { }', 'syntax error'),
    ('void f(void) {', 'unexpected end of input'),
    ('void f(struct foo *p) { }', 'unknown type struct foo'),
    ('void f(void) { } void f(void) { }', 'duplicate declaration'),
    ('void f(int n) { int n; }', 'duplicate declaration of n'),
    ('void f(int n) { n = m; }', 'undeclared identifier m'),
    (LIST_DECL + 'void f(struct list_node *xs, int n) { xs[n].val = 1; }',
     'non-constant array subscript'),
    (LIST_DECL + 'void f(struct list_node *xs, int n) { xs = xs + n; }',
     'arithmetic on two variables'),
    ('void f(int n) { n = n * n; }', 'non-constant multiplier'),
    (LIST_DECL + 'void f(struct list_node *xs) '
     '{ while (xs->next != NULL) xs = xs->next; }',
     'field access in a loop condition'),
    (LIST_DECL + 'void f(struct list_node *xs) { xs->prev = NULL; }',
     'has no field prev'),
    ('void f(int n) { n = g(n); }', 'undefined function g'),
    ('void f(int n) { n = @; }', 'illegal character'),
])
def test_source_errors(source, message):
    with pytest.raises(SourceError) as excinfo:
        load_program(source)
    assert message in str(excinfo.value)


def test_source_error_position():
    with pytest.raises(SourceError) as excinfo:
        load_program('void f(int n) {\n  n = m;\n}\n')
    error = excinfo.value
    assert (error.line, error.column) == (2, 7)
    assert str(error) == '2:7: undeclared identifier m'


@pytest.mark.parametrize("name", [
    'safe_list.mc', 'overlap_node_dag.mc', 'not_array_graph.mc',
    'arith_ptr_list.mc', 'make_bad.mc', 'list_library.mc',
])
def test_format_program_reparses(name):
    prog = parse_program(load_data_file(name).source)
    text = format_program(prog)
    assert parse_program(text) == prog
    assert lower(parse_program(text)) == lower(prog)
