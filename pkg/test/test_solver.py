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

import random

import pytest

from dsverify.formula import (
    Chunk, Closed, DomSub, Elem, FormulaError, Heq, InDom, IntRel, Node,
    Not, NotElem, NotInDom, SubHeap, Update, conj, disj, int_vars, neg, TRUE
)
from dsverify.oracle import Bounds, Model, enumerate_models, evaluate
from dsverify.solver import (
    INVALID, SAT, UNKNOWN, UNSAT, VALID, check_validity, normalize, solve
)
from dsverify.vcgen import DPRESERVE, VerificationCondition

from .helpers import C, F_NEXT, F_VAL, LIST_FIELDS, V, list_rules


def xs_node():
    return Node('list_node', 'xs', LIST_FIELDS)


def next_access_constraints():
    """The refutation goal of the memory-safety VC of xs = xs->next."""
    return conj(
        Heq('H', 'Hf', 'Hc'),
        Heq('Hf', F_VAL, F_NEXT),
        xs_node(),
        IntRel('!=', V('xs'), 0),
        InDom('Hc', V('xs', 1)),
    )


###############################################################################
# normalize

def test_normalize_double_negation():
    _, _, rewrites = list_rules()
    lit = IntRel('<', V('x'), V('y'))
    assert normalize(Not(Not(lit)), rewrites) == lit


def test_normalize_de_morgan():
    _, _, rewrites = list_rules()
    a = IntRel('=', V('x'), 0)
    b = InDom('H', V('x'))
    c = Elem('H', V('x'), 1)
    result = normalize(neg(conj(a, disj(b, c))), rewrites)
    assert result == disj(IntRel('!=', V('x'), 0),
                          conj(NotInDom('H', V('x')),
                               NotElem('H', V('x'), 1)))


def test_normalize_native_negations():
    _, _, rewrites = list_rules()
    assert normalize(neg(NotInDom('H', 'p')), rewrites) == InDom('H', V('p'))
    assert normalize(neg(NotElem('H', 'p', 1)), rewrites) == \
        Elem('H', V('p'), 1)


def test_normalize_subheap_and_domsub():
    _, _, rewrites = list_rules()
    result = normalize(neg(SubHeap('A', 'B')), rewrites)
    assert result == conj(Elem('A', V('s@1'), V('t@2')),
                          NotElem('B', V('s@1'), V('t@2')))
    result = normalize(neg(DomSub('A', 'B')), rewrites)
    assert result == conj(InDom('A', V('s@1')), NotInDom('B', V('s@1')))


def test_normalize_closed_introduces_fresh_witnesses():
    _, _, rewrites = list_rules()
    result = normalize(neg(Closed(LIST_FIELDS)), rewrites)
    text = str(result)
    assert 's@1' in text and 't@2' in text
    assert 'closed' not in text


def test_normalize_rejects_negated_update():
    _, _, rewrites = list_rules()
    with pytest.raises(FormulaError):
        normalize(neg(Update('H', 'p', 1, 'H2')), rewrites)


def test_normalize_empty_chunk():
    _, _, rewrites = list_rules()
    assert normalize(neg(Chunk('E', 1, 0)), rewrites) == \
        InDom('E', V('s@1'))


def test_normalize_constant_chunk():
    _, rules, rewrites = list_rules()
    block = Chunk('H', 1, 2, vals=(5, 6))
    assert solve(normalize(conj(block, neg(block)), rewrites),
                 rules).status == UNSAT
    for extra in (InDom('H', 3), Elem('H', 2, 7), NotInDom('H', 1)):
        formula = conj(extra, neg(block))
        model = enumerate_models(normalize(formula, rewrites),
                                 Bounds(max_addr=4))
        assert model is not None, formula
        assert evaluate(formula, model)
    with pytest.raises(FormulaError):
        normalize(neg(Chunk('H', 'p', 'n')), rewrites)


###############################################################################
# solve

def test_trivial_sat():
    _, rules, _ = list_rules()
    result = solve(IntRel('=', C(0), C(0)), rules)
    assert result.status == SAT
    assert result.decisions == 0


def test_functional_heap_unsat():
    _, rules, _ = list_rules()
    formula = conj(Elem('H', 'p', 1), Elem('H', 'p', 2))
    assert solve(formula, rules).status == UNSAT


def test_next_access_is_refuted_in_two_branches():
    _, rules, _ = list_rules()
    result = solve(next_access_constraints(), rules, trace=True)
    assert result.status == UNSAT
    trace = result.trace
    labels = [e.label for e in trace.branches]
    assert len(labels) == 2
    assert labels[0][:-1] == labels[1][:-1]
    assert (labels[0][-1], labels[1][-1]) == ('a', 'b')
    assert trace.branches[0].text == 'xs = 0'
    assert [e.tag for e in trace.conflicts] == ['I', 'H']
    assert trace.events[0].kind == 'assert'
    assert trace.events[-1].kind == UNSAT
    rendered = trace.render()
    assert 'a) xs = 0' in rendered
    assert 'false (I)' in rendered
    assert 'false (H)' in rendered


def test_next_access_without_guard_is_satisfiable():
    _, rules, _ = list_rules()
    formula = conj(Heq('H', 'Hf', 'Hc'), Heq('Hf', F_VAL, F_NEXT),
                   xs_node(), InDom('Hc', V('xs', 1)))
    result = solve(formula, rules)
    assert result.status == SAT
    assert IntRel('=', V('xs'), 0) in result.literals


def test_solve_is_deterministic():
    _, rules, _ = list_rules()
    first = solve(next_access_constraints(), rules, trace=True)
    second = solve(next_access_constraints(), rules, trace=True)
    assert first.status == second.status
    assert first.decisions == second.decisions
    assert first.trace.render() == second.trace.render()


def test_budget_exhaustion_is_unknown():
    _, rules, _ = list_rules()
    result = solve(next_access_constraints(), rules, budget=0)
    assert result.status == UNKNOWN
    assert 'budget' in result.reason


def test_false_path_is_valid():
    _, rules, rewrites = list_rules()
    vc = VerificationCondition(DPRESERVE, 'f', IntRel('!=', C(0), C(0)),
                               InDom('H', 'p'))
    assert check_validity(vc, rules, rewrites).status == VALID


def test_invalid_vc_carries_diagnostics():
    _, rules, rewrites = list_rules()
    vc = VerificationCondition(DPRESERVE, 'f', TRUE,
                               InDom('H', 'p'))
    result = check_validity(vc, rules, rewrites)
    assert result.status == INVALID
    assert NotInDom('H', V('p')) in result.diagnostics


def test_condition_text():
    path = conj(Heq('H', 'A', 'B'),
                disj(InDom('A', 'p'), IntRel('=', V('p'), 0)))
    vc = VerificationCondition(DPRESERVE, 'f', path, NotInDom('H', 'p'),
                               witness=Heq('H', 'A', 'B'))
    assert str(vc).splitlines()[1:] == [
        '  witness: H ≐ A ∗ B',
        '  path: H ≐ A ∗ B ∧ (p ∈ dom(A) ∨ p = 0)',
        '  post: p ∉ dom(H)',
    ]
    assert str(neg(path)) == '¬(H ≐ A ∗ B ∧ (p ∈ dom(A) ∨ p = 0))'


###############################################################################
# Agreement with the bounded enumerator

HEAPS = ('H', 'A', 'B')
ADDRESSES = (V('x'), V('x', 1), C(1), C(2))
VALUES = (C(0), C(1), C(2), V('y'))
INT_VARS = ('x', 'y', 'z', 'u', 'v', 'w')
INT_TERMS = (V('x'), V('x', 1), V('y'), V('z'), V('u'), V('v'), V('w'))
OPS = ('=', '!=', '<', '<=')

#: Cells and values of the list formulas; a node at 3 ends at address 4.
NODE_ADDRESSES = (C(0), C(1), C(3), V('x'))
LIST_ADDRESSES = (V('x'), V('x', 1), C(1), C(2), C(3), C(4))
LIST_VALUES = (C(0), C(1), C(2), C(3), V('y'))


def random_relation(rng):
    lhs = rng.choice(INT_TERMS)
    if rng.random() < 0.3:
        rhs = rng.choice(INT_TERMS)
    else:
        rhs = C(rng.randrange(3))
    if rng.random() < 0.5:
        lhs, rhs = rhs, lhs
    return IntRel(rng.choice(OPS), lhs, rhs)


def random_literal(rng, heaps=HEAPS, addresses=ADDRESSES, values=VALUES):
    kind = rng.randrange(5)
    if kind == 0:
        return random_relation(rng)
    heap = rng.choice(heaps)
    addr = rng.choice(addresses)
    if kind == 1:
        return Elem(heap, addr, rng.choice(values))
    if kind == 2:
        return NotElem(heap, addr, rng.choice(values))
    if kind == 3:
        return InDom(heap, addr)
    return NotInDom(heap, addr)


def random_list_literal(rng):
    return random_literal(rng, LIST_FIELDS, LIST_ADDRESSES, LIST_VALUES)


def within_window(formula):
    """Keep every integer variable in -1..3, inside the enumerator bounds."""
    bounds = []
    for name in sorted(int_vars(formula)):
        bounds.append(IntRel('<=', -1, V(name)))
        bounds.append(IntRel('<=', V(name), 3))
    return conj(formula, *bounds)


def random_formula(rng):
    parts = []
    roll = rng.random()
    if roll < 0.3:
        parts.append(Heq('H', 'A', 'B'))
    elif roll < 0.45:
        parts.append(Update('A', rng.choice(ADDRESSES), rng.choice(VALUES),
                            'H'))
    for _ in range(rng.randint(2, 4)):
        lit = random_literal(rng)
        if rng.random() < 0.25:
            lit = disj(lit, random_literal(rng))
        parts.append(lit)
    return within_window(conj(*parts))


def random_list_formula(rng):
    parts = []
    if rng.random() < 0.7:
        parts.append(Closed(LIST_FIELDS))
    if rng.random() < 0.3:
        parts.append(Heq('H', F_VAL, F_NEXT))
    if rng.random() < 0.6:
        parts.append(Node('list_node', rng.choice(NODE_ADDRESSES),
                          LIST_FIELDS))
    for _ in range(rng.randint(2, 4)):
        lit = random_list_literal(rng)
        if rng.random() < 0.25:
            lit = disj(lit, random_list_literal(rng))
        parts.append(lit)
    return within_window(conj(*parts))


@pytest.mark.parametrize("seed", range(20))
def test_solver_agrees_with_enumerator(seed):
    schema, rules, _ = list_rules()
    bounds = Bounds(max_addr=4, max_heaps=3, max_ints=len(INT_VARS))
    rng = random.Random(seed)
    for _ in range(50):
        if rng.random() < 0.3:
            formula = random_list_formula(rng)
        else:
            formula = random_formula(rng)
        result = solve(formula, rules)
        model = enumerate_models(formula, bounds, schema)
        assert result.status in (SAT, UNSAT), formula
        assert (result.status == SAT) == (model is not None), formula
        if model is not None:
            assert evaluate(formula, model, schema)


def random_model(rng):
    ints = dict((name, rng.randint(-1, 3)) for name in INT_VARS)
    heaps = {}
    for heap in HEAPS:
        heaps[heap] = dict((a, rng.randrange(3)) for a in range(1, 5)
                           if rng.random() < 0.5)
    return Model(ints, heaps)


def random_negated(rng, depth=2):
    if depth == 0 or rng.random() < 0.3:
        return random_literal(rng)
    args = [random_negated(rng, depth - 1) for _ in range(2)]
    roll = rng.randrange(3)
    if roll == 0:
        return Not(args[0])
    if roll == 1:
        return conj(*args)
    return disj(*args)


def test_normalize_preserves_meaning():
    _, _, rewrites = list_rules()
    rng = random.Random(7)
    for _ in range(300):
        formula = random_negated(rng)
        normal = normalize(formula, rewrites)
        for _ in range(5):
            model = random_model(rng)
            assert evaluate(formula, model) == evaluate(normal, model), \
                formula


def test_normalize_keeps_bounded_satisfiability_of_rewrites():
    schema, _, rewrites = list_rules()
    bounds = Bounds(max_addr=4)
    for formula in (neg(SubHeap('A', 'B')), neg(DomSub('A', 'B')),
                    conj(Elem(F_NEXT, 1, 3), neg(Closed(LIST_FIELDS)))):
        model = enumerate_models(normalize(formula, rewrites), bounds,
                                 schema)
        assert model is not None
        assert evaluate(formula, model, schema)
