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
Mini-C frontend: lexer, parser, AST, pretty-printer and lowering to the
statement IR consumed by the VC generator.

The accepted language is a small C subset: struct declarations with int
and struct pointer fields, functions over int and struct pointer
variables, assignments, field reads and writes, `if`, `while`, `return`,
`malloc`, `abort` and calls to functions defined in the same file.

>>> from dsverify.frontend import parse_program, lower
>>> prog = lower(parse_program('''
... struct list_node { int val; struct list_node *next; };
... void skip(struct list_node *xs) { xs = xs->next; }
... '''))
>>> print(prog.functions[0].body)
Load(target='xs', addr=Term(var='xs', offset=1))
"""

from collections import namedtuple
import logging

import ply.lex as lex
import ply.yacc as yacc

from .formula import Term

logger = logging.getLogger(__name__)


class SourceError(ValueError):

    """
    Exception raised when a mini-C source cannot be parsed or lowered.
    """

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column

    def __str__(self):
        if self.line is None:
            return self.message
        return '%d:%d: %s' % (self.line, self.column or 0, self.message)


def _error(message, node=None, pos=None):
    if pos is None and node is not None:
        pos = node.pos
    if pos is None:
        return SourceError(message)
    return SourceError(message, pos[0], pos[1])


#: The int kind.  Pointer kinds are PtrTo instances.
INT = 'int'
VOID = 'void'


class PtrTo(namedtuple('PtrTo', ['record'])):

    """A pointer to a record, or ``void *`` when *record* is None."""

    __slots__ = ()

    def __str__(self):
        if self.record is None:
            return 'void *'
        return 'struct %s *' % self.record


class StructOf(namedtuple('StructOf', ['record'])):

    """A record type itself; only appears under sizeof."""

    __slots__ = ()

    def __str__(self):
        return 'struct %s' % self.record


def is_record_pointer(kind):
    return isinstance(kind, PtrTo) and kind.record is not None


def is_temporary(name):
    """Tell whether *name* is a temporary introduced by lowering."""
    return name.startswith('%')


###############################################################################
# AST and IR nodes

class Node(object):

    """
    Base class of AST and IR nodes.

    Subclasses list their attributes in ``_fields``.  The source position
    ``pos`` (a (line, column) pair or None) does not take part in
    comparisons.
    """

    _fields = ()

    def __init__(self, *args, **kwargs):
        self.pos = kwargs.pop('pos', None)
        if kwargs or len(args) != len(self._fields):
            raise TypeError('%s expects fields %s' %
                            (self.__class__.__name__, self._fields))
        for name, value in zip(self._fields, args):
            setattr(self, name, value)

    def _values(self):
        return tuple(getattr(self, name) for name in self._fields)

    def __eq__(self, other):
        return type(self) is type(other) and self._values() == other._values()

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((type(self).__name__, self._values()))

    def __repr__(self):
        return '%s(%s)' % (self.__class__.__name__, ', '.join(
            '%s=%r' % (name, getattr(self, name)) for name in self._fields))

    __str__ = __repr__


class Program(Node):
    _fields = ('records', 'functions')

    def function(self, name):
        for func in self.functions:
            if func.name == name:
                return func
        raise KeyError(name)


class RecordDecl(Node):
    _fields = ('name', 'fields')


class FuncDecl(Node):
    _fields = ('name', 'ret', 'params', 'locals', 'body')

    def kind_of(self, name):
        for var, kind in self.params + self.locals:
            if var == name:
                return kind
        return None


# Statements

class Block(Node):
    _fields = ('stmts',)


class VarDecl(Node):
    _fields = ('name', 'kind', 'init')


class AssignStmt(Node):
    _fields = ('target', 'value')


class ExprStmt(Node):
    _fields = ('expr',)


class IfStmt(Node):
    _fields = ('cond', 'then', 'orelse')


class WhileStmt(Node):
    _fields = ('cond', 'body')


class ReturnStmt(Node):
    _fields = ('value',)


class EmptyStmt(Node):
    _fields = ()


# Expressions

class Num(Node):
    _fields = ('value',)


class Null(Node):
    _fields = ()


class Name(Node):
    _fields = ('id',)


class BinOp(Node):
    _fields = ('op', 'left', 'right')


class UnaryOp(Node):
    _fields = ('op', 'operand')


class AddrOf(Node):
    _fields = ('operand',)


class FieldRef(Node):
    _fields = ('base', 'field')


class IndexField(Node):
    _fields = ('base', 'index', 'field')


class Cast(Node):
    _fields = ('kind', 'operand')


class SizeOf(Node):
    _fields = ('kind',)


class CallExpr(Node):
    _fields = ('func', 'args')


# Statement IR

class Seq(Node):
    _fields = ('first', 'second')


class Assign(Node):
    _fields = ('target', 'value')


class Load(Node):
    _fields = ('target', 'addr')


class Store(Node):
    _fields = ('addr', 'value')


class Malloc(Node):
    _fields = ('target', 'count', 'type')


class Abort(Node):
    _fields = ()


class If(Node):
    _fields = ('cond', 'then', 'orelse')


class While(Node):
    _fields = ('cond', 'body')


class Return(Node):
    _fields = ('value',)


class Skip(Node):
    _fields = ()


class Call(Node):
    _fields = ('target', 'func', 'args')


# Condition IR

class Compare(Node):
    _fields = ('op', 'lhs', 'rhs')


class CondAnd(Node):
    _fields = ('left', 'right')


class CondOr(Node):
    _fields = ('left', 'right')


class CondNot(Node):
    _fields = ('operand',)


def seq(*stmts):
    """
    Chain IR statements with Seq, dropping Skip.
    """
    stmts = [s for s in stmts if not isinstance(s, Skip)]
    if not stmts:
        return Skip()
    result = stmts[-1]
    for stmt in reversed(stmts[:-1]):
        result = Seq(stmt, result, pos=stmt.pos)
    return result


def flatten(stmt):
    """Return the list of non-Seq statements of *stmt*, in order."""
    if isinstance(stmt, Seq):
        return flatten(stmt.first) + flatten(stmt.second)
    if isinstance(stmt, Skip):
        return []
    return [stmt]


def walk_ir(stmt):
    """Yield every IR statement of *stmt*, nested ones included."""
    for s in flatten(stmt):
        yield s
        if isinstance(s, If):
            for sub in walk_ir(s.then):
                yield sub
            for sub in walk_ir(s.orelse):
                yield sub
        elif isinstance(s, While):
            for sub in walk_ir(s.body):
                yield sub


###############################################################################
# Lexer

_RESERVED = {
    'struct': 'STRUCT',
    'int': 'INT',
    'void': 'VOID',
    'if': 'IF',
    'else': 'ELSE',
    'while': 'WHILE',
    'return': 'RETURN',
    'NULL': 'NULL',
    'sizeof': 'SIZEOF',
}

tokens = tuple(sorted(set(_RESERVED.values()))) + (
    'ID', 'NUMBER', 'ARROW', 'AND', 'OR', 'EQ', 'NE', 'LE', 'GE', 'LT', 'GT',
)

literals = '=+-*&!(){}[];,.'

t_ignore = ' \t\r\f'

t_ARROW = r'->'
t_AND = r'&&'
t_OR = r'\|\|'
t_EQ = r'=='
t_NE = r'!='
t_LE = r'<='
t_GE = r'>='
t_LT = r'<'
t_GT = r'>'


def t_comment(t):
    r'/\*(.|\n)*?\*/|//[^\n]*'
    t.lexer.lineno += t.value.count('\n')


def t_ID(t):
    r'[A-Za-z_][A-Za-z0-9_]*'
    t.type = _RESERVED.get(t.value, 'ID')
    return t


def t_NUMBER(t):
    r'\d+'
    t.value = int(t.value)
    return t


def t_newline(t):
    r'\n+'
    t.lexer.lineno += len(t.value)


def t_error(t):
    raise SourceError('illegal character %r' % t.value[0],
                      t.lexer.lineno, _column(t.lexer.lexdata, t.lexpos))


def _column(text, lexpos):
    return lexpos - text.rfind('\n', 0, lexpos)


###############################################################################
# Grammar

start = 'program'

precedence = (
    ('nonassoc', 'IFX'),
    ('nonassoc', 'ELSE'),
    ('left', 'OR'),
    ('left', 'AND'),
    ('left', 'EQ', 'NE'),
    ('left', 'LT', 'LE', 'GT', 'GE'),
    ('left', '+', '-'),
    ('left', '*'),
    ('right', 'UMINUS', '!', 'CAST'),
)


def _pos(p, i):
    return (p.lineno(i), _column(p.lexer.lexdata, p.lexpos(i)))


def p_program(p):
    '''program : items'''
    records = tuple(i for i in p[1] if isinstance(i, RecordDecl))
    functions = tuple(i for i in p[1] if isinstance(i, FuncDecl))
    p[0] = Program(records, functions, pos=(1, 1))


def p_items(p):
    '''items : items item
             | empty'''
    p[0] = p[1] + [p[2]] if len(p) == 3 else []


def p_item(p):
    '''item : record
            | function'''
    p[0] = p[1]


def p_empty(p):
    '''empty :'''
    p[0] = None


def p_record(p):
    '''record : STRUCT ID '{' fields '}' ';' '''
    p[0] = RecordDecl(p[2], tuple(p[4]), pos=_pos(p, 1))


def p_fields(p):
    '''fields : fields field
              | empty'''
    p[0] = p[1] + [p[2]] if len(p) == 3 else []


def p_field(p):
    '''field : type ID ';' '''
    p[0] = (p[2], p[1])


def p_type_int(p):
    '''type : INT'''
    p[0] = INT


def p_type_void(p):
    '''type : VOID'''
    p[0] = VOID


def p_type_void_ptr(p):
    '''type : VOID '*' '''
    p[0] = PtrTo(None)


def p_type_struct_ptr(p):
    '''type : STRUCT ID '*' '''
    p[0] = PtrTo(p[2])


def p_function(p):
    '''function : type ID '(' params ')' block'''
    body = p[6]
    p[0] = FuncDecl(p[2], p[1], tuple(p[4]), tuple(_collect_locals(body)),
                    body, pos=_pos(p, 2))


def p_params(p):
    '''params : param_list
              | VOID
              | empty'''
    p[0] = p[1] if isinstance(p[1], list) else []


def p_param_list(p):
    '''param_list : param_list ',' param
                  | param'''
    p[0] = p[1] + [p[3]] if len(p) == 4 else [p[1]]


def p_param(p):
    '''param : type ID'''
    p[0] = (p[2], p[1])


def p_block(p):
    '''block : '{' stmts '}' '''
    p[0] = Block(tuple(p[2]), pos=_pos(p, 1))


def p_stmts(p):
    '''stmts : stmts stmt
             | empty'''
    p[0] = p[1] + [p[2]] if len(p) == 3 else []


def p_stmt_decl(p):
    '''stmt : type ID ';'
            | type ID '=' expr ';' '''
    init = p[4] if len(p) == 6 else None
    p[0] = VarDecl(p[2], p[1], init, pos=_pos(p, 2))


def p_stmt_assign(p):
    '''stmt : expr '=' expr ';' '''
    p[0] = AssignStmt(p[1], p[3], pos=_pos(p, 2))


def p_stmt_expr(p):
    '''stmt : expr ';' '''
    p[0] = ExprStmt(p[1], pos=p[1].pos)


def p_stmt_if(p):
    '''stmt : IF '(' expr ')' stmt %prec IFX
            | IF '(' expr ')' stmt ELSE stmt'''
    orelse = p[7] if len(p) == 8 else None
    p[0] = IfStmt(p[3], p[5], orelse, pos=_pos(p, 1))


def p_stmt_while(p):
    '''stmt : WHILE '(' expr ')' stmt'''
    p[0] = WhileStmt(p[3], p[5], pos=_pos(p, 1))


def p_stmt_return(p):
    '''stmt : RETURN expr ';'
            | RETURN ';' '''
    value = p[2] if len(p) == 4 else None
    p[0] = ReturnStmt(value, pos=_pos(p, 1))


def p_stmt_block(p):
    '''stmt : block'''
    p[0] = p[1]


def p_stmt_empty(p):
    '''stmt : ';' '''
    p[0] = EmptyStmt(pos=_pos(p, 1))


def p_expr_binop(p):
    '''expr : expr OR expr
            | expr AND expr
            | expr EQ expr
            | expr NE expr
            | expr LT expr
            | expr LE expr
            | expr GT expr
            | expr GE expr
            | expr '+' expr
            | expr '-' expr
            | expr '*' expr'''
    p[0] = BinOp(p[2], p[1], p[3], pos=p[1].pos)


def p_expr_unary(p):
    '''expr : '-' expr %prec UMINUS
            | '!' expr'''
    p[0] = UnaryOp(p[1], p[2], pos=_pos(p, 1))


def p_expr_addr(p):
    '''expr : '&' expr %prec UMINUS'''
    p[0] = AddrOf(p[2], pos=_pos(p, 1))


def p_expr_cast(p):
    '''expr : '(' type ')' expr %prec CAST'''
    p[0] = Cast(p[2], p[4], pos=_pos(p, 1))


def p_expr_sizeof(p):
    '''expr : SIZEOF '(' type ')'
            | SIZEOF '(' STRUCT ID ')' '''
    kind = StructOf(p[4]) if len(p) == 6 else p[3]
    p[0] = SizeOf(kind, pos=_pos(p, 1))


def p_expr_postfix(p):
    '''expr : postfix'''
    p[0] = p[1]


def p_postfix_arrow(p):
    '''postfix : postfix ARROW ID'''
    p[0] = FieldRef(p[1], p[3], pos=_pos(p, 2))


def p_postfix_index(p):
    '''postfix : postfix '[' expr ']' '.' ID'''
    p[0] = IndexField(p[1], p[3], p[6], pos=_pos(p, 2))


def p_postfix_call(p):
    '''postfix : ID '(' args ')' '''
    p[0] = CallExpr(p[1], tuple(p[3]), pos=_pos(p, 1))


def p_postfix_primary(p):
    '''postfix : primary'''
    p[0] = p[1]


def p_args(p):
    '''args : arg_list
            | empty'''
    p[0] = p[1] if p[1] is not None else []


def p_arg_list(p):
    '''arg_list : arg_list ',' expr
                | expr'''
    p[0] = p[1] + [p[3]] if len(p) == 4 else [p[1]]


def p_primary_number(p):
    '''primary : NUMBER'''
    p[0] = Num(p[1], pos=_pos(p, 1))


def p_primary_null(p):
    '''primary : NULL'''
    p[0] = Null(pos=_pos(p, 1))


def p_primary_name(p):
    '''primary : ID'''
    p[0] = Name(p[1], pos=_pos(p, 1))


def p_primary_paren(p):
    '''primary : '(' expr ')' '''
    p[0] = p[2]


def p_error(t):
    if t is None:
        raise SourceError('syntax error: unexpected end of input')
    raise SourceError('syntax error at %r' % (t.value,), t.lineno,
                      _column(t.lexer.lexdata, t.lexpos))


def _collect_locals(stmt, found=None):
    if found is None:
        found = []
    if isinstance(stmt, VarDecl):
        found.append((stmt.name, stmt.kind, stmt.pos))
    elif isinstance(stmt, Block):
        for s in stmt.stmts:
            _collect_locals(s, found)
    elif isinstance(stmt, IfStmt):
        _collect_locals(stmt.then, found)
        if stmt.orelse is not None:
            _collect_locals(stmt.orelse, found)
    elif isinstance(stmt, WhileStmt):
        _collect_locals(stmt.body, found)
    return found


_parser = None


def _get_parser():
    global _parser
    if _parser is None:
        _parser = yacc.yacc(debug=False, write_tables=False,
                            errorlog=yacc.NullLogger())
    return _parser


_lexer = None


def _get_lexer():
    global _lexer
    if _lexer is None:
        _lexer = lex.lex(errorlog=lex.NullLogger())
    return _lexer.clone()


###############################################################################
# Parsing entry point

def parse_program(source):
    """
    Parse mini-C source text.

    Args:
    source -- the program text

    Return: a Program whose functions carry AST bodies
    Raise SourceError: on syntax errors, unknown type names and duplicate
                       declarations

    """
    lexer = _get_lexer()
    lexer.lineno = 1
    prog = _get_parser().parse(source, lexer=lexer)
    functions = []
    for func in prog.functions:
        seen = set(name for name, _ in func.params)
        if len(seen) != len(func.params):
            raise _error('duplicate parameter in %s' % func.name, func)
        locals_ = []
        for name, kind, pos in func.locals:
            if name in seen:
                raise _error('duplicate declaration of %s' % name, pos=pos)
            seen.add(name)
            locals_.append((name, kind))
        functions.append(FuncDecl(func.name, func.ret, func.params,
                                  tuple(locals_), func.body, pos=func.pos))
    prog = Program(prog.records, tuple(functions), pos=prog.pos)
    _check_declarations(prog)
    logger.debug('parsed %d records and %d functions',
                 len(prog.records), len(prog.functions))
    return prog


_BUILTINS = ('malloc', 'abort')


def _check_declarations(prog):
    records = {}
    for record in prog.records:
        if record.name in records:
            raise _error('duplicate declaration of struct %s' % record.name,
                         record)
        records[record.name] = record
        names = [name for name, _ in record.fields]
        if len(set(names)) != len(names):
            raise _error('duplicate field in struct %s' % record.name, record)

    def check_kind(kind, node, what):
        if isinstance(kind, (PtrTo, StructOf)) and kind.record is not None:
            if kind.record not in records:
                raise _error('unknown type struct %s' % kind.record, node)
        if kind == VOID and what != 'return':
            raise _error('void %s' % what, node)

    for record in prog.records:
        for name, kind in record.fields:
            check_kind(kind, record, 'field')
            if kind != INT and not is_record_pointer(kind):
                raise _error('unsupported type %s for field %s' %
                             (kind, name), record)
    names = set()
    for func in prog.functions:
        if func.name in names or func.name in _BUILTINS:
            raise _error('duplicate declaration of function %s' % func.name,
                         func)
        names.add(func.name)
        check_kind(func.ret, func, 'return')
        for name, kind in func.params + func.locals:
            check_kind(kind, func, 'variable')
            if kind != INT and not is_record_pointer(kind):
                raise _error('unsupported type %s for variable %s' %
                             (kind, name), func)
        for node in _walk_ast(func.body):
            if isinstance(node, (Cast, SizeOf)):
                check_kind(node.kind, node, 'cast')


def _walk_ast(node):
    yield node
    for name in node._fields:
        value = getattr(node, name)
        children = value if isinstance(value, tuple) else (value,)
        for child in children:
            if isinstance(child, Node):
                for sub in _walk_ast(child):
                    yield sub


###############################################################################
# Pretty-printer

_BINARY_PRECEDENCE = {
    '||': 1, '&&': 2, '==': 3, '!=': 3,
    '<': 4, '<=': 4, '>': 4, '>=': 4,
    '+': 5, '-': 5, '*': 6,
}
_UNARY = 7
_POSTFIX = 8


def _expr_precedence(expr):
    if isinstance(expr, BinOp):
        return _BINARY_PRECEDENCE[expr.op]
    if isinstance(expr, (UnaryOp, AddrOf, Cast)):
        return _UNARY
    return _POSTFIX


def format_expr(expr, required=0):
    """Render an AST expression, with the parentheses it needs."""
    text = _format_expr(expr)
    if _expr_precedence(expr) < required:
        return '(%s)' % text
    return text


def _format_expr(expr):
    if isinstance(expr, Num):
        return str(expr.value)
    if isinstance(expr, Null):
        return 'NULL'
    if isinstance(expr, Name):
        return expr.id
    if isinstance(expr, BinOp):
        prec = _BINARY_PRECEDENCE[expr.op]
        return '%s %s %s' % (format_expr(expr.left, prec), expr.op,
                             format_expr(expr.right, prec + 1))
    if isinstance(expr, UnaryOp):
        return '%s%s' % (expr.op, format_expr(expr.operand, _UNARY))
    if isinstance(expr, AddrOf):
        return '&%s' % format_expr(expr.operand, _UNARY)
    if isinstance(expr, Cast):
        return '(%s)%s' % (format_kind(expr.kind),
                           format_expr(expr.operand, _UNARY))
    if isinstance(expr, SizeOf):
        return 'sizeof(%s)' % format_kind(expr.kind)
    if isinstance(expr, FieldRef):
        return '%s->%s' % (format_expr(expr.base, _POSTFIX), expr.field)
    if isinstance(expr, IndexField):
        return '%s[%s].%s' % (format_expr(expr.base, _POSTFIX),
                              format_expr(expr.index), expr.field)
    if isinstance(expr, CallExpr):
        return '%s(%s)' % (expr.func,
                           ', '.join(format_expr(a) for a in expr.args))
    raise TypeError('not an expression: %r' % (expr,))


def format_kind(kind):
    return str(kind)


def _declare(kind, name):
    text = format_kind(kind)
    if text.endswith('*'):
        return '%s%s' % (text, name)
    return '%s %s' % (text, name)


def _format_stmt(stmt, indent, out):
    pad = '    ' * indent
    if isinstance(stmt, Block):
        out.append(pad + '{')
        for s in stmt.stmts:
            _format_stmt(s, indent + 1, out)
        out.append(pad + '}')
    elif isinstance(stmt, VarDecl):
        if stmt.init is None:
            out.append('%s%s;' % (pad, _declare(stmt.kind, stmt.name)))
        else:
            out.append('%s%s = %s;' % (pad, _declare(stmt.kind, stmt.name),
                                       format_expr(stmt.init)))
    elif isinstance(stmt, AssignStmt):
        out.append('%s%s = %s;' % (pad, format_expr(stmt.target),
                                   format_expr(stmt.value)))
    elif isinstance(stmt, ExprStmt):
        out.append('%s%s;' % (pad, format_expr(stmt.expr)))
    elif isinstance(stmt, IfStmt):
        out.append('%sif (%s)' % (pad, format_expr(stmt.cond)))
        _format_body(stmt.then, indent, out)
        if stmt.orelse is not None:
            out.append(pad + 'else')
            _format_body(stmt.orelse, indent, out)
    elif isinstance(stmt, WhileStmt):
        out.append('%swhile (%s)' % (pad, format_expr(stmt.cond)))
        _format_body(stmt.body, indent, out)
    elif isinstance(stmt, ReturnStmt):
        if stmt.value is None:
            out.append(pad + 'return;')
        else:
            out.append('%sreturn %s;' % (pad, format_expr(stmt.value)))
    elif isinstance(stmt, EmptyStmt):
        out.append(pad + ';')
    else:
        raise TypeError('not a statement: %r' % (stmt,))


def _format_body(stmt, indent, out):
    _format_stmt(stmt, indent if isinstance(stmt, Block) else indent + 1, out)


def format_program(prog):
    """
    Render a parsed (not lowered) program as mini-C source text.
    """
    out = []
    for record in prog.records:
        out.append('struct %s {' % record.name)
        for name, kind in record.fields:
            out.append('    %s;' % _declare(kind, name))
        out.append('};')
        out.append('')
    for func in prog.functions:
        params = ', '.join(_declare(k, n) for n, k in func.params) or 'void'
        out.append('%s(%s)' % (_declare(func.ret, func.name), params))
        _format_stmt(func.body, 0, out)
        out.append('')
    return '\n'.join(out)


###############################################################################
# Lowering

_COMPARISONS = ('==', '!=', '<', '<=', '>', '>=')


def _is_call(expr, name=None):
    return isinstance(expr, CallExpr) and (name is None or expr.func == name)


def _strip_casts(expr):
    kind = None
    while isinstance(expr, Cast):
        if kind is None:
            kind = expr.kind
        expr = expr.operand
    return kind, expr


def has_load(expr):
    """Tell whether evaluating *expr* reads the heap or calls a function."""
    if isinstance(expr, (FieldRef, IndexField)):
        return True
    if isinstance(expr, AddrOf):
        operand = expr.operand
        if isinstance(operand, (FieldRef, IndexField)):
            return has_load(operand.base)
        return has_load(operand)
    if isinstance(expr, CallExpr):
        return True
    return any(has_load(getattr(expr, name)) for name in expr._fields
               if isinstance(getattr(expr, name), Node))


class _FunctionLowering(object):

    def __init__(self, records, functions, func):
        self._records = records
        self._functions = functions
        self._env = dict(func.params + func.locals)
        self.temporaries = []

    def _temp(self, kind):
        name = '%%t%d' % (len(self.temporaries) + 1)
        self._env[name] = kind
        self.temporaries.append((name, kind))
        return name

    # Types

    def _record(self, kind, node):
        if not is_record_pointer(kind):
            raise _error('field access through a value of type %s' % (kind,),
                         node)
        return self._records[kind.record]

    def _field(self, record, name, node):
        for offset, (field, kind) in enumerate(record.fields):
            if field == name:
                return offset, kind
        raise _error('struct %s has no field %s' % (record.name, name), node)

    def _size(self, kind):
        if isinstance(kind, StructOf):
            return len(self._records[kind.record].fields)
        return 1

    def _scale(self, kind):
        if is_record_pointer(kind):
            return len(self._records[kind.record].fields)
        return 1

    # Expressions

    def constant(self, expr):
        """Fold *expr* to an int, or return None."""
        if isinstance(expr, Num):
            return expr.value
        if isinstance(expr, Null):
            return 0
        if isinstance(expr, SizeOf):
            return self._size(expr.kind)
        if isinstance(expr, Cast):
            return self.constant(expr.operand)
        if isinstance(expr, UnaryOp) and expr.op == '-':
            value = self.constant(expr.operand)
            return None if value is None else -value
        if isinstance(expr, BinOp) and expr.op in ('+', '-', '*'):
            left = self.constant(expr.left)
            right = self.constant(expr.right)
            if left is None or right is None:
                return None
            if expr.op == '+':
                return left + right
            if expr.op == '-':
                return left - right
            return left * right
        return None

    def value(self, expr, hint=None):
        """
        Lower a value expression.

        Return: (statements, term, kind) where the statements compute the
        heap reads the value depends on
        """
        if isinstance(expr, Cast):
            _, inner = _strip_casts(expr)
            if _is_call(inner, 'malloc'):
                target = self._temp(expr.kind)
                return ([self.malloc(target, inner, expr.kind, expr.pos)],
                        Term(target), expr.kind)
            pre, term, _ = self.value(expr.operand)
            return pre, term, expr.kind
        constant = self.constant(expr)
        if constant is not None:
            kind = PtrTo(None) if isinstance(expr, Null) else INT
            return [], Term(None, constant), kind
        if isinstance(expr, Name):
            if expr.id not in self._env:
                raise _error('undeclared identifier %s' % expr.id, expr)
            return [], Term(expr.id), self._env[expr.id]
        if isinstance(expr, (FieldRef, IndexField)):
            pre, addr, kind = self.address(expr)
            target = self._temp(kind)
            return pre + [Load(target, addr, pos=expr.pos)], Term(target), kind
        if isinstance(expr, AddrOf):
            if not isinstance(expr.operand, (FieldRef, IndexField)):
                raise _error('address of a non-field expression', expr)
            pre, addr, _ = self.address(expr.operand)
            return pre, addr, PtrTo(None)
        if isinstance(expr, BinOp) and expr.op in ('+', '-'):
            right = self.constant(expr.right)
            if right is not None:
                pre, term, kind = self.value(expr.left)
                step = right * self._scale(kind)
                term = term + step if expr.op == '+' else term - step
                return pre, term, kind
            left = self.constant(expr.left)
            if left is not None and expr.op == '+':
                pre, term, kind = self.value(expr.right)
                return pre, term + left * self._scale(kind), kind
            raise _error('arithmetic on two variables is not supported', expr)
        if isinstance(expr, BinOp) and expr.op == '*':
            raise _error('non-constant multiplier in address arithmetic',
                         expr)
        if _is_call(expr, 'malloc'):
            kind = hint if is_record_pointer(hint) else PtrTo(None)
            target = self._temp(kind)
            return ([self.malloc(target, expr, kind, expr.pos)],
                    Term(target), kind)
        if _is_call(expr):
            func = self._callee(expr)
            if func.ret == VOID:
                raise _error('void function %s used as a value' % func.name,
                             expr)
            target = self._temp(func.ret)
            return [self.call(target, expr)], Term(target), func.ret
        raise _error('unsupported expression %s' % format_expr(expr), expr)

    def address(self, expr):
        """Lower a field designator to (statements, address, field kind)."""
        if isinstance(expr, FieldRef):
            pre, base, kind = self.value(expr.base)
            record = self._record(kind, expr)
            offset, field_kind = self._field(record, expr.field, expr)
            return pre, base + offset, field_kind
        index = self.constant(expr.index)
        if index is None:
            raise _error('non-constant array subscript', expr)
        pre, base, kind = self.value(expr.base)
        record = self._record(kind, expr)
        offset, field_kind = self._field(record, expr.field, expr)
        return pre, base + (index * len(record.fields) + offset), field_kind

    def malloc(self, target, call, kind, pos):
        if len(call.args) != 1:
            raise _error('malloc takes one argument', call)
        count = self.constant(call.args[0])
        if count is not None:
            count = Term(None, count)
        else:
            pre, count, _ = self.value(call.args[0])
            if pre or count.offset != 0:
                raise _error('unsupported malloc size', call)
        record = kind.record if is_record_pointer(kind) else None
        return Malloc(target, count, record, pos=pos)

    def _callee(self, call):
        if call.func in _BUILTINS:
            raise _error('%s cannot be used here' % call.func, call)
        if call.func not in self._functions:
            raise _error('call to undefined function %s' % call.func, call)
        func = self._functions[call.func]
        if len(func.params) != len(call.args):
            raise _error('%s expects %d arguments' %
                         (func.name, len(func.params)), call)
        return func

    def call(self, target, call):
        func = self._callee(call)
        pre = []
        args = []
        for arg in call.args:
            stmts, term, _ = self.value(arg)
            pre.extend(stmts)
            args.append(term)
        return seq(*(pre + [Call(target, func.name, tuple(args),
                                 pos=call.pos)]))

    # Conditions

    def cond(self, expr):
        """Lower a condition to (statements, Cond)."""
        if isinstance(expr, BinOp) and expr.op in ('&&', '||'):
            pre1, left = self.cond(expr.left)
            pre2, right = self.cond(expr.right)
            node = CondAnd if expr.op == '&&' else CondOr
            return pre1 + pre2, node(left, right, pos=expr.pos)
        if isinstance(expr, UnaryOp) and expr.op == '!':
            pre, operand = self.cond(expr.operand)
            return pre, CondNot(operand, pos=expr.pos)
        if isinstance(expr, BinOp) and expr.op in _COMPARISONS:
            pre1, lhs, _ = self.value(expr.left)
            pre2, rhs, _ = self.value(expr.right)
            return pre1 + pre2, Compare(expr.op, lhs, rhs, pos=expr.pos)
        pre, term, _ = self.value(expr)
        return pre, Compare('!=', term, Term(None, 0), pos=expr.pos)

    def branch(self, cond, then, orelse, pos):
        if not has_load(cond):
            _, lowered = self.cond(cond)
            return If(lowered, then, orelse, pos=pos)
        if isinstance(cond, BinOp) and cond.op == '&&':
            inner = self.branch(cond.right, then, orelse, cond.right.pos)
            return self.branch(cond.left, inner, orelse, pos)
        if isinstance(cond, BinOp) and cond.op == '||':
            inner = self.branch(cond.right, then, orelse, cond.right.pos)
            return self.branch(cond.left, then, inner, pos)
        if isinstance(cond, UnaryOp) and cond.op == '!':
            return self.branch(cond.operand, orelse, then, pos)
        pre, lowered = self.cond(cond)
        return seq(*(pre + [If(lowered, then, orelse, pos=pos)]))

    # Statements

    def assign_var(self, name, expr, pos):
        if name not in self._env:
            raise _error('undeclared identifier %s' % name, pos=pos)
        kind = self._env[name]
        cast, inner = _strip_casts(expr)
        if _is_call(inner, 'malloc'):
            return self.malloc(name, inner, cast or kind, pos)
        if _is_call(inner) and inner.func not in _BUILTINS:
            return self.call(name, inner)
        if isinstance(inner, (FieldRef, IndexField)):
            pre, addr, _ = self.address(inner)
            return seq(*(pre + [Load(name, addr, pos=pos)]))
        pre, term, _ = self.value(expr, hint=kind)
        return seq(*(pre + [Assign(name, term, pos=pos)]))

    def stmt(self, s):
        if isinstance(s, Block):
            return seq(*[self.stmt(sub) for sub in s.stmts])
        if isinstance(s, VarDecl):
            if s.init is None:
                return Skip(pos=s.pos)
            return self.assign_var(s.name, s.init, s.pos)
        if isinstance(s, AssignStmt):
            if isinstance(s.target, Name):
                return self.assign_var(s.target.id, s.value, s.pos)
            if isinstance(s.target, (FieldRef, IndexField)):
                pre, addr, kind = self.address(s.target)
                more, term, _ = self.value(s.value, hint=kind)
                return seq(*(pre + more + [Store(addr, term, pos=s.pos)]))
            raise _error('invalid assignment target', s)
        if isinstance(s, ExprStmt):
            if _is_call(s.expr, 'abort'):
                return Abort(pos=s.pos)
            if _is_call(s.expr) and s.expr.func != 'malloc':
                return self.call(None, s.expr)
            pre, _, _ = self.value(s.expr)
            return seq(*pre)
        if isinstance(s, IfStmt):
            then = self.stmt(s.then)
            orelse = Skip() if s.orelse is None else self.stmt(s.orelse)
            return self.branch(s.cond, then, orelse, s.pos)
        if isinstance(s, WhileStmt):
            if has_load(s.cond):
                raise _error('field access in a loop condition is not '
                             'supported', s)
            _, cond = self.cond(s.cond)
            return While(cond, self.stmt(s.body), pos=s.pos)
        if isinstance(s, ReturnStmt):
            if s.value is None:
                return Return(None, pos=s.pos)
            pre, term, _ = self.value(s.value)
            return seq(*(pre + [Return(term, pos=s.pos)]))
        if isinstance(s, EmptyStmt):
            return Skip(pos=s.pos)
        raise _error('unsupported statement', s)


def lower(prog):
    """
    Lower the function bodies of a parsed program to the statement IR.

    Args:
    prog -- a Program returned by parse_program

    Return: a Program with the same records and IR bodies; the
    temporaries of a function are appended to its locals
    Raise SourceError: on undeclared identifiers, non-constant subscripts
                       or multipliers and unsupported constructs
    """
    records = dict((r.name, r) for r in prog.records)
    functions = dict((f.name, f) for f in prog.functions)
    lowered = []
    for func in prog.functions:
        lowering = _FunctionLowering(records, functions, func)
        body = lowering.stmt(func.body)
        locals_ = func.locals + tuple(lowering.temporaries)
        lowered.append(FuncDecl(func.name, func.ret, func.params,
                                locals_, body, pos=func.pos))
    return Program(prog.records, tuple(lowered), pos=prog.pos)


def load_program(source):
    """Parse and lower *source* in one go."""
    return lower(parse_program(source))
