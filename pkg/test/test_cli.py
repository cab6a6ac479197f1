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

import io
import json

import pytest

from dsverify.cli import (
    EXIT_ERROR, EXIT_SAFE, EXIT_UNSAFE, Config, parse_args, run
)
from dsverify.oracle import DEFAULT_BOUNDS, Bounds
from dsverify.report import JSON, NO, YES, analyze_program
from dsverify.vcgen import MALLOC, ZMALLOC

from .helpers import (
    LIBRARY_FUNCTIONS, STRUCTURES, UNSAFE_VARIANTS, corpus_name,
    get_absolute_file_path, load_corpus
)


def data_path(name):
    return get_absolute_file_path('data', name)


def run_file(path, **options):
    out = io.StringIO()
    code = run(Config(**options), path, out)
    return code, out.getvalue()


###############################################################################
# Verdicts

@pytest.mark.corpus
@pytest.mark.parametrize("structure", STRUCTURES)
def test_safe_variant(structure):
    code, text = run_file(data_path(corpus_name('safe', structure)))
    assert code == EXIT_SAFE, text
    assert 'D: 3/3  M: 3/3' in text


@pytest.mark.corpus
@pytest.mark.parametrize("structure", STRUCTURES)
@pytest.mark.parametrize("variant", UNSAFE_VARIANTS)
def test_unsafe_variant(variant, structure):
    code, text = run_file(data_path(corpus_name(variant, structure)))
    assert code == EXIT_UNSAFE, text


@pytest.mark.corpus
def test_list_library_with_zmalloc():
    code, text = run_file(data_path('list_library.mc'), mode=ZMALLOC)
    assert code == EXIT_SAFE, text
    assert 'D: 8/8  M: 8/8' in text


@pytest.mark.corpus
def test_list_library_with_malloc():
    program, schema = load_corpus('list_library.mc')
    report = analyze_program(program, schema, MALLOC)
    assert [f.name for f in report.functions] == list(LIBRARY_FUNCTIONS)
    assert report.function('append').d_safe == NO
    assert report.function('append').mem_safe == YES
    others = [f for f in report.functions if f.name != 'append']
    assert all(f.safe for f in others)
    assert report.exit_code == EXIT_UNSAFE


def test_empty_program(tmp_path):
    path = tmp_path / 'empty.mc'
    path.write_text('/* nothing to check */\n', encoding='utf-8')
    code, text = run_file(str(path))
    assert code == EXIT_SAFE
    assert text.splitlines()[-1].startswith('D: 0/0  M: 0/0')


###############################################################################
# Output

def test_json_report():
    code, text = run_file(data_path('make_bad.mc'), output=JSON,
                          functions=['make_bad', 'set'])
    assert code == EXIT_UNSAFE
    data = json.loads(text)
    assert data['schema_version'] == 1
    assert data['mode'] == MALLOC
    assert [f['name'] for f in data['functions']] == ['make_bad', 'set']
    bad = data['functions'][0]
    assert bad['d_safe'] == NO
    assert bad['failures'][0]['kind'] == 'dpreserve'
    assert bad['failures'][0]['status'] == 'invalid'
    assert 'counterexample' not in bad
    assert data['totals']['functions'] == 2
    assert data['totals']['d_safe'] == 1
    assert data['totals']['mem_safe'] == 2


def test_text_report_lists_failures():
    code, text = run_file(data_path('make_bad.mc'), functions=['make_bad'])
    lines = text.splitlines()
    assert lines[0].split() == ['function', 'D', 'M', 'VCs']
    assert lines[1].split()[:3] == ['make_bad', NO, YES]
    assert lines[2].startswith('  invalid ')
    assert 'make_bad: D-preserve entry -> exit' in lines[2]


def test_dump_rules_and_conditions():
    code, text = run_file(data_path('safe_list.mc'), dump_rules=True,
                          dump_vcs=True, functions=['set'])
    assert code == EXIT_SAFE
    assert '# integrity rules' in text
    assert '# negation rewrites' in text
    assert '# set: ' in text
    assert '[memsafety] set: write of xs' in text


def test_trace():
    code, text = run_file(data_path('safe_list.mc'), trace=True,
                          functions=['set'])
    assert code == EXIT_SAFE
    assert '# set: read of xs+1' in text
    assert 'false (' in text


def test_dynamic_check():
    code, text = run_file(data_path('make_bad.mc'), dynamic=True,
                          oracle_bounds=4)
    assert code == EXIT_UNSAFE
    assert '  concrete: call(' in text
    data = json.loads(run_file(data_path('make_bad.mc'), dynamic=True,
                               output=JSON)[1])
    checked = dict((f['name'], 'counterexample' in f)
                   for f in data['functions'])
    assert checked == {'make_bad': True, 'set': False, 'exploit': True}


###############################################################################
# Command line and errors

def test_parse_args():
    config, path = parse_args(['--zmalloc', '--json', '--func', 'set',
                               '--func', 'test', '--timeout', '2.5',
                               '--budget', '100', '-vv', 'file.mc'])
    assert path == 'file.mc'
    assert config.mode == ZMALLOC
    assert config.output == JSON
    assert config.functions == ['set', 'test']
    assert config.timeout == 2.5
    assert config.budget == 100
    assert config.verbosity == 2
    assert not config.dynamic


def test_parse_oracle_bounds():
    config, _ = parse_args(['--oracle-bounds', '3', 'file.mc'])
    assert config.dynamic
    assert config.oracle_bounds == 3
    assert config.bounds == Bounds(max_addr=3)
    assert Config().bounds == DEFAULT_BOUNDS


@pytest.mark.parametrize("argv", [
    ['--timeout', '0', 'file.mc'],
    ['--budget', 'many', 'file.mc'],
    ['--oracle-bounds', '-1', 'file.mc'],
    [],
])
def test_bad_arguments(argv, capsys):
    with pytest.raises(SystemExit) as excinfo:
        parse_args(argv)
    assert excinfo.value.code == 2
    assert 'dsverify' in capsys.readouterr().err


@pytest.mark.parametrize("options", [
    {'mode': 'calloc'}, {'output': 'xml'}, {'timeout': 0}, {'budget': -1},
    {'oracle_bounds': 0},
])
def test_bad_config(options):
    with pytest.raises(ValueError):
        Config(**options)


def test_missing_file(tmp_path, capsys):
    code, text = run_file(str(tmp_path / 'missing.mc'))
    assert code == EXIT_ERROR
    assert text == ''
    assert 'missing.mc' in capsys.readouterr().err


def test_syntax_error(tmp_path, capsys):
    path = tmp_path / 'broken.mc'
    path.write_text('void f( {\n', encoding='utf-8')
    code, _ = run_file(str(path))
    assert code == EXIT_ERROR
    assert capsys.readouterr().err.startswith('dsverify: ')


def test_schema_error(tmp_path, capsys):
    path = tmp_path / 'empty_record.mc'
    path.write_text('struct empty { };\n', encoding='utf-8')
    code, _ = run_file(str(path))
    assert code == EXIT_ERROR
    assert 'record has no fields' in capsys.readouterr().err


def test_unknown_function(capsys):
    code, _ = run_file(data_path('safe_list.mc'), functions=['missing'])
    assert code == EXIT_ERROR
    assert 'no function' in capsys.readouterr().err
