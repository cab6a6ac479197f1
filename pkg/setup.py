#! /usr/bin/env python3
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

import os
import re
from setuptools import setup, find_packages

TOPSRCDIR = os.path.dirname(os.path.abspath(__file__))


def read_long_description():
    with open(os.path.join(TOPSRCDIR, "DESCRIPTION.rst"),
              encoding="utf-8") as f:
        return f.read()


def read_version():
    # The version lives in the package; importing it would need ply.
    with open(os.path.join(TOPSRCDIR, "src", "dsverify", "__init__.py"),
              encoding="utf-8") as f:
        text = f.read()
    m = re.search(r'^version_info = \((\d+), (\d+), (\d+)(?:, "(\w+)")?\)',
                  text, re.M)
    if not m:
        raise RuntimeError("cannot find version_info in dsverify/__init__.py")
    version = '.'.join(m.group(1, 2, 3))
    if m.group(4):
        version += '.' + m.group(4)
    return version


setup(
    name='dsverify',
    version=read_version(),
    description='Shape-neutral data-structure integrity and memory safety '
                'checking for a small subset of C',
    long_description=read_long_description(),
    long_description_content_type='text/x-rst',
    author='The dsverify developers',
    license='GPL-3',

    python_requires='>= 3.7',
    packages=find_packages('src'),
    package_dir={'': 'src'},
    install_requires=['ply >= 3.11'],
    tests_require=['pytest'],
    entry_points={
        'console_scripts': ['dsverify=dsverify.cli:main'],
    },

    # See https://pypi.python.org/pypi?%3Aaction=list_classifiers
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Developers',
        'Intended Audience :: Science/Research',
        'Topic :: Software Development :: Quality Assurance',
        'License :: OSI Approved :: GNU General Public License v3 (GPLv3)',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
    ],
    keywords='static analysis verification memory safety data structures C',
)
