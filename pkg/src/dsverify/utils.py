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
Small helpers shared by the analyzer modules.
"""

import itertools
import time


class FreshNames(object):

    """
    A monotone source of fresh variable names.

    Names are built as ``<prefix>@<n>``, which cannot clash with a mini-C
    identifier.  One instance is used per verification condition so that
    the names printed in traces are stable from run to run.
    """

    def __init__(self, start=1):
        self._counter = itertools.count(start)

    def __call__(self, prefix='v'):
        """
        Return a new name.

        Args:
        prefix -- the readable part of the name

        Return: a name never returned before by this instance
        """
        return '%s@%d' % (prefix, next(self._counter))


def versioned(name, version):
    """
    Name of the *version*-th symbolic copy of a program variable or heap.

    Version 0 is the name itself, version 1 is ``name'``, and later
    versions carry their number: ``name'2``, ``name'3``...
    """
    if version == 0:
        return name
    if version == 1:
        return "%s'" % name
    return "%s'%d" % (name, version)


class Deadline(object):

    """
    A wall-clock deadline.  A timeout of None never expires.
    """

    def __init__(self, timeout=None):
        self._timeout = timeout
        self._start = time.monotonic()

    @property
    def elapsed(self):
        return time.monotonic() - self._start

    def expired(self):
        return self._timeout is not None and self.elapsed > self._timeout


def unique(iterable):
    """Yield the items of *iterable* once each, keeping the first order."""
    seen = set()
    for item in iterable:
        if item not in seen:
            seen.add(item)
            yield item
