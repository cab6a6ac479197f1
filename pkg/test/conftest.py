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

"""Local pytest hooks for the dsverify testsuite."""

import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--skip-corpus", action="store_true", default=False,
        help="skip the end-to-end runs over the mini-C corpus in test/data")


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "corpus: analyzes or runs whole files of the mini-C corpus")


def pytest_collection_modifyitems(config, items):
    if not config.getoption("--skip-corpus"):
        return
    skip = pytest.mark.skip(reason="--skip-corpus given")
    for item in items:
        if "corpus" in item.keywords:
            item.add_marker(skip)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Reporting hook which makes all tests be treated as having failed
       if they wrote anything to stdout or stderr.  The analysis reports
       on streams passed to it and logs through the logging module, and
       ply is built with null loggers, so any stray output is a bug.
    """

    report = (yield).get_result()
    if not hasattr(report, "outcome") or not hasattr(report, "sections"):
        return
    if report.outcome != "passed":
        return

    for label, content in report.sections:
        if (
                content
                and ("stdout" in label or "stderr" in label)
                and call.when in label
        ):
            report.outcome = "failed"
            report.longrepr = "test wrote to %s:\n%s" % (label, content)
