# -*- coding: utf-8 -*-
#
# dsverify documentation build configuration file, created by
# sphinx-quickstart.
#
# This file is execfile()d with the current directory set to its
# containing dir.
#
# All configuration values have a default; values that are commented out
# serve to show the default.

import sys
import os

# The package lives under src/; autodoc imports it from there.
sys.path.insert(0, os.path.abspath(os.path.join('..', 'src')))

# -- General configuration -----------------------------------------------------

# Add any Sphinx extension module names here, as strings.
extensions = ['sphinx.ext.autodoc', 'sphinx.ext.doctest']

# Add any paths that contain templates here, relative to this directory.
templates_path = ['_templates']

# The suffix of source filenames.
source_suffix = '.rst'

# The master toctree document.
master_doc = 'index'

# General information about the project.
project = u'dsverify'
copyright = u'2020-2021 The dsverify developers'

# The short X.Y version and the full version, including alpha/beta/rc tags.
from dsverify import __version__ as release  # noqa: E402
version = '.'.join(release.split('.')[:2])

# List of patterns, relative to source directory, that match files and
# directories to ignore when looking for source files.
exclude_patterns = ['_build']

# The name of the Pygments (syntax highlighting) style to use.
pygments_style = 'sphinx'

# Members are documented in source order, as the modules read.
autodoc_member_order = 'bysource'

# -- Options for HTML output ---------------------------------------------------

html_theme = 'default'

# Add any paths that contain custom static files (such as style sheets) here,
# relative to this directory.
html_static_path = ['_static']

# Output file base name for HTML help builder.
htmlhelp_basename = 'dsverifydoc'

# -- Options for LaTeX output --------------------------------------------------

latex_elements = {
}

# Grouping the document tree into LaTeX files. List of tuples
# (source start file, target name, title, author, documentclass).
latex_documents = [
  ('index', 'dsverify.tex', u'dsverify Documentation',
   u'The dsverify developers', 'manual'),
]

# -- Options for manual page output --------------------------------------------

# One entry per manual page. List of tuples
# (source start file, name, description, authors, manual section).
man_pages = [
    ('tutorial', 'dsverify', u'check data-structure integrity of mini-C',
     [u'The dsverify developers'], 1)
]

# -- Options for Texinfo output ------------------------------------------------

texinfo_documents = [
  ('index', 'dsverify', u'dsverify Documentation',
   u'The dsverify developers', 'dsverify',
   'Shape-neutral data-structure integrity checking.',
   'Miscellaneous'),
]
