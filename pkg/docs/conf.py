#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# helmpy documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.
#
import os
import sys

sys.path.insert(0, os.path.abspath('..'))

import helmpy


# -- General configuration ---------------------------------------------

extensions = ['sphinx.ext.autodoc',
              'sphinx.ext.viewcode',
              'sphinx.ext.autosectionlabel',
              'sphinx.ext.napoleon',
              'sphinx.ext.mathjax',
              'sphinx.ext.todo',
              'recommonmark']

templates_path = ['_templates']

source_suffix = ['.rst', '.md']

# The master toctree document.
master_doc = 'index'

# General information about the project.
project = u'helmpy'
copyright = u"2026, helmpy developers"
author = u"helmpy developers"

# The short X.Y version.
version = helmpy.__version__
# The full version, including alpha/beta/rc tags.
release = helmpy.__version__

language = None

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

autodoc_default_flags = ['members', 'undoc-members', 'show-inheritance']
# The name of the Pygments (syntax highlighting) style to use.
pygments_style = 'sphinx'

# If true, `todo` and `todoList` produce output, else they produce nothing.
todo_include_todos = True

autosectionlabel_prefix_document = True


# -- Options for HTML output -------------------------------------------

html_theme = 'alabaster'

htmlhelp_basename = 'helmpydoc'


# -- Options for LaTeX output ------------------------------------------

latex_documents = [
    (master_doc, 'helmpy.tex',
     u'helmpy Documentation',
     u'helmpy developers', 'manual'),
]


# -- Options for manual page output ------------------------------------

man_pages = [
    (master_doc, 'helmpy',
     u'helmpy Documentation',
     [author], 1)
]
