# -*- coding: utf-8 -*-
#
# Sphinx configuration of the noethercheck documentation.

import sys
import os
import sphinx
from sphinx.errors import VersionRequirementError

sys.path.insert(0, os.path.abspath(".."))

needs_sphinx = "1.4.3"
if needs_sphinx > sphinx.__display_version__:
    message = "This project needs at least Sphinx v%s" % needs_sphinx
    raise VersionRequirementError(message)

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.intersphinx",
    "sphinx.ext.viewcode",
    "sphinx.ext.napoleon",
    "sphinx.ext.autosummary",
    "sphinx.ext.mathjax",
    "sphinx.ext.autosectionlabel",
]

autodoc_member_order = "bysource"

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "sympy": ("https://docs.sympy.org/latest/", None),
}

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = u"noethercheck"
copyright = u"2026, the noethercheck developers"
author = u"the noethercheck developers"

import noethercheck

version = "%s" % (noethercheck.__version__)

language = "en"
exclude_patterns = ["_build", "whitepaper"]
pygments_style = "sphinx"
todo_include_todos = False

import sphinx_rtd_theme

html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]
html_theme = "sphinx_rtd_theme"
html_static_path = []
htmlhelp_basename = "noethercheck_doc"
