#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# radical_jumps documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.
import os
import sys

sys.path.insert(0, os.path.abspath("../src"))


# -- General configuration ---------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.viewcode",
    "sphinx.ext.napoleon",
    "sphinx_autodoc_typehints",
]

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = "radical_jumps"
copyright = "2026, radical-jumps developers"
author = "radical-jumps developers"

language = "en"
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]
pygments_style = "sphinx"
todo_include_todos = False


# -- Options for HTML output -------------------------------------------

html_theme = "sphinx_rtd_theme"
htmlhelp_basename = "radical_jumpsdoc"


# -- Options for LaTeX output ------------------------------------------

latex_elements: dict = {}
latex_documents = [
    (
        master_doc,
        "radical_jumps.tex",
        "radical_jumps Documentation",
        author,
        "manual",
    )
]


# -- Options for manual page output ------------------------------------

man_pages = [(master_doc, "radical_jumps", "radical_jumps Documentation", [author], 1)]
