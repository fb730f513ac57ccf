"""Sphinx configuration for the scenario-se docs."""

import importlib.util
import sys
from pathlib import Path

# autodoc imports the package from the source tree
sys.path.insert(0, str(Path("../src").resolve()))


project = "Scenario SE"
copyright = "2025, Micael Jarniac"  # noqa: A001
author = "Micael Jarniac"


extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.doctest",
    "sphinx.ext.intersphinx",
    "sphinx.ext.viewcode",
    "myst_parser",
]

# Spelling is only checked where the extension is installed.
if importlib.util.find_spec("sphinxcontrib.spelling") is not None:
    extensions.append("sphinxcontrib.spelling")

spelling_word_list_filename = "wordlist.txt"

autodoc_member_order = "bysource"
autodoc_typehints = "description"
napoleon_google_docstring = True
napoleon_numpy_docstring = False

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable", None),
    "torch": ("https://pytorch.org/docs/stable", None),
}

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]
source_suffix = [".rst", ".md"]

html_theme = "furo"
html_title = "Scenario SE"
