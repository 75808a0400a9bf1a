# Configuration file for the Sphinx documentation builder.

# -- Project information -----------------------------------------------------
project = "gaugecheck"
copyright = "2025, gaugecheck developers"
author = "gaugecheck developers"
version = "0.0"
release = "0.0.1"

# -- General configuration ---------------------------------------------------
extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.napoleon",
    "sphinx.ext.mathjax",
]

# HTML options
html_theme = "sphinx_rtd_theme"
