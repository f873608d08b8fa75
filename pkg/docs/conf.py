# cakemoist documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import sys
import os

# -- General configuration ------------------------------------------------

extensions = [
        'sphinx.ext.intersphinx',
        'sphinx.ext.mathjax',
]

intersphinx_mapping = {
    'numpy': ('https://numpy.org/doc/stable/', None),
    'h5py': ('https://docs.h5py.org/en/stable/', None),
}

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'cakemoist'
copyright = '2026, the cakemoist contributors'

# The full version, including alpha/beta/rc tags.
release = '1.0.0'
# The short X.Y version.
version = '.'.join(release.split('.')[:2])

exclude_patterns = ['_build']
pygments_style = 'sphinx'

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'
htmlhelp_basename = 'cakemoistdoc'

# -- Options for manual page output ---------------------------------------

man_pages = [
    ('cli', 'cakemoist', 'cakemoist command-line tool',
     ['the cakemoist contributors'], 1)
]
