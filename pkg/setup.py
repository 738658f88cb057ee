"""Build script for the optional Cython extension.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes the likelihood kernels faster.
"""

from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension("qufit._kernels._core", ["src/qufit/_kernels/_core.pyx"]),
]

setup(ext_modules=cythonize(extensions, language_level=3))
