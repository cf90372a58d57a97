"""Build script: compiles the clipping kernel extension when Cython is available.

The package works without the extension (a pure-Python fallback ships in
varifold_lab._kernels); the extension only accelerates the hot loops.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("VARIFOLD_LAB_SKIP_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            "src/varifold_lab/_kernels/_clipcore.pyx",
            language_level="3",
        )
        for ext in ext_modules:
            ext.include_dirs.append(numpy.get_include())
            ext.define_macros.append(("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION"))
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
