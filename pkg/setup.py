"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here degrades to the pure-Python kernels.
Build in place with:  python3 setup.py build_ext --inplace
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "snmoments.kernels._apply_cy",
                ["src/snmoments/kernels/_apply_cy.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
