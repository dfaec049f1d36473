"""Build script: compiles the optional C sampling core.

The package is pure Python plus one optional Cython extension
(``pjmp._kernels_c``) holding the per-event simulation loops.  If Cython
or a C compiler is unavailable the build falls back to the pure-Python
twin (``pjmp._kernels_py``) selected at import time; everything still
works, only slower.  Set PJMP_SKIP_EXT=1 to force the pure build.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("PJMP_SKIP_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "pjmp._kernels_c",
                    sources=["src/pjmp/_kernels_c.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
