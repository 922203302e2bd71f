"""Build the optional compiled kernel core.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); the extension only accelerates the hot numerical
kernels.  Build it in place with

    pip install -e . --no-build-isolation
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "ctpfield._core._fast",
                ["src/ctpfield/_core/_fast.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
