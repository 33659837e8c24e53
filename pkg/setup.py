"""Build the optional Cython kernels; the package falls back to pure Python
when the extension cannot be compiled."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("XGRAPH_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "xgraph._kernels",
                    ["src/xgraph/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
