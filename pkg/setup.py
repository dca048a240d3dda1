"""Builds the optional compiled kernels; the package works without them."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("MIRRORBENCH_NO_EXT") != "1":
    try:
        import numpy  # noqa: F401
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            ["src/mirrorbench/sim/_kernels.pyx"],
            compiler_directives={"language_level": 3},
            quiet=True,
        )
        for ext in ext_modules:
            ext.extra_compile_args = ["-O3"]

setup(ext_modules=ext_modules)
