import os

from setuptools import setup

ext_modules = []
if os.environ.get("LIFTCSP_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/liftcsp/_speedups.pyx"],
            language_level=3,
        )
    except ImportError:
        # No Cython: install the pure-Python backend only.
        ext_modules = []

setup(ext_modules=ext_modules)
