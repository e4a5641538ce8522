import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("ISW_SKIP_EXT"):
    ext_modules = cythonize(
        [Extension("isw._kernel._speedups", ["src/isw/_kernel/_speedups.pyx"])],
        language_level="3",
    )

setup(ext_modules=ext_modules)
