"""Build hook for the optional compiled kernel.

The package works without the extension: psl2rep._core falls back to the
pure-Python kernel when psl2rep._kernel is missing or fails to build.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("psl2rep._kernel", ["src/psl2rep/_kernel.pyx"])],
        language_level=3,
    )
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
