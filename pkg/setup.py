"""Build script for the compiled stepping kernels.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile should not make the install unusable.
Set CATFLOW_REQUIRE_EXT=1 to turn a compile failure into a hard error.
"""
import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build environments without Cython
    cythonize = None


def extensions():
    if cythonize is None:
        return []
    ext = Extension(
        "catflow._kernels._core",
        ["src/catflow/_kernels/_core.pyx"],
        extra_compile_args=["-O2"],
    )
    try:
        return cythonize([ext], language_level="3")
    except Exception:
        if os.environ.get("CATFLOW_REQUIRE_EXT"):
            raise
        return []


setup(ext_modules=extensions())
