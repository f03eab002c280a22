"""Build script: compiles the optional Cython posting kernels.

If Cython is unavailable the package installs pure-Python only; the
kernel selection in ranklens._kernels falls back automatically.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "ranklens._kernels._speedups",
                sources=["src/ranklens/_kernels/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
