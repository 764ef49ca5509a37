"""Build script: compiles the optional Cython kernel lane.

The package works without the extension (the numpy lane is selected at
import time), so a failed compile only costs speed, not correctness.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "aronsson_lab._kernels._fast",
                ["src/aronsson_lab/_kernels/_fast.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
