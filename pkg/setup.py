"""Build script for the optional compiled SGNS kernels.

The extension is optional: if Cython or a C compiler is missing, or the
build fails, the package installs without it and ``itemvec.kernels`` falls
back to the pure-Python implementation.
"""
import os
import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled kernels not built ({exc}); using pure Python", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc}); using pure Python", file=sys.stderr)


def extensions():
    if os.environ.get("ITEMVEC_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []

    openmp = [] if os.environ.get("ITEMVEC_NO_OPENMP") else ["-fopenmp"]
    native = ["-march=native"] if os.environ.get("ITEMVEC_NATIVE") else []
    ext = Extension(
        "itemvec._kernels",
        sources=["src/itemvec/_kernels.pyx"],
        include_dirs=[np.get_include()],
        # no -ffast-math: single-threaded runs must stay bit-reproducible
        extra_compile_args=["-O3", "-ffp-contract=off", *native, *openmp],
        extra_link_args=openmp,
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
