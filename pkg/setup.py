"""Build script: compiles the simplex kernel extension when a toolchain is present.

The package works without the extension (a pure-Python kernel is selected at
import time), so any failure here downgrades to a warning instead of aborting
the install.
"""

import os
import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

EXT_SOURCES_PYX = ["src/gridbid/_kernel_cy.pyx"]
EXT_SOURCES_C = ["src/gridbid/_kernel_cy.c"]


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            warnings.warn(f"gridbid: extension build failed ({exc}); "
                          "falling back to the pure-Python kernel")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"gridbid: building {ext.name} failed ({exc}); "
                          "falling back to the pure-Python kernel")


def extensions():
    if os.environ.get("GRIDBID_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize

        return cythonize(
            [Extension("gridbid._kernel_cy", EXT_SOURCES_PYX,
                       extra_compile_args=["-O2"])],
            language_level=3,
        )
    except ImportError:
        if os.path.exists(EXT_SOURCES_C[0]):
            return [Extension("gridbid._kernel_cy", EXT_SOURCES_C,
                              extra_compile_args=["-O2"])]
        warnings.warn("gridbid: Cython not available and no pre-generated C "
                      "source found; building without the compiled kernel")
        return []


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
