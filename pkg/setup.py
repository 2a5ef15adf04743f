"""Build hook for the optional compiled kernel.

The package works without the extension (a pure-Python kernel is selected
at import time), so a missing compiler or Cython must not fail the install.
Set TDMAC_SKIP_EXT=1 to force a pure-Python install.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TDMAC_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "tdmac._kernels",
                    ["src/tdmac/_kernels.pyx"],
                    # -ffp-contract=off: no FMA contraction, the compiled
                    # kernel must be bit-identical to the Python fallback
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
