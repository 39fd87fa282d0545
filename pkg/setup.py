"""Build script wiring the optional compiled kernel extension.

The package works without the extension (a pure numpy fallback is selected at
import time), so a missing compiler or Cython must not fail the install.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "pfsgraph.kernels._ckernels",
                ["src/pfsgraph/kernels/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # fp-contract off: the pure-numpy fallback must pick identical
                # tree splits, so no FMA contraction in the gain arithmetic
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
