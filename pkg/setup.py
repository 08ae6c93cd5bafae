import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# LM05_NO_EXT=1 skips the compiled kernel; the NumPy fallback is used at import.
ext_modules = []
if cythonize is not None and not os.environ.get("LM05_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "lm05sim._kernels",
                ["src/lm05sim/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # no FMA contraction: results must match the NumPy fallback bit for bit
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
