import os

import numpy as np
from setuptools import Extension, setup

# The compiled kernel is optional: without Cython (or with PATA_NO_EXT=1)
# the package installs pure Python and uses pata._fallback.
ext_modules = []
if not os.environ.get("PATA_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "pata._kernels",
                    ["src/pata/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
