"""Build the compiled kernel extension.

The package works without it (ironia.kernels falls back to the numpy
reference implementation), so set IRONIA_SKIP_NATIVE=1 to install pure
Python on platforms without a C toolchain.
"""

import os

from setuptools import Extension, setup

if os.environ.get("IRONIA_SKIP_NATIVE"):
    setup()
else:
    import numpy as np
    from Cython.Build import cythonize

    ext = Extension(
        "ironia.kernels._native",
        ["src/ironia/kernels/_native.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # No -ffast-math: the compiled kernels must match the numpy
        # reference semantics exactly.
        extra_compile_args=["-O3"],
    )
    setup(ext_modules=cythonize(ext, language_level=3))
