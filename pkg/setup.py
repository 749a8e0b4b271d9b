"""Build script: compiles the optional fast kernels when a toolchain is available.

A failed (or impossible) extension build falls back to the pure-numpy kernels
at import time, so the package stays installable everywhere.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "fairdiv._speedups",
                ["src/fairdiv/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
