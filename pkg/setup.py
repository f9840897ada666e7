"""Build script.

The compiled kernel (restyle._ckernels) is optional: when Cython or a C
compiler is unavailable the package falls back to the pure-numpy kernels
selected at import time in restyle.kernels.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "restyle._ckernels",
                ["src/restyle/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
