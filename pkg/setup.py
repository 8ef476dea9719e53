import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("QCDECAY_PURE_PYTHON"):
    ext_modules = cythonize(
        [Extension(
            "qcdecay._ckernels",
            ["src/qcdecay/_ckernels.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3", "-fopenmp"],
            extra_link_args=["-fopenmp"],
        )],
        language_level=3,
    )

setup(ext_modules=ext_modules)
