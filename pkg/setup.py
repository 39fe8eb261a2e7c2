"""Build script: compiles the optional indicator kernel extension.

The package works without the extension (a pure-Python fallback is selected
at import time); building it just makes the indicator recursions fast.
"""
from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools.extension import Extension
    import numpy

    ext_modules = cythonize(
        [
            Extension(
                "rlfolio._ind_kernels",
                ["src/rlfolio/_ind_kernels.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
