"""Build the optional Cython kernels; the package falls back to numpy without them."""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("GEOVERB_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "geoverb._ext",
                    ["src/geoverb/_ext.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
