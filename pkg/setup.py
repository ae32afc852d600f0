"""Build script: compiles the optional nearest-seed kernel.

The extension is best-effort. If Cython or a C compiler is unavailable the
package installs without it and `lexmap.kernels` falls back to the NumPy
implementation at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("LEXMAP_SKIP_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext = Extension(
            "lexmap._nearest_c",
            ["src/lexmap/_nearest_c.pyx"],
            include_dirs=[numpy.get_include(), "src/lexmap"],
            depends=["src/lexmap/_nearest_impl.h"],
            extra_compile_args=["-O3", "-march=native", "-fopenmp"],
            extra_link_args=["-fopenmp"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            optional=True,
        )
        ext_modules = cythonize(
            [ext], compiler_directives={"language_level": "3"}
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
