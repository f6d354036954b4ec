"""Build the optional Cython kernels.

The package works without them: ``mixedreg.kernels`` falls back to the
pure-Python implementation when ``mixedreg._core`` cannot be imported.
Set ``MIXEDREG_NO_EXT=1`` to skip compilation entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("MIXEDREG_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:  # pragma: no cover - build-time only
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "mixedreg._core",
                    ["src/mixedreg/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
