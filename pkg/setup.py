import os

from setuptools import setup

ext_modules = []
if not os.environ.get("CIFABC_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "cifabc._kernels",
                    ["src/cifabc/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # no Cython/NumPy at build time: the pure-Python kernel is used
        ext_modules = []

setup(ext_modules=ext_modules)
