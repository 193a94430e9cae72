from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled kernels are optional: without Cython (or a C compiler) the
# package falls back to the pure-numpy implementation at import time.
ext_modules = []
if cythonize is not None:
    ext = Extension(
        "faclik._kernels._ckernels",
        ["src/faclik/_kernels/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    ext_modules = cythonize([ext], language_level="3")

setup(ext_modules=ext_modules)
