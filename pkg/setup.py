"""Build hook for the optional compiled depth kernel.

The package is fully functional without the extension (a numpy fallback is
selected at import time); compilation is attempted whenever Cython is
available.  -ffp-contract=off keeps the C arithmetic bit-identical to the
numpy path so both backends produce the same bundles.
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
                "dqfkit._kernels._core",
                ["src/dqfkit/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3", "-ffp-contract=off", "-fno-fast-math"],
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
