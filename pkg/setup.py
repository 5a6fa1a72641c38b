import os

from setuptools import setup

ext_modules = []
if not os.environ.get("APMOMENTS_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "apmoments._kernels._core",
                    ["src/apmoments/_kernels/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception:
        # Pure-python fallback is selected at import time; the compiled
        # core is an optimization, not a requirement.
        ext_modules = []

setup(ext_modules=ext_modules)
