"""Build script. The graph kernels ship as an optional Cython extension;
when Cython (or a C compiler) is unavailable the package installs anyway
and falls back to the pure NumPy/SciPy kernels at import time."""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "persuasion_net._kernels._core",
                ["src/persuasion_net/_kernels/_core.pyx"],
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
