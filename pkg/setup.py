from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
    import numpy as np

    ext_modules = cythonize(
        [
            Extension(
                "photon_instanton._core",
                ["src/photon_instanton/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-python fallback kernels are selected at import time, so the
    # package remains usable without the compiled extension.
    ext_modules = []

setup(ext_modules=ext_modules)
