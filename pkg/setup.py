import os

from setuptools import Extension, setup


def extensions():
    """Cython kernels are optional: the package falls back to numpy
    implementations when the compiled module is absent."""
    if os.environ.get("BTD_SKIP_EXT") == "1":
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [
            Extension(
                "btd._kernels._ckernels",
                ["src/btd/_kernels/_ckernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )


setup(ext_modules=extensions())
