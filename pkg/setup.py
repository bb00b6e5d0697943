import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("CRMAP_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        extensions = [
            Extension(
                "crmap._ckernels",
                ["src/crmap/_ckernels.pyx"],
                extra_compile_args=["-O3"],
                libraries=["m"],
            )
        ]
        ext_modules = cythonize(
            extensions,
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
