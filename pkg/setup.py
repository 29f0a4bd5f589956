import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = cythonize(
    [
        Extension(
            "chartextract.raster._kernels",
            ["src/chartextract/raster/_kernels.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3"],
        )
    ],
    language_level=3,
)

setup(ext_modules=extensions)
