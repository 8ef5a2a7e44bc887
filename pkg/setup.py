from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # sdist consumers without Cython get the numpy fallback
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "qkmeans._core",
                ["src/qkmeans/_core.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
