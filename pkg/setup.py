from setuptools import Extension, setup
from Cython.Build import cythonize

# The compiled event-loop engine. The package still works without it: the
# import in parsim.engine falls back to the pure-Python engine.
extensions = [
    Extension("parsim._engine", ["src/parsim/_engine.pyx"]),
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
