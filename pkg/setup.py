"""Build script for the optional compiled coincidence-matching kernel.

The package is fully functional without the extension (a pure-Python
kernel is selected at import time); the extension only accelerates
time-tag matching on large event streams.  If Cython or a C compiler is
unavailable the build degrades to pure Python instead of failing.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Skip the extension (with a warning) when compilation fails."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # CompileError, DistutilsPlatformError, ...
            print(f"WARNING: compiled kernel skipped ({exc}); "
                  "falling back to the pure-Python implementation")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"WARNING: building {ext.name} failed ({exc}); "
                  "falling back to the pure-Python implementation")


ext = Extension(
    "bellsim._coincidence",
    sources=["src/bellsim/_coincidence.pyx"],
    extra_compile_args=["-O3"],
)

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
