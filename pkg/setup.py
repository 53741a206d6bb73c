"""Build script. The Cython kernel extension is optional: if it cannot be
compiled the package installs anyway and falls back to the numpy kernels."""

import os

from setuptools import setup, Extension
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print("WARNING: compiled kernels unavailable, using numpy fallback (%s)" % exc)


extensions = []
if not os.environ.get("GSP4B_NO_EXT"):
    try:
        from Cython.Build import cythonize

        extensions = cythonize(
            [Extension("gsp4bessel.kernels._ck", ["src/gsp4bessel/kernels/_ck.pyx"])],
            language_level=3,
        )
    except ImportError:
        print("WARNING: Cython not found, building without compiled kernels")

setup(ext_modules=extensions, cmdclass={"build_ext": optional_build_ext})
