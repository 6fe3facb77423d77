"""Build script for the optional compiled pairwise-interaction core.

The extension is a pure speedup: if Cython or a C compiler is missing the
build degrades to the numpy fallback in mvsde._core.pairwise_py, which is
bit-compatible with the compiled kernel. Floating-point contraction is
disabled so both backends produce identical IEEE-754 results.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible; warn and continue otherwise."""

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
        import warnings

        warnings.warn(
            "mvsde: compiled pairwise core unavailable (%s); "
            "falling back to the pure numpy kernels" % (exc,)
        )


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "mvsde._core._pairwise",
        ["src/mvsde/_core/_pairwise.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O2", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
