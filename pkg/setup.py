"""Build script for the optional compiled kernels.

The extension is optional: if the compiler or Cython is unavailable the
package installs without it and falls back to the numpy kernels.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled kernels not built ({exc})", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc})", file=sys.stderr)


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "grwsim._ckernels",
        ["src/grwsim/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
        # keep a*b+c unfused so results match the numpy fallback bit for bit
        extra_compile_args=["-O2", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize(
        [ext],
        compiler_directives=dict(
            language_level=3,
            boundscheck=False,
            wraparound=False,
            cdivision=True,
            initializedcheck=False,
        ),
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
