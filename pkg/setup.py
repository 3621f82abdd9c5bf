"""Build the optional compiled GF(2) kernel.

Without a working compiler or Cython the package still installs and falls
back to the pure-Python eliminator at import time.
"""

import numpy as np
from setuptools import setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "xchannel.gf2._kernel",
                ["src/xchannel/gf2/_kernel.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled kernel not built ({exc}); using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc})")


setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
