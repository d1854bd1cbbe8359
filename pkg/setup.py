import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Skip the extension when no compiler/Cython is around; the pure-Python kernels take over."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            self.announce(f"building kernels failed ({exc}); using pure Python", level=3)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self.announce(f"building {ext.name} failed ({exc}); using pure Python", level=3)


def extensions():
    if os.environ.get("SFCPLACE_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "sfcplace._kernels",
        ["src/sfcplace/_kernels.pyx"],
        language="c++",
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
