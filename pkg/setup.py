"""Build script: compiles the optional jet-arithmetic extension.

The package is fully functional without the extension (a pure numpy
fallback is selected at import time), so any compiler failure downgrades
to a pure-Python install instead of aborting.
"""

import sys

from setuptools import setup


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "swallowkit._jetcore",
        sources=["src/swallowkit/_jetcore.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


try:
    setup(ext_modules=extensions())
except SystemExit:
    raise
except Exception as exc:  # compiler missing or broken: install pure
    print(f"warning: extension build failed ({exc}); installing pure-Python", file=sys.stderr)
    setup(ext_modules=[])
