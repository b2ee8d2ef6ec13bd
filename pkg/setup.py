"""Optional native build: the engine hot paths compile with Cython when it is
available and MINIGOLO_PURE is unset.  Without it the package is pure Python."""

import os

from setuptools import setup

HOT_MODULES = ["values", "operators", "methods", "dispatch", "vm", "interp"]


def extensions():
    if os.environ.get("MINIGOLO_PURE"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    paths = [f"src/minigolo/{m}.py" for m in HOT_MODULES]
    return cythonize(paths, compiler_directives={"language_level": "3"}, quiet=True)


setup(ext_modules=extensions())
