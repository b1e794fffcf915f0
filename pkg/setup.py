import os

from setuptools import Extension, setup

# The compiled text kernels are an optimization, not a requirement: the
# package falls back to ca_harvest.kernels.pytext when the extension is
# absent. Set CA_HARVEST_SKIP_EXT=1 to install without a C toolchain.
ext_modules = []
if not os.environ.get("CA_HARVEST_SKIP_EXT"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "ca_harvest.kernels._ctext",
                ["src/ca_harvest/kernels/_ctext.pyx"],
                extra_compile_args=["-O2"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
