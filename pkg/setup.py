from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # no Cython: the pure-Python kernels are used at import time
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("liftcorr._kernels", ["src/liftcorr/_kernels.pyx"], extra_compile_args=["-O2"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
