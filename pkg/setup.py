import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "coabench.kernels.ckernels",
                ["src/coabench/kernels/ckernels.pyx"],
                include_dirs=[np.get_include()],
                # contraction off keeps gauss_valid bit-identical to the
                # NumPy backend (same multiply/add sequence, no FMA)
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

# The compiled kernels are an accelerator, not a requirement: the package
# falls back to the NumPy implementations when the extension is missing.
setup(ext_modules=extensions)
