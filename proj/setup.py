import glob

from pybind11.setup_helpers import ParallelCompile, Pybind11Extension, build_ext
from setuptools import setup

ParallelCompile("NPY_NUM_BUILD_JOBS").install()

ext = Pybind11Extension(
    "raresim._raresim",
    sorted(glob.glob("src/*.cpp")) + ["python/src/module.cpp"],
    include_dirs=["include", "vendor", "/usr/include/eigen3"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
