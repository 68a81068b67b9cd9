from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "fsvr._fsvr",
    sources=[
        "bindings/pymodule.cpp",
        "src/dataset.cpp",
        "src/metrics.cpp",
        "src/som.cpp",
        "src/svr.cpp",
        "src/fuzzy.cpp",
        "src/pipeline.cpp",
        "src/model_io.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
