import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    """Drives the repository's CMake build to produce coarsemap._core."""

    def build_extension(self, ext):
        extdir = Path(self.get_ext_fullpath(ext.name)).resolve().parent
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        source_dir = Path(__file__).resolve().parent

        subprocess.run(
            [
                "cmake",
                str(source_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DCOARSEMAP_BUILD_TESTS=OFF",
                "-DCOARSEMAP_BUILD_CLI=OFF",
                f"-DCOARSEMAP_PYTHON_OUTPUT_DIR={extdir}",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            cwd=build_dir,
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", ".", "--target", "coarsemap_python", "--parallel"],
            cwd=build_dir,
            check=True,
        )


setup(
    package_dir={"": "python"},
    packages=["coarsemap"],
    ext_modules=[CMakeExtension("coarsemap._core")],
    cmdclass={"build_ext": CMakeBuild},
)
