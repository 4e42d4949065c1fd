import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.extension import Extension


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).parent.resolve()
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)

        subprocess.check_call(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DSKBUILD=ON",
                "-DCMAKE_BUILD_TYPE=Release",
                f"-DPYTHON_EXECUTABLE={sys.executable}",
            ]
        )
        subprocess.check_call(["cmake", "--build", str(build_dir), "-j", "--target", "_core"])

        ext_path = Path(self.get_ext_fullpath(ext.name))
        ext_path.parent.mkdir(parents=True, exist_ok=True)
        built = sorted(build_dir.glob("_core*.so"))
        if not built:
            raise RuntimeError("cmake build produced no _core extension")
        shutil.copy2(built[0], ext_path)


setup(
    name="fpinv",
    version="0.1.0",
    description="Fabry-Perot transmission surrogates and gradient-based inverse design",
    packages=["fpinv"],
    package_dir={"fpinv": "python/fpinv"},
    ext_modules=[CMakeExtension("fpinv._core")],
    cmdclass={"build_ext": CMakeBuild},
    python_requires=">=3.9",
)
