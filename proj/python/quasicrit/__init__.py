"""Coupled quasiperiodic chains: thin Python layer over the C++ core."""
import json as _json
import os as _os


def _pick_blas_kernel():
    # OpenBLAS 0.3.20's AVX-512 kernels return wrong eigenvectors on some CPUs.
    if "OPENBLAS_CORETYPE" in _os.environ:
        return
    try:
        with open("/proc/cpuinfo") as f:
            flags = f.read()
    except OSError:
        return
    if " avx512f" in flags and " avx2" in flags:
        _os.environ["OPENBLAS_CORETYPE"] = "Haswell"


_pick_blas_kernel()

from ._quasicrit import *  # noqa: E402,F401,F403
from ._quasicrit import run_config as _run_config, recipe as _recipe  # noqa: E402


def run(config, out_dir=".", task="", threads=0):
    """Run a config given as a dict or a path to a JSON file."""
    if isinstance(config, (str, _os.PathLike)) and _os.path.exists(config):
        with open(config) as f:
            config = _json.load(f)
    return _run_config(_json.dumps(config), str(out_dir), task, threads)


def recipe(name):
    return _json.loads(_recipe(name))
