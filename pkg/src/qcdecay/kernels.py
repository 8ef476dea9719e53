"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback.  ``use_backend`` switches at runtime (tests and benchmarks
compare both).
"""
from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_NAMES = ("secular_roots", "resolvent_sums", "lorentz_sum", "survival_sum")
_active = None
BACKEND = None


def available_backends():
    return ("compiled", "python") if _ckernels is not None else ("python",)


def use_backend(name):
    """Select ``"compiled"``, ``"python"`` or ``"auto"``."""
    global _active, BACKEND
    if name == "auto":
        name = available_backends()[0]
    if name == "compiled":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not built; run `pip install -e .`")
        _active = _ckernels
    elif name == "python":
        _active = _pykernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
    return name


def set_num_threads(n):
    if _ckernels is not None:
        _ckernels.set_num_threads(int(n))


def secular_roots(poles, c, level):
    return _active.secular_roots(poles, c, level)


def resolvent_sums(x, energies, c, eps):
    return _active.resolvent_sums(x, energies, c, eps)


def lorentz_sum(x, omega, w, eps):
    return _active.lorentz_sum(x, omega, w, eps)


def survival_sum(t, omega, w):
    return _active.survival_sum(t, omega, w)


use_backend("auto")
