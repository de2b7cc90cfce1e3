"""Backend selection for the hot kernels.

The compiled extension ``eislab._ckernels`` is used when it imports;
otherwise the numpy fallback in ``eislab._pykernels`` takes over.  Both
expose the same four functions.
"""
import logging

from . import _pykernels

log = logging.getLogger(__name__)

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
    log.debug("compiled kernels unavailable, using numpy fallback")

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

_active = _ckernels if _ckernels is not None else _pykernels


def available_backends():
    return sorted(_BACKENDS)


def backend_name():
    return "cython" if _active is _ckernels and _ckernels is not None else "python"


def use_backend(name):
    """Switch backend; returns the previous backend name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    prev = backend_name()
    _active = _BACKENDS[name]
    return prev


def wave_sum(x, y, eta_re, eta_im, c, lam, want_imag=False, nthreads=1):
    return _active.wave_sum(x, y, eta_re, eta_im, c, float(lam), bool(want_imag), int(nthreads))


def e1_sum(x, y, eta_re, eta_im, c, nthreads=1):
    return _active.e1_sum(x, y, eta_re, eta_im, c, int(nthreads))


def holo_sum(x, y, eta_re, eta_im, cprime, lam, nthreads=1):
    return _active.holo_sum(x, y, eta_re, eta_im, cprime, float(lam), int(nthreads))


def label_components(sign, mask):
    return _active.label_components(sign, mask)
