"""Hardware rounding-mode control for directed-rounding computations.

The verified matrix routines need every float operation in a section to round
toward +inf or -inf.  We drive the C99 fesetround/fegetround pair through
libm.  Rounding modes are a per-thread property, so BLAS must be pinned to a
single thread (the calling one) while a directed mode is active; callers get
that via `single_thread_blas`.
"""

from __future__ import annotations

import ctypes
import ctypes.util
import contextlib

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover - present in normal installs
    threadpool_limits = None

__all__ = ["NEAREST", "UPWARD", "DOWNWARD", "rounding_mode", "single_thread_blas",
           "directed", "get_current_mode"]


def _load_libm():
    name = ctypes.util.find_library("m") or "libm.so.6"
    return ctypes.CDLL(name, use_errno=True)


_libm = _load_libm()
_libm.fesetround.argtypes = [ctypes.c_int]
_libm.fesetround.restype = ctypes.c_int
_libm.fegetround.restype = ctypes.c_int

NEAREST = _libm.fegetround()


def _probe_directed():
    """Find the FE_UPWARD / FE_DOWNWARD constants by observing behavior.

    Candidates cover x86-64 (0x800/0x400) and aarch64 (0x400000/0x800000)
    glibc values.  A mode is "upward" if 1 + 2^-60 rounds above 1, "downward"
    if 1 - 2^-120 - ... rounds 2 - eps style below; we test both directions
    explicitly instead of trusting platform tables.
    """
    up = down = None
    tiny = 2.0 ** -60
    for cand in (0x800, 0x400, 0x400000, 0x800000, 1, 2, 3):
        if _libm.fesetround(cand) != 0:
            continue
        s_up = ctypes.c_double(1.0).value + ctypes.c_double(tiny).value
        s_dn = ctypes.c_double(-1.0).value - ctypes.c_double(tiny).value
        _libm.fesetround(NEAREST)
        if s_up > 1.0 and s_dn == -1.0 and up is None:
            up = cand
        if s_up == 1.0 and s_dn < -1.0 and down is None:
            down = cand
    if up is None or down is None:
        raise RuntimeError("could not identify directed rounding modes via fesetround")
    return up, down


UPWARD, DOWNWARD = _probe_directed()


def get_current_mode() -> int:
    return _libm.fegetround()


@contextlib.contextmanager
def rounding_mode(mode: int):
    """Set the FPU rounding mode for the calling thread; always restore NEAREST.

    Restores to NEAREST (not the previous mode) on exit: nesting directed
    sections is not supported and restoring a stale directed mode after an
    exception would silently poison later computations.
    """
    if _libm.fesetround(mode) != 0:
        raise RuntimeError(f"fesetround({mode:#x}) failed")
    try:
        yield
    finally:
        _libm.fesetround(NEAREST)


@contextlib.contextmanager
def single_thread_blas():
    """Pin BLAS pools to one thread so directed rounding applies to their work."""
    if threadpool_limits is None:
        yield
    else:
        with threadpool_limits(limits=1, user_api="blas"):
            yield


@contextlib.contextmanager
def directed(mode: int):
    """Single-threaded BLAS + directed rounding, the combo every rigorous
    matrix section needs."""
    with single_thread_blas():
        with rounding_mode(mode):
            yield
