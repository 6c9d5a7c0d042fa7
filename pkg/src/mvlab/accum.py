"""Compensated (Neumaier) summation helpers.

All reductions in the package that feed reported numbers go through these
routines so that results are deterministic and carry error far below any
tolerance used elsewhere.  The kernels run over a fixed left-to-right order;
chunking or parallel scheduling upstream must not change what is passed here.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _neumaier_f8(a):
    s = 0.0
    comp = 0.0
    for i in range(a.shape[0]):
        x = a[i]
        t = s + x
        if abs(s) >= abs(x):
            comp += (s - t) + x
        else:
            comp += (x - t) + s
        s = t
    return s + comp


@njit(cache=True)
def _neumaier_prefix_f8(a, stops, out):
    # out[j] = compensated sum of a[:stops[j]]; stops ascending.
    s = 0.0
    comp = 0.0
    i = 0
    for j in range(stops.shape[0]):
        stop = stops[j]
        while i < stop:
            x = a[i]
            t = s + x
            if abs(s) >= abs(x):
                comp += (s - t) + x
            else:
                comp += (x - t) + s
            s = t
            i += 1
        out[j] = s + comp


def neumaier_sum(a):
    """Compensated sum of a 1-d array; complex input is summed per component.

    Args:
        a: array of float or complex values.

    Returns:
        Python float or complex scalar.
    """
    a = np.asarray(a)
    if a.size == 0:
        return 0j if np.iscomplexobj(a) else 0.0
    if np.iscomplexobj(a):
        re = _neumaier_f8(np.ascontiguousarray(a.real, dtype=np.float64))
        im = _neumaier_f8(np.ascontiguousarray(a.imag, dtype=np.float64))
        return complex(re, im)
    return float(_neumaier_f8(np.ascontiguousarray(a, dtype=np.float64)))


def prefix_sums_at(a, stops):
    """Compensated prefix sums ``sum(a[:stop])`` for each stop.

    Args:
        a: 1-d array of float or complex values.
        stops: ascending array of cut indices in [0, len(a)].

    Returns:
        Array of prefix sums, one per stop (float64 or complex128).
    """
    a = np.asarray(a)
    stops = np.asarray(stops, dtype=np.int64)
    if stops.size and (stops[0] < 0 or stops[-1] > a.size):
        raise ValueError("stops out of range")
    if np.any(np.diff(stops) < 0):
        raise ValueError("stops must be ascending")
    if np.iscomplexobj(a):
        re = np.empty(stops.size)
        im = np.empty(stops.size)
        _neumaier_prefix_f8(np.ascontiguousarray(a.real, dtype=np.float64), stops, re)
        _neumaier_prefix_f8(np.ascontiguousarray(a.imag, dtype=np.float64), stops, im)
        return re + 1j * im
    out = np.empty(stops.size)
    _neumaier_prefix_f8(np.ascontiguousarray(a, dtype=np.float64), stops, out)
    return out
