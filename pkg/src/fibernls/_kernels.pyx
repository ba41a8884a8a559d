# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the split-step solver and the coordinate maps.

Every function here has a numpy twin in ``_kernels_py`` with an identical
signature; ``fibernls.kernels`` picks one at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


def phase_rotate(double complex[::1] values, double coef, object potential_phase):
    """In place: ``values *= exp(i*(coef*|values|**2 + potential_phase))``."""
    cdef Py_ssize_t j, n = values.shape[0]
    cdef double re, im, theta, c, s
    cdef const double[::1] pot
    cdef bint has_pot = potential_phase is not None
    if has_pot:
        pot = potential_phase
        if pot.shape[0] != n:
            raise ValueError("potential_phase length mismatch")
    for j in range(n):
        re = values[j].real
        im = values[j].imag
        theta = coef * (re * re + im * im)
        if has_pot:
            theta += pot[j]
        c = cos(theta)
        s = sin(theta)
        values[j] = (re * c - im * s) + 1j * (re * s + im * c)


def weighted_sq_sum(const double complex[::1] values, object weight):
    """Return ``sum(weight * |values|**2)``; ``weight=None`` means unit weight."""
    cdef Py_ssize_t j, n = values.shape[0]
    cdef double acc = 0.0, re, im
    cdef const double[::1] w
    if weight is None:
        for j in range(n):
            re = values[j].real
            im = values[j].imag
            acc += re * re + im * im
        return acc
    w = weight
    if w.shape[0] != n:
        raise ValueError("weight length mismatch")
    for j in range(n):
        re = values[j].real
        im = values[j].imag
        acc += w[j] * (re * re + im * im)
    return acc


def max_abs2(const double complex[::1] values):
    cdef Py_ssize_t j, n = values.shape[0]
    cdef double m = 0.0, a, re, im
    for j in range(n):
        re = values[j].real
        im = values[j].imag
        a = re * re + im * im
        if a > m:
            m = a
    return m


def trig_sum(const double complex[::1] coeffs, double k_first, double dk, const double[::1] x):
    """Evaluate ``sum_m coeffs[m] * exp(i*(k_first + m*dk)*x_p)`` at every x_p.

    Phases are advanced by complex multiplication instead of calling exp per
    term; the drift is O(len(coeffs) * eps).
    """
    cdef Py_ssize_t p, m, nm = coeffs.shape[0], npts = x.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(npts, dtype=np.complex128)
    cdef double xp, wr, wi, pr, pi, tr, accr, acci, cr, ci
    for p in range(npts):
        xp = x[p]
        wr = cos(dk * xp)
        wi = sin(dk * xp)
        pr = cos(k_first * xp)
        pi = sin(k_first * xp)
        accr = 0.0
        acci = 0.0
        for m in range(nm):
            cr = coeffs[m].real
            ci = coeffs[m].imag
            accr += cr * pr - ci * pi
            acci += cr * pi + ci * pr
            tr = pr * wr - pi * wi
            pi = pr * wi + pi * wr
            pr = tr
        out[p] = accr + 1j * acci
    return out
