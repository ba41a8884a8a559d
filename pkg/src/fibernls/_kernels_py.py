"""Pure numpy versions of the compiled kernels (same signatures)."""

import numpy as np

_CHUNK = 256


def phase_rotate(values, coef, potential_phase):
    theta = coef * (values.real**2 + values.imag**2)
    if potential_phase is not None:
        if potential_phase.shape[0] != values.shape[0]:
            raise ValueError("potential_phase length mismatch")
        theta = theta + potential_phase
    values *= np.exp(1j * theta)


def weighted_sq_sum(values, weight):
    a2 = values.real**2 + values.imag**2
    if weight is None:
        return float(np.sum(a2))
    if weight.shape[0] != values.shape[0]:
        raise ValueError("weight length mismatch")
    return float(np.dot(weight, a2))


def max_abs2(values):
    if values.size == 0:
        return 0.0
    return float(np.max(values.real**2 + values.imag**2))


def trig_sum(coeffs, k_first, dk, x):
    ks = k_first + dk * np.arange(coeffs.shape[0])
    out = np.empty(x.shape[0], dtype=np.complex128)
    for start in range(0, x.shape[0], _CHUNK):
        xs = x[start:start + _CHUNK]
        out[start:start + _CHUNK] = np.exp(1j * np.outer(xs, ks)) @ coeffs
    return out
