"""Pure NumPy versions of the compiled kernels in ``_ckernels.pyx``.

Each function loops over the summation index in the same order as the
compiled loop and vectorizes across rows, so both backends agree to a few
ulps (libm ``exp`` may differ from NumPy's by one rounding).
"""

import numpy as np


def _neumaier_step(s, c, x):
    t = s + x
    big = np.abs(s) >= np.abs(x)
    c = c + np.where(big, (s - t) + x, (x - t) + s)
    return t, c


def neumaier_sum(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    s = 0.0
    c = 0.0
    for v in x.tolist():
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


def cumulative_log(values):
    values = np.ascontiguousarray(values, dtype=np.float64)
    out = np.empty(values.shape[0] + 1)
    out[0] = 0.0
    acc = 0.0
    for i, v in enumerate(np.log(values).tolist()):
        acc = acc + v
        out[i + 1] = acc
    return out


def log_series_rows(log_terms):
    log_terms = np.ascontiguousarray(log_terms, dtype=np.float64)
    nr = log_terms.shape[0]
    m = np.max(log_terms, axis=1) if log_terms.shape[1] else np.full(nr, -np.inf)
    empty = m == -np.inf
    shift = np.where(empty, 0.0, m)
    s = np.zeros(nr)
    c = np.zeros(nr)
    with np.errstate(invalid="ignore"):
        for k in range(log_terms.shape[1]):
            col = log_terms[:, k]
            x = np.where(col == -np.inf, 0.0, np.exp(col - shift))
            s, c = _neumaier_step(s, c, x)
    with np.errstate(divide="ignore"):
        out = shift + np.log(s + c)
    out[empty] = -np.inf
    return out


def complex_series_rows(log_mag, phase):
    log_mag = np.ascontiguousarray(log_mag, dtype=np.float64)
    phase = np.ascontiguousarray(phase, dtype=np.float64)
    nr = log_mag.shape[0]
    m = np.max(log_mag, axis=1) if log_mag.shape[1] else np.full(nr, -np.inf)
    empty = m == -np.inf
    shift = np.where(empty, 0.0, m)
    sr = np.zeros(nr)
    cr = np.zeros(nr)
    si = np.zeros(nr)
    ci = np.zeros(nr)
    for k in range(log_mag.shape[1]):
        col = log_mag[:, k]
        a = np.where(col == -np.inf, 0.0, np.exp(col - shift))
        sr, cr = _neumaier_step(sr, cr, a * np.cos(phase[:, k]))
        si, ci = _neumaier_step(si, ci, a * np.sin(phase[:, k]))
    scale = np.exp(shift)
    out = scale * (sr + cr) + 1j * (scale * (si + ci))
    out[empty] = 0.0
    return out


def batch_conjugate(U, w):
    U = np.asarray(U, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    return np.einsum("sij,sj,skj->sik", U, w, U.conj())
