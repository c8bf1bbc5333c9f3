"""Hot inner loops: closed-form G3 grids, field quadratic forms, log-linear fits.

Each kernel exists twice, a numba ``_nb`` version written as explicit loops
and a vectorized ``_np`` version. The unsuffixed names dispatch on
:data:`condemit._accel.USE_NUMBA`. Both versions compute every output element
from that element's inputs only, so results do not depend on how a scan is
chunked across workers.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "closed_form_g3",
    "field_quadratic_form",
    "loglinear_fit",
]


# --------------------------------------------------------------------------
# closed-form third-order correlation on an (angle, time) grid
# --------------------------------------------------------------------------

def closed_form_g3_np(c_ge, c_sg, c_ag, arg_sg, arg_ag, weight,
                      d23, d33, sin2a, times, gamma, dgamma, domega):
    d23 = np.asarray(d23, dtype=np.float64)[:, None]
    d33 = np.asarray(d33, dtype=np.float64)[:, None]
    sin2a = np.asarray(sin2a, dtype=np.float64)[:, None]
    t = np.asarray(times, dtype=np.float64)[None, :]

    half = 0.5 * d23
    ch = np.cos(half)
    sh = np.sin(half)
    r2 = np.sqrt(2.0)

    out = c_ge * c_ge * np.exp(-2.0 * gamma * t)
    out = out + 2.0 * c_sg * c_sg * np.exp(-2.0 * (gamma + dgamma) * t) * ch * ch
    out = out + 2.0 * c_ag * c_ag * np.exp(-2.0 * (gamma - dgamma) * t) * sh * sh
    out = out + (2.0 * c_sg * c_ag * np.exp(-2.0 * gamma * t) * np.sin(d23)
                 * np.sin(arg_ag - arg_sg - 2.0 * domega * t))
    out = out + (2.0 * r2 * c_sg * c_ge * np.exp(-(2.0 * gamma + dgamma) * t) * ch
                 * np.cos(arg_sg + half - d33 + domega * t))
    out = out + (2.0 * r2 * c_ag * c_ge * np.exp(-(2.0 * gamma - dgamma) * t) * sh
                 * np.sin(arg_ag + half - d33 - domega * t))
    return weight * sin2a * out


@njit(cache=True, nogil=True)
def closed_form_g3_nb(c_ge, c_sg, c_ag, arg_sg, arg_ag, weight,
                      d23, d33, sin2a, times, gamma, dgamma, domega):
    na = d23.shape[0]
    nt = times.shape[0]
    out = np.empty((na, nt))
    r2 = np.sqrt(2.0)
    for i in range(na):
        half = 0.5 * d23[i]
        ch = np.cos(half)
        sh = np.sin(half)
        s23 = np.sin(d23[i])
        for j in range(nt):
            t = times[j]
            v = c_ge * c_ge * np.exp(-2.0 * gamma * t)
            v += 2.0 * c_sg * c_sg * np.exp(-2.0 * (gamma + dgamma) * t) * ch * ch
            v += 2.0 * c_ag * c_ag * np.exp(-2.0 * (gamma - dgamma) * t) * sh * sh
            v += (2.0 * c_sg * c_ag * np.exp(-2.0 * gamma * t) * s23
                  * np.sin(arg_ag - arg_sg - 2.0 * domega * t))
            v += (2.0 * r2 * c_sg * c_ge * np.exp(-(2.0 * gamma + dgamma) * t) * ch
                  * np.cos(arg_sg + half - d33[i] + domega * t))
            v += (2.0 * r2 * c_ag * c_ge * np.exp(-(2.0 * gamma - dgamma) * t) * sh
                  * np.sin(arg_ag + half - d33[i] - domega * t))
            out[i, j] = weight * sin2a[i] * v
    return out


# --------------------------------------------------------------------------
# <E^- E^+> from precomputed atomic coherences
# --------------------------------------------------------------------------

def field_quadratic_form_np(coherences, phases, factors):
    """``out[a, t] = f_a^2 * sum_{mu,nu} e^{-i d_{a,mu}} C_t[mu,nu] e^{i d_{a,nu}}``."""
    w = np.exp(1j * np.asarray(phases, dtype=np.float64))          # (na, n)
    c = np.asarray(coherences, dtype=np.complex128)                 # (nt, n, n)
    # explicit elementwise products summed over the fixed atom axes only
    prod = np.conj(w)[:, None, :, None] * c[None, :, :, :] * w[:, None, None, :]
    val = prod.sum(axis=3).sum(axis=2).real
    f2 = np.asarray(factors, dtype=np.float64) ** 2
    return f2[:, None] * val


@njit(cache=True, nogil=True)
def field_quadratic_form_nb(coherences, phases, factors):
    na = phases.shape[0]
    n = phases.shape[1]
    nt = coherences.shape[0]
    out = np.empty((na, nt))
    w = np.empty(n, dtype=np.complex128)
    for a in range(na):
        for m in range(n):
            w[m] = np.exp(1j * phases[a, m])
        f2 = factors[a] * factors[a]
        for k in range(nt):
            acc = 0.0
            for m in range(n):
                row = 0.0 + 0.0j
                for v in range(n):
                    row += coherences[k, m, v] * w[v]
                acc += (np.conj(w[m]) * row).real
            out[a, k] = f2 * acc
    return out


# --------------------------------------------------------------------------
# ordinary least squares of log(values) against time, one row per trace
# --------------------------------------------------------------------------

def loglinear_fit_np(times, values):
    """Returns ``(slope, intercept, rms_residual, ok)`` arrays, one per row."""
    t = np.asarray(times, dtype=np.float64)
    y = np.atleast_2d(np.asarray(values, dtype=np.float64))
    ok = np.all(y > 0.0, axis=1)
    logy = np.log(np.where(y > 0.0, y, 1.0))
    tm = t.mean()
    dt = t - tm
    sxx = np.sum(dt * dt)
    ym = logy.mean(axis=1)
    slope = np.sum(dt[None, :] * (logy - ym[:, None]), axis=1) / sxx
    intercept = ym - slope * tm
    resid = logy - (intercept[:, None] + slope[:, None] * t[None, :])
    rms = np.sqrt(np.mean(resid * resid, axis=1))
    nan = np.full_like(slope, np.nan)
    return (np.where(ok, slope, nan), np.where(ok, intercept, nan),
            np.where(ok, rms, nan), ok)


@njit(cache=True, nogil=True)
def loglinear_fit_nb(times, values):
    m, n = values.shape
    slope = np.full(m, np.nan)
    intercept = np.full(m, np.nan)
    rms = np.full(m, np.nan)
    ok = np.zeros(m, dtype=np.bool_)
    tm = 0.0
    for j in range(n):
        tm += times[j]
    tm /= n
    sxx = 0.0
    for j in range(n):
        sxx += (times[j] - tm) ** 2
    logy = np.empty(n)
    for i in range(m):
        good = True
        for j in range(n):
            if not values[i, j] > 0.0:
                good = False
                break
            logy[j] = np.log(values[i, j])
        if not good:
            continue
        ym = 0.0
        for j in range(n):
            ym += logy[j]
        ym /= n
        sxy = 0.0
        for j in range(n):
            sxy += (times[j] - tm) * (logy[j] - ym)
        b = sxy / sxx
        a = ym - b * tm
        ss = 0.0
        for j in range(n):
            r = logy[j] - (a + b * times[j])
            ss += r * r
        slope[i] = b
        intercept[i] = a
        rms[i] = np.sqrt(ss / n)
        ok[i] = True
    return slope, intercept, rms, ok


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

def closed_form_g3(c_ge, c_sg, c_ag, arg_sg, arg_ag, weight,
                   d23, d33, sin2a, times, gamma, dgamma, domega):
    args = (float(c_ge), float(c_sg), float(c_ag), float(arg_sg), float(arg_ag),
            float(weight),
            np.ascontiguousarray(d23, dtype=np.float64),
            np.ascontiguousarray(d33, dtype=np.float64),
            np.ascontiguousarray(sin2a, dtype=np.float64),
            np.ascontiguousarray(times, dtype=np.float64),
            float(gamma), float(dgamma), float(domega))
    if USE_NUMBA:
        return closed_form_g3_nb(*args)
    return closed_form_g3_np(*args)


def field_quadratic_form(coherences, phases, factors):
    args = (np.ascontiguousarray(coherences, dtype=np.complex128),
            np.ascontiguousarray(np.atleast_2d(phases), dtype=np.float64),
            np.ascontiguousarray(np.atleast_1d(factors), dtype=np.float64))
    if USE_NUMBA:
        return field_quadratic_form_nb(*args)
    return field_quadratic_form_np(*args)


def loglinear_fit(times, values):
    t = np.ascontiguousarray(times, dtype=np.float64)
    y = np.ascontiguousarray(np.atleast_2d(values), dtype=np.float64)
    if USE_NUMBA:
        return loglinear_fit_nb(t, y)
    return loglinear_fit_np(t, y)
