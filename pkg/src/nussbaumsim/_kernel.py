"""Compiled fixed-step integration core.

The simulation loop is branch-light float arithmetic over small arrays, so
it is compiled with numba; a 10 s run at dt = 1e-5 costs well under a
second.  The arithmetic mirrors ``dynamics.closed_loop_derivative`` and the
gain formulas in ``functions`` operation for operation.

Flat state layout: ``[x (n), chi (n), theta_hat (total)]``.

Status codes: 0 completed, 1 non-finite state, 2 segment horizon exceeded,
3 gain exponent overflow.
"""

from __future__ import annotations

import numpy as np
from numba import njit

OK = 0
NONFINITE = 1
HORIZON = 2
OVERFLOW = 3

SCHEME_SATURATED = 0
SCHEME_TRADITIONAL = 1

SOLVER_RK4 = 0
SOLVER_EULER = 1

_OVERFLOW_LIMIT = 1e306


@njit(cache=True)
def _saturated_gain(a, b, T, chi, horizon):
    c = abs(chi)
    if not np.isfinite(c):
        return np.nan
    left = 0.0
    seglen = T * np.pi
    sgn = 1.0
    for _ in range(horizon):
        nxt = left + seglen
        if c < nxt:
            return sgn * a * np.cos((c - left) * np.pi / seglen)
        if nxt > _OVERFLOW_LIMIT:
            return np.nan
        left = nxt
        seglen *= b
        sgn = -sgn
    return np.nan


@njit(cache=True)
def _traditional_gain(pref, alpha, beta_pow, cap, chi):
    if not np.isfinite(chi) or alpha * abs(chi) > cap:
        return np.inf
    return pref * np.exp(alpha * abs(chi)) * np.sin(chi / beta_pow)


@njit(cache=True)
def _psi(kind, pars, x, out):
    if kind == 0:
        out[0] = np.sin(x)
    elif kind == 1:
        out[0] = np.cos(x)
    elif kind == 2:
        out[0] = x
    elif kind == 3:
        xp = 1.0
        for k in range(out.shape[0]):
            out[k] = pars[k] * xp
            xp *= x
    else:
        for k in range(out.shape[0]):
            out[k] = pars[k]


@njit(cache=True)
def _deriv(s, n, L, rho, theta, th_off, zeta, gamma,
           reg_kinds, reg_pars, reg_off,
           scheme, sat_a, sat_b, sat_T, horizon,
           trad_pref, trad_alpha, trad_beta_pow, trad_cap,
           d, u, e, uN, Ng, psi_buf):
    """Closed-loop derivative into ``d``; control outputs into u/e/uN/Ng."""
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += L[i, j] * s[j]
        e[i] = acc
    for i in range(n):
        t0 = th_off[i]
        t1 = th_off[i + 1]
        psi = psi_buf[t0:t1]
        _psi(reg_kinds[i], reg_pars[reg_off[i]:reg_off[i + 1]], s[i], psi)
        chi_i = s[n + i]
        if not np.isfinite(chi_i):
            return NONFINITE
        if scheme == SCHEME_SATURATED:
            g = _saturated_gain(sat_a[i], sat_b[i], sat_T[i], chi_i, horizon)
            if np.isnan(g):
                return HORIZON
        else:
            g = _traditional_gain(trad_pref[i], trad_alpha, trad_beta_pow[i],
                                  trad_cap, chi_i)
            if g == np.inf:
                return OVERFLOW
        Ng[i] = g
        acc = e[i]
        drift = 0.0
        for k in range(t1 - t0):
            acc += psi[k] * s[2 * n + t0 + k]
            drift += psi[k] * theta[t0 + k]
        uN[i] = acc
        u[i] = -g * acc
        d[i] = rho[i] * u[i] + drift
        d[n + i] = gamma[i] * e[i] * uN[i]
        for k in range(t1 - t0):
            d[2 * n + t0 + k] = zeta[i] * psi[k] * e[i]
    return OK


@njit(cache=True)
def run_loop(s0, n, L, rho, theta, th_off, zeta, gamma,
             reg_kinds, reg_pars, reg_off,
             scheme, sat_a, sat_b, sat_T, horizon,
             trad_pref, trad_alpha, trad_beta_pow, trad_cap,
             dt, steps, stride, solver):
    dim = s0.shape[0]
    total = dim - 2 * n
    s = s0.copy()
    nrec = steps // stride + 1
    X = np.empty((nrec, n))
    CHI = np.empty((nrec, n))
    TH = np.empty((nrec, total))
    U = np.empty((nrec, n))
    E = np.empty((nrec, n))
    UN = np.empty((nrec, n))
    G = np.empty((nrec, n))
    d1 = np.empty(dim)
    d2 = np.empty(dim)
    d3 = np.empty(dim)
    d4 = np.empty(dim)
    tmp = np.empty(dim)
    u = np.empty(n)
    e = np.empty(n)
    uN = np.empty(n)
    Ng = np.empty(n)
    psi_buf = np.empty(total)
    r = 0
    for k in range(steps + 1):
        st = _deriv(s, n, L, rho, theta, th_off, zeta, gamma,
                    reg_kinds, reg_pars, reg_off,
                    scheme, sat_a, sat_b, sat_T, horizon,
                    trad_pref, trad_alpha, trad_beta_pow, trad_cap,
                    d1, u, e, uN, Ng, psi_buf)
        if st != OK:
            return X, CHI, TH, U, E, UN, G, r, k, st
        if k % stride == 0:
            X[r, :] = s[:n]
            CHI[r, :] = s[n:2 * n]
            TH[r, :] = s[2 * n:]
            U[r, :] = u
            E[r, :] = e
            UN[r, :] = uN
            G[r, :] = Ng
            r += 1
        if k == steps:
            break
        if solver == SOLVER_RK4:
            for i in range(dim):
                tmp[i] = s[i] + 0.5 * dt * d1[i]
            st = _deriv(tmp, n, L, rho, theta, th_off, zeta, gamma,
                        reg_kinds, reg_pars, reg_off,
                        scheme, sat_a, sat_b, sat_T, horizon,
                        trad_pref, trad_alpha, trad_beta_pow, trad_cap,
                        d2, u, e, uN, Ng, psi_buf)
            if st != OK:
                return X, CHI, TH, U, E, UN, G, r, k, st
            for i in range(dim):
                tmp[i] = s[i] + 0.5 * dt * d2[i]
            st = _deriv(tmp, n, L, rho, theta, th_off, zeta, gamma,
                        reg_kinds, reg_pars, reg_off,
                        scheme, sat_a, sat_b, sat_T, horizon,
                        trad_pref, trad_alpha, trad_beta_pow, trad_cap,
                        d3, u, e, uN, Ng, psi_buf)
            if st != OK:
                return X, CHI, TH, U, E, UN, G, r, k, st
            for i in range(dim):
                tmp[i] = s[i] + dt * d3[i]
            st = _deriv(tmp, n, L, rho, theta, th_off, zeta, gamma,
                        reg_kinds, reg_pars, reg_off,
                        scheme, sat_a, sat_b, sat_T, horizon,
                        trad_pref, trad_alpha, trad_beta_pow, trad_cap,
                        d4, u, e, uN, Ng, psi_buf)
            if st != OK:
                return X, CHI, TH, U, E, UN, G, r, k, st
            for i in range(dim):
                s[i] = s[i] + dt / 6.0 * (d1[i] + 2.0 * d2[i] + 2.0 * d3[i] + d4[i])
        else:
            for i in range(dim):
                s[i] = s[i] + dt * d1[i]
        for i in range(dim):
            if not np.isfinite(s[i]):
                return X, CHI, TH, U, E, UN, G, r, k, NONFINITE
    return X, CHI, TH, U, E, UN, G, r, -1, OK
