"""Compiled fixed-step integration kernels.

The gain-adaptive substepping policy keeps the effective step at
``h / max(1, kappa/kappa_ref)``, so transient windows near the prescribed
time can take 1e7..1e9 substeps; these loops are jit-compiled. The public
modules pack profiles, fields and signals into flat arrays and call the
kernels; nothing here is part of the public API.

Status codes returned by the kernels: 0 ok, 1 state norm above the
divergence guard, 2 non-finite state.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .fields import CanonicalField, HosmField, LinearField
from .profiles import BlowUpProfile
from .signals import DisturbanceSignal, SignalModel

DIVERGENCE_GUARD = 1e12

_EMPTY = np.empty(0, dtype=np.float64)
_EMPTY_I = np.empty(0, dtype=np.int64)
_EMPTY_2D = np.empty((0, 0), dtype=np.float64)


# -- packing -------------------------------------------------------------------


def pack_profile(p: BlowUpProfile):
    kind = {"exponential": 0, "rational": 1, "tabulated": 2}[p.kind]
    if p.kind == "tabulated":
        return (kind, p.alpha, p.T_c, p.eta, p.kappa_max,
                p.tab_tau, p.tab_phi, p.tab_dphi, p.tab_psi)
    return (kind, p.alpha, p.T_c, p.eta, p.kappa_max, _EMPTY, _EMPTY, _EMPTY, _EMPTY)


def _pack_power_sums(sums):
    off = np.zeros(len(sums) + 1, dtype=np.int64)
    coef, expo = [], []
    for i, ps in enumerate(sums):
        for term in ps.terms:
            coef.append(term.coefficient)
            expo.append(term.exponent)
        off[i + 1] = len(coef)
    return off, np.asarray(coef, dtype=np.float64), np.asarray(expo, dtype=np.float64)


def pack_field(f):
    """Flatten a correction field; returns the kernel argument tuple."""
    if isinstance(f, LinearField):
        return (0, float(f.r), np.asarray(f.K, dtype=np.float64), _EMPTY, _EMPTY, _EMPTY_2D,
                _EMPTY_I, _EMPTY, _EMPTY, 0, _EMPTY, _EMPTY_I, _EMPTY, _EMPTY)
    if isinstance(f, HosmField):
        return (1, float(f.r), np.asarray(f.l, dtype=np.float64),
                np.asarray(f.exponents, dtype=np.float64), _EMPTY, _EMPTY_2D,
                _EMPTY_I, _EMPTY, _EMPTY, 0, _EMPTY, _EMPTY_I, _EMPTY, _EMPTY)
    if isinstance(f, CanonicalField):
        goff, gco, gex = _pack_power_sums(f.g)
        if f.early_k is not None:
            eoff, eco, eex = _pack_power_sums(f.early_g)
            early = (1, np.asarray(f.early_k, dtype=np.float64), eoff, eco, eex)
        else:
            early = (0, _EMPTY, _EMPTY_I, _EMPTY, _EMPTY)
        return (2, float(f.r), np.asarray(f.k, dtype=np.float64), _EMPTY,
                np.asarray(f.a, dtype=np.float64), np.ascontiguousarray(f.Q),
                goff, gco, gex, *early)
    raise TypeError(f"cannot pack field of type {type(f).__name__}")


def pack_drift(d):
    return (np.asarray(d.l, dtype=np.float64), np.asarray(d.exponents, dtype=np.float64))


def pack_signal(model: SignalModel | None, max_order: int):
    """Rows 0..max_order of the signal's derivatives, as cos-term and poly data."""
    if model is None:
        model = SignalModel()
    nterm = len(model.cos_terms)
    npoly = len(model.poly)
    amps = np.zeros((max_order + 1, nterm))
    phases = np.zeros((max_order + 1, nterm))
    omegas = np.array([w for _, w, _ in model.cos_terms], dtype=np.float64)
    polys = np.zeros((max_order + 1, max(npoly, 1)))
    for q in range(max_order + 1):
        for j, (a, w, ph) in enumerate(model.cos_terms):
            amps[q, j] = a * w**q
            phases[q, j] = ph + 0.5 * math.pi * q
        for k in range(q, npoly):
            polys[q, k - q] = model.poly[k] * math.factorial(k) / math.factorial(k - q)
    return amps, omegas, phases, polys


def pack_disturbance(d: DisturbanceSignal | None):
    """Returns (kind, order, sig-pack) with kind 0 zero, 1/3 harmonic, 2 derivative."""
    if d is None or d.kind == "zero":
        return 0, 0, pack_signal(None, 0)
    if d.kind == "harmonic":
        return 1, 0, pack_signal(d.model, 0)
    if d.kind == "signal_derivative":
        return 2, d.order, pack_signal(d.model, d.order)
    return 3, 0, pack_signal(d.model, 0)  # tau_harmonic


# -- jitted helpers --------------------------------------------------------------


@njit(cache=True, inline="always")
def _spow(x, a):
    if x > 0.0:
        return 1.0 if a == 0.0 else x**a
    if x < 0.0:
        return -1.0 if a == 0.0 else -((-x) ** a)
    return 0.0


@njit(cache=True)
def _tab_cell(ptau, tau):
    lo, hi = 0, ptau.shape[0] - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ptau[mid] <= tau:
            lo = mid
        else:
            hi = mid
    return lo


@njit(cache=True)
def _tab_interp(ptau, vals, tau):
    i = _tab_cell(ptau, tau)
    w = (tau - ptau[i]) / (ptau[i + 1] - ptau[i])
    return vals[i] * (1.0 - w) + vals[i + 1] * w


@njit(cache=True)
def _tab_psi(ptau, pphi, ppsi, Tc, tau):
    i = _tab_cell(ptau, tau)
    dt = tau - ptau[i]
    slope = (pphi[i + 1] - pphi[i]) / (ptau[i + 1] - ptau[i])
    return ppsi[i] + Tc * (pphi[i] * dt + 0.5 * slope * dt * dt)


@njit(cache=True)
def _tab_psi_inv(ptau, pphi, ppsi, Tc, t_hat):
    lo = 0.0
    hi = ptau[ptau.shape[0] - 1]
    tol = 1e-12 * Tc
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _tab_psi(ptau, pphi, ppsi, Tc, mid) < t_hat:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


@njit(cache=True)
def _rho(pkind, palpha, pTc, ptau, pphi, tau):
    if pkind == 0:
        return math.exp(palpha * tau) / (palpha * pTc)
    if pkind == 1:
        return math.pi * (tau * tau + 1.0) / (2.0 * pTc)
    return 1.0 / (pTc * _tab_interp(ptau, pphi, tau))


@njit(cache=True)
def _drho_over_rho(pkind, palpha, ptau, pphi, pdphi, tau):
    if pkind == 0:
        return palpha
    if pkind == 1:
        return 2.0 * tau / (tau * tau + 1.0)
    return -_tab_interp(ptau, pdphi, tau) / _tab_interp(ptau, pphi, tau)


@njit(cache=True)
def _psi(pkind, palpha, pTc, ptau, pphi, ppsi, tau):
    if pkind == 0:
        return pTc * -math.expm1(-palpha * tau)
    if pkind == 1:
        return (2.0 * pTc / math.pi) * math.atan(tau)
    return _tab_psi(ptau, pphi, ppsi, pTc, tau)


@njit(cache=True)
def _psi_inv(pkind, palpha, pTc, ptau, pphi, ppsi, t_hat):
    if pkind == 0:
        return -math.log1p(-t_hat / pTc) / palpha
    if pkind == 1:
        return math.tan(math.pi * t_hat / (2.0 * pTc))
    return _tab_psi_inv(ptau, pphi, ppsi, pTc, t_hat)


@njit(cache=True)
def _kappa_transient(pkind, palpha, pTc, pkmax, ptau, pphi, ppsi, t_hat):
    # only valid on [0, eta*T_c); the terminal branch is handled by callers
    if pkind == 0:
        k = 1.0 / (palpha * (pTc - t_hat))
    elif pkind == 1:
        u = math.tan(math.pi * t_hat / (2.0 * pTc))
        k = math.pi * (u * u + 1.0) / (2.0 * pTc)
    else:
        k = _rho(pkind, palpha, pTc, ptau, pphi,
                 _tab_psi_inv(ptau, pphi, ppsi, pTc, t_hat))
    return min(k, pkmax)


@njit(cache=True)
def _sig_eval(amps, omegas, phases, polys, order, t):
    s = 0.0
    for j in range(omegas.shape[0]):
        s += amps[order, j] * math.cos(omegas[j] * t + phases[order, j])
    tk = 1.0
    for k in range(polys.shape[1]):
        s += polys[order, k] * tk
        tk *= t
    return s


@njit(cache=True)
def _delta_eval(dkind, dorder, amps, omegas, phases, polys,
                pkind, palpha, pTc, peta, ptau, pphi, ppsi, t0, t):
    if dkind == 0:
        return 0.0
    if dkind == 1:
        return _sig_eval(amps, omegas, phases, polys, 0, t)
    if dkind == 2:
        return _sig_eval(amps, omegas, phases, polys, dorder, t)
    # harmonic in auxiliary time, composed through the inverse time map
    t_hat = t - t0
    if t_hat >= peta * pTc:
        return 0.0
    tau = _psi_inv(pkind, palpha, pTc, ptau, pphi, ppsi, t_hat)
    return _sig_eval(amps, omegas, phases, polys, 0, tau)


@njit(cache=True)
def _field_into(out, scratch, fvar, n, fg, fe, fa, fQ, goff, gco, gex, z1):
    if fvar == 0:
        for i in range(n):
            out[i] = fg[i] * z1
    elif fvar == 1:
        for i in range(n):
            out[i] = fg[i] * _spow(z1, fe[i])
    else:
        for i in range(n):
            s = 0.0
            for j in range(goff[i], goff[i + 1]):
                s += gco[j] * _spow(z1, gex[j])
            scratch[i] = fg[i] * s + fa[i] * z1
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += fQ[i, j] * scratch[j]
            out[i] = s


@njit(cache=True)
def _rhs_transient(dx, scratch, fvec, n, r, kap,
                   fvar, fg, fe, fa, fQ, goff, gco, gex, x, z1, delta):
    # z1 is the field argument: x[0] minus any measurement noise
    _field_into(fvec, scratch, fvar, n, fg, fe, fa, fQ, goff, gco, gex, z1)
    rk = r * kap
    p = 1.0
    for i in range(n):
        p *= rk
        dx[i] = p * fvec[i]
    for i in range(n - 1):
        dx[i] += x[i + 1]
    dx[n - 1] += delta


@njit(cache=True)
def _rhs_terminal(dx, n, dl, de, x, z1, delta):
    for i in range(n):
        dx[i] = dl[i] * _spow(z1, de[i])
    for i in range(n - 1):
        dx[i] += x[i + 1]
    dx[n - 1] += delta


@njit(cache=True)
def simulate_system(n,
                    pkind, palpha, pTc, peta, pkmax, ptau, pphi, pdphi, ppsi,
                    fvar, r, fgL, feL, faL, fQL, goffL, gcoL, gexL,
                    has_early, fgE, goffE, gcoE, gexE, bank_switch_that,
                    dl, de,
                    dkind, dorder, sAmp, sOm, sPh, sPoly,
                    has_noise, nAmp, nOm, nPh, nPoly,
                    t0, x0, horizon, h, kref, stride, method):
    """Real-time integration of the redesigned system on [t0, t0+horizon].

    Measurement noise, when present, is subtracted from the first state
    before it enters the correction field or the terminal drift, matching an
    observer that only sees the noisy output.
    """
    nsteps = int(round(horizon / h))
    nkeep = nsteps // stride + 2
    T = np.empty(nkeep)
    X = np.empty((nkeep, n))
    x = x0.copy()
    dx = np.empty(n)
    fvec = np.empty(n)
    scratch = np.empty(n)
    xs = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    switch = peta * pTc
    m = 0
    status = 0
    last = 0.0
    for i in range(nsteps + 1):
        t_hat = i * h
        if i % stride == 0 or i == nsteps:
            T[m] = t_hat
            for j in range(n):
                X[m, j] = x[j]
            m += 1
        last = t_hat
        if i == nsteps:
            break
        transient = t_hat < switch - 0.5 * h
        if transient:
            kap = _kappa_transient(pkind, palpha, pTc, pkmax, ptau, pphi, ppsi, t_hat)
            nsub = int(max(1.0, math.ceil(kap / kref)))
        else:
            kap = 1.0
            nsub = 1
        hs = h / nsub
        use_early = has_early == 1 and t_hat < bank_switch_that
        for s in range(nsub):
            ts = t_hat + s * hs
            t_abs = t0 + ts
            delta = _delta_eval(dkind, dorder, sAmp, sOm, sPh, sPoly,
                                pkind, palpha, pTc, peta, ptau, pphi, ppsi, t0, t_abs)
            z1 = x[0]
            if has_noise == 1:
                z1 -= _sig_eval(nAmp, nOm, nPh, nPoly, 0, t_abs)
            if transient:
                if use_early:
                    _rhs_transient(dx, scratch, fvec, n, r, kap, fvar,
                                   fgE, feL, faL, fQL, goffE, gcoE, gexE, x, z1, delta)
                else:
                    _rhs_transient(dx, scratch, fvec, n, r, kap, fvar,
                                   fgL, feL, faL, fQL, goffL, gcoL, gexL, x, z1, delta)
            else:
                _rhs_terminal(dx, n, dl, de, x, z1, delta)
            if method == 1:
                # classical 4-stage Runge-Kutta (smooth noiseless fields only)
                th2 = ts + 0.5 * hs
                th3 = ts + hs
                d2 = _delta_eval(dkind, dorder, sAmp, sOm, sPh, sPoly,
                                 pkind, palpha, pTc, peta, ptau, pphi, ppsi, t0, t0 + th2)
                d3 = _delta_eval(dkind, dorder, sAmp, sOm, sPh, sPoly,
                                 pkind, palpha, pTc, peta, ptau, pphi, ppsi, t0, t0 + th3)
                if transient:
                    kap2 = _kappa_transient(pkind, palpha, pTc, pkmax, ptau, pphi, ppsi,
                                            min(th2, switch - 0.5 * h))
                    kap3 = _kappa_transient(pkind, palpha, pTc, pkmax, ptau, pphi, ppsi,
                                            min(th3, switch - 0.5 * h))
                    for j in range(n):
                        xs[j] = x[j] + 0.5 * hs * dx[j]
                    _rhs_transient(k2, scratch, fvec, n, r, kap2, fvar,
                                   fgL, feL, faL, fQL, goffL, gcoL, gexL, xs, xs[0], d2)
                    for j in range(n):
                        xs[j] = x[j] + 0.5 * hs * k2[j]
                    _rhs_transient(k3, scratch, fvec, n, r, kap2, fvar,
                                   fgL, feL, faL, fQL, goffL, gcoL, gexL, xs, xs[0], d2)
                    for j in range(n):
                        xs[j] = x[j] + hs * k3[j]
                    _rhs_transient(k4, scratch, fvec, n, r, kap3, fvar,
                                   fgL, feL, faL, fQL, goffL, gcoL, gexL, xs, xs[0], d3)
                else:
                    for j in range(n):
                        xs[j] = x[j] + 0.5 * hs * dx[j]
                    _rhs_terminal(k2, n, dl, de, xs, xs[0], d2)
                    for j in range(n):
                        xs[j] = x[j] + 0.5 * hs * k2[j]
                    _rhs_terminal(k3, n, dl, de, xs, xs[0], d2)
                    for j in range(n):
                        xs[j] = x[j] + hs * k3[j]
                    _rhs_terminal(k4, n, dl, de, xs, xs[0], d3)
                for j in range(n):
                    x[j] += hs * (dx[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) / 6.0
            else:
                for j in range(n):
                    x[j] += hs * dx[j]
        nrm = 0.0
        ok = True
        for j in range(n):
            a = abs(x[j])
            if a != a:
                ok = False
            if a > nrm:
                nrm = a
        if not ok:
            status = 2
            break
        if nrm > DIVERGENCE_GUARD:
            status = 1
            break
    return T, X, m, status, last


@njit(cache=True)
def simulate_aux(n,
                 pkind, palpha, pTc, peta, pkmax, ptau, pphi, pdphi, ppsi,
                 fvar, r, fgL, feL, faL, fQL, goffL, gcoL, gexL,
                 has_early, fgE, goffE, gcoE, gexE, bank_switch_tau,
                 dkind, dorder, sAmp, sOm, sPh, sPoly, map_time, t0,
                 z0, tau_end, h, stride):
    """Auxiliary-time integration on [0, tau_end] with plain Euler steps.

    With ``map_time`` set, disturbances are evaluated at psi(tau) + t0, which
    matches the real-time disturbance seen through the time map.
    """
    nsteps = int(round(tau_end / h))
    nkeep = nsteps // stride + 2
    T = np.empty(nkeep)
    Z = np.empty((nkeep, n))
    z = z0.copy()
    dz = np.empty(n)
    fvec = np.empty(n)
    scratch = np.empty(n)
    m = 0
    status = 0
    last = 0.0
    for i in range(nsteps + 1):
        tau = i * h
        if i % stride == 0 or i == nsteps:
            T[m] = tau
            for j in range(n):
                Z[m, j] = z[j]
            m += 1
        last = tau
        if i == nsteps:
            break
        if dkind == 3:
            dhat = _sig_eval(sAmp, sOm, sPh, sPoly, 0, tau)
        elif map_time == 1:
            t_eval = t0 + _psi(pkind, palpha, pTc, ptau, pphi, ppsi, tau)
            dhat = _delta_eval(dkind, dorder, sAmp, sOm, sPh, sPoly,
                               pkind, palpha, pTc, peta, ptau, pphi, ppsi, t0, t_eval)
        else:
            dhat = _delta_eval(dkind, dorder, sAmp, sOm, sPh, sPoly,
                               pkind, palpha, pTc, peta, ptau, pphi, ppsi, 0.0, tau)
        use_early = has_early == 1 and tau < bank_switch_tau
        if use_early:
            _field_into(fvec, scratch, fvar, n, fgE, feL, faL, fQL, goffE, gcoE, gexE, z[0])
        else:
            _field_into(fvec, scratch, fvar, n, fgL, feL, faL, fQL, goffL, gcoL, gexL, z[0])
        drr = _drho_over_rho(pkind, palpha, ptau, pphi, pdphi, tau)
        rho = _rho(pkind, palpha, pTc, ptau, pphi, tau)
        for j in range(n):
            dz[j] = r * fvec[j] - drr * j * z[j]
        for j in range(n - 1):
            dz[j] += r * z[j + 1]
        dz[n - 1] += dhat / (r * rho) ** n
        for j in range(n):
            z[j] += h * dz[j]
        nrm = 0.0
        ok = True
        for j in range(n):
            a = abs(z[j])
            if a != a:
                ok = False
            if a > nrm:
                nrm = a
        if not ok:
            status = 2
            break
        if nrm > DIVERGENCE_GUARD:
            status = 1
            break
    return T, Z, m, status, last


@njit(cache=True)
def simulate_diff(nf, nd,
                  pkind, palpha, pTc, peta, pkmax, ptau, pphi, pdphi, ppsi,
                  fvar, r, fgL, feL, faL, fQL, goffL, gcoL, gexL,
                  has_early, fgE, goffE, gcoE, gexE, bank_switch_that,
                  dl, de,
                  y_samples, state0, h, kref, stride):
    """Streaming-differentiator recursion driven by one sample per base step.

    State layout: w_1..w_nf then z_0..z_nd. Samples are zero-order-held
    across the substeps of their base step.
    """
    n = nf + nd + 1
    nsteps = y_samples.shape[0] - 1
    nkeep = nsteps // stride + 2
    T = np.empty(nkeep)
    S = np.empty((nkeep, n))
    s = state0.copy()
    fvec = np.empty(n)
    scratch = np.empty(n)
    switch = peta * pTc
    m = 0
    status = 0
    last = 0.0
    for i in range(nsteps + 1):
        t_hat = i * h
        if i % stride == 0 or i == nsteps:
            T[m] = t_hat
            for j in range(n):
                S[m, j] = s[j]
            m += 1
        last = t_hat
        if i == nsteps:
            break
        y = y_samples[i]
        transient = t_hat < switch - 0.5 * h
        if transient:
            kap = _kappa_transient(pkind, palpha, pTc, pkmax, ptau, pphi, ppsi, t_hat)
            nsub = int(max(1.0, math.ceil(kap / kref)))
        else:
            kap = 1.0
            nsub = 1
        hs = h / nsub
        use_early = has_early == 1 and t_hat < bank_switch_that
        for sub in range(nsub):
            w1 = s[0] if nf > 0 else s[0] - y
            if transient:
                if use_early:
                    _field_into(fvec, scratch, fvar, n, fgE, feL, faL, fQL,
                                goffE, gcoE, gexE, w1)
                else:
                    _field_into(fvec, scratch, fvar, n, fgL, feL, faL, fQL,
                                goffL, gcoL, gexL, w1)
                rk = r * kap
                p = 1.0
                for j in range(n):
                    p *= rk
                    fvec[j] = p * fvec[j]
            else:
                for j in range(n):
                    fvec[j] = dl[j] * _spow(w1, de[j])
            for j in range(n):
                succ = s[j + 1] if j < n - 1 else 0.0
                if nf > 0 and j == nf - 1:
                    succ -= y
                s[j] += hs * (fvec[j] + succ)
        nrm = 0.0
        ok = True
        for j in range(n):
            a = abs(s[j])
            if a != a:
                ok = False
            if a > nrm:
                nrm = a
        if not ok:
            status = 2
            break
        if nrm > DIVERGENCE_GUARD:
            status = 1
            break
    return T, S, m, status, last
