"""Compiled Dormand-Prince 5(4) stepper with dense-output event location.

The compiled stepper integrates the power family below.  A pure-Python clone
of the same code (see integrator.py) runs arbitrary Python right-hand sides.
"""

import numpy as np
from numba import njit

# outcome codes shared with integrator.py
KIND_DECAY = 0
KIND_CROSS = 1
KIND_BLOWUP = 2
KIND_INDETERMINATE = 3
KIND_NONE = 4

DETAIL_U = 1
DETAIL_V = 2
DETAIL_BOTH = 3
DETAIL_HORIZON = 0
DETAIL_TRAPPED = 1

EV_CROSS = 1
EV_BLOWUP = 2
EV_DECAY = 4
EV_ENERGY = 8

STATUS_OK = 0
STATUS_UNDERFLOW = 1

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [1 / 5, 0.0, 0.0, 0.0, 0.0],
        [3 / 40, 9 / 40, 0.0, 0.0, 0.0],
        [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    ]
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# Shampine's continuous extension, coefficients of theta, theta^2, theta^3, theta^4
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

EVENT_TOL = 1e-12


# ---------------------------------------------------------------------------
# power family:  f(z1, z2) = -c z1 + a z1^(2q-1) + b z1^(q-1) z2^q
# p = [n, q, c, a1, b1, a2, b2]; first equation uses (a1, b1), second (a2, b2)


@njit(cache=True, nogil=True)
def power_f(z1, z2, q, c, a, b):
    z1 = max(z1, 0.0)
    z2 = max(z2, 0.0)
    return -c * z1 + a * z1 ** (2 * q - 1) + b * z1 ** (q - 1) * z2**q


@njit(cache=True, nogil=True)
def power_rhs(r, y, out, p):
    n = p[0]
    q = p[1]
    u = y[0]
    du = y[1]
    v = y[2]
    dv = y[3]
    out[0] = du
    out[1] = -(n - 1) / r * du - power_f(u, v, q, p[2], p[3], p[4])
    out[2] = dv
    out[3] = -(n - 1) / r * dv - power_f(v, u, q, p[2], p[5], p[6])


@njit(cache=True, nogil=True)
def power_grad(z1, z2, q, c, a, b):
    """Partial derivatives of the clipped power nonlinearity."""
    if z1 <= 0.0:
        return 0.0, 0.0
    z2 = max(z2, 0.0)
    d1 = -c + a * (2 * q - 1) * z1 ** (2 * q - 2) + b * (q - 1) * z1 ** (q - 2) * z2**q
    d2 = 0.0
    if z2 > 0.0:
        d2 = b * q * z1 ** (q - 1) * z2 ** (q - 1)
    return d1, d2


@njit(cache=True, nogil=True)
def power_rhs_var(r, y, out, p):
    """State plus the 4x2 sensitivity matrix (row-major in y[4:12])."""
    power_rhs(r, y, out, p)
    n = p[0]
    q = p[1]
    fu_u, fu_v = power_grad(y[0], y[2], q, p[2], p[3], p[4])
    fv_v, fv_u = power_grad(y[2], y[0], q, p[2], p[5], p[6])
    damp = -(n - 1) / r
    for j in range(2):
        s0 = y[4 + j]
        s1 = y[6 + j]
        s2 = y[8 + j]
        s3 = y[10 + j]
        out[4 + j] = s1
        out[6 + j] = damp * s1 - fu_u * s0 - fu_v * s2
        out[8 + j] = s3
        out[10 + j] = damp * s3 - fv_u * s0 - fv_v * s2


@njit(cache=True, nogil=True)
def power_energy(r, y, p):
    """Hamiltonian |y'|^2/2 + F(u, v); only meaningful when b1 == b2."""
    q = p[1]
    c = p[2]
    u = max(y[0], 0.0)
    v = max(y[2], 0.0)
    pot = -0.5 * c * (u * u + v * v)
    pot += (p[3] * u ** (2 * q) + p[5] * v ** (2 * q)) / (2 * q)
    pot += p[4] * u**q * v**q / q
    return 0.5 * (y[1] * y[1] + y[3] * y[3]) + pot


@njit(cache=True, nogil=True)
def no_energy(r, y, p):
    return 0.0


# right-hand sides and energies are selected by integer code so that the
# stepper takes no function arguments and stays cacheable
RHS_POWER = 0
RHS_POWER_VAR = 1
ENERGY_NONE = 0
ENERGY_POWER = 1


@njit(cache=True, nogil=True)
def _rhs(code, r, y, out, p):
    if code == RHS_POWER_VAR:
        power_rhs_var(r, y, out, p)
    else:
        power_rhs(r, y, out, p)


@njit(cache=True, nogil=True)
def _energy(code, r, y, p):
    if code == ENERGY_POWER:
        return power_energy(r, y, p)
    return 0.0


# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _dense(yold, K, h, theta, out):
    t1 = theta
    t2 = t1 * theta
    t3 = t2 * theta
    t4 = t3 * theta
    for i in range(yold.shape[0]):
        acc = 0.0
        for j in range(7):
            w = _P[j, 0] * t1 + _P[j, 1] * t2 + _P[j, 2] * t3 + _P[j, 3] * t4
            acc += K[j, i] * w
        out[i] = yold[i] + h * acc


@njit(cache=True, nogil=True)
def _event_value(code, energy, r, y, p, ev):
    if code == 1:
        return y[0]
    if code == 2:
        return y[2]
    if code == 3:
        return max(y[0], y[2]) - ev[0]
    if code == 4:
        return max(max(abs(y[0]), abs(y[2])), max(abs(y[1]), abs(y[3]))) - ev[1]
    return _energy(energy, r, y, p) + ev[3]


@njit(cache=True, nogil=True)
def _locate(code, energy, p, ev, r_old, yold, K, h, tmp):
    """First theta in (0, 1] where the event value changes sign, by bisection."""
    lo = 0.0
    hi = 1.0
    _dense(yold, K, h, 0.0, tmp)
    s0 = _event_value(code, energy, r_old, tmp, p, ev) > 0.0
    while (hi - lo) * abs(h) > EVENT_TOL:
        mid = 0.5 * (lo + hi)
        _dense(yold, K, h, mid, tmp)
        if (_event_value(code, energy, r_old + mid * h, tmp, p, ev) > 0.0) == s0:
            lo = mid
        else:
            hi = mid
    return hi


@njit(cache=True, nogil=True)
def _err_norm(err, y, ynew, tol):
    m = 0.0
    for i in range(y.shape[0]):
        sc = tol * (1.0 + max(abs(y[i]), abs(ynew[i])))
        e = abs(err[i]) / sc
        if e > m:
            m = e
    return m


@njit(cache=True, nogil=True)
def dopri5(fun, energy, p, r0, y0, r_end, tol, hmax, flags, ev, record):
    """Integrate y' = fun(r, y) from r0 to r_end.

    fun and energy are RHS_* / ENERGY_* codes (Python callables in the
    uncompiled clone).
    flags selects the active events (EV_* bits); ev holds the thresholds
    [blowup level, decay level, energy margin at r0, energy margin after r0].  Returns
    (kind, detail, r_event, y_event, rs, ys, status).
    """
    dim = y0.shape[0]
    y = y0.copy()
    r = r0
    K = np.zeros((7, dim))
    ytmp = np.empty(dim)
    ynew = np.empty(dim)
    err = np.empty(dim)
    tmp = np.empty(dim)
    f0 = np.empty(dim)

    cap = 256 if record else 1
    rs = np.empty(cap)
    ys = np.empty((cap, dim))
    count = 0
    if record:
        rs[0] = r
        ys[0, :] = y
        count = 1

    watch_u = y0[0] > 0.0
    watch_v = y0[2] > 0.0

    if flags & EV_ENERGY:
        if _energy(energy, r, y, p) + ev[2] < 0.0:
            return KIND_INDETERMINATE, DETAIL_TRAPPED, r, y, rs[:count], ys[:count], STATUS_OK

    _rhs(fun, r, y, f0, p)
    # Hairer's initial step heuristic
    d0 = 0.0
    d1 = 0.0
    for i in range(dim):
        sc = tol * (1.0 + abs(y[i]))
        d0 = max(d0, abs(y[i]) / sc)
        d1 = max(d1, abs(f0[i]) / sc)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    h = min(h, hmax, r_end - r)
    for i in range(dim):
        K[0, i] = f0[i]

    status = STATUS_OK
    while r < r_end:
        if h < 1e-14 * max(1.0, abs(r)):
            status = STATUS_UNDERFLOW
            break
        last = False
        if r + h >= r_end:
            h = r_end - r
            last = True
        for s in range(1, 6):
            for i in range(dim):
                acc = 0.0
                for j in range(s):
                    acc += _A[s, j] * K[j, i]
                ytmp[i] = y[i] + h * acc
            _rhs(fun, r + _C[s] * h, ytmp, tmp, p)
            for i in range(dim):
                K[s, i] = tmp[i]
        for i in range(dim):
            acc = 0.0
            for j in range(6):
                acc += _B[j] * K[j, i]
            ynew[i] = y[i] + h * acc
        r_new = r + h if not last else r_end
        _rhs(fun, r_new, ynew, tmp, p)
        for i in range(dim):
            K[6, i] = tmp[i]
        for i in range(dim):
            acc = 0.0
            for j in range(7):
                acc += _E[j] * K[j, i]
            err[i] = h * acc
        en = _err_norm(err, y, ynew, tol)
        if en > 1.0:
            h = h * max(0.2, 0.9 * en ** (-0.2))
            continue

        # accepted step: events on the dense output
        kind = -1
        detail = 0
        best = 2.0
        if flags & EV_CROSS:
            tu = 2.0
            tv = 2.0
            if watch_u and ynew[0] <= 0.0:
                tu = _locate(1, energy, p, ev, r, y, K, h, tmp)
            if watch_v and ynew[2] <= 0.0:
                tv = _locate(2, energy, p, ev, r, y, K, h, tmp)
            if tu <= 1.0 or tv <= 1.0:
                kind = KIND_CROSS
                if abs(tu - tv) * abs(h) <= EVENT_TOL:
                    detail = DETAIL_BOTH
                    best = min(tu, tv)
                elif tu < tv:
                    detail = DETAIL_U
                    best = tu
                else:
                    detail = DETAIL_V
                    best = tv
        if flags & EV_BLOWUP:
            if max(ynew[0], ynew[2]) > ev[0]:
                t = _locate(3, energy, p, ev, r, y, K, h, tmp)
                if t < best:
                    best = t
                    kind = KIND_BLOWUP
                    detail = 0
        if flags & EV_DECAY:
            if _event_value(4, energy, r_new, ynew, p, ev) < 0.0:
                t = _locate(4, energy, p, ev, r, y, K, h, tmp)
                _dense(y, K, h, t, tmp)
                if t < best and tmp[1] <= 0.0 and tmp[3] <= 0.0:
                    best = t
                    kind = KIND_DECAY
                    detail = 0
        if flags & EV_ENERGY:
            if _energy(energy, r_new, ynew, p) + ev[3] < 0.0:
                t = _locate(5, energy, p, ev, r, y, K, h, tmp)
                if t < best:
                    best = t
                    kind = KIND_INDETERMINATE
                    detail = DETAIL_TRAPPED

        if kind >= 0:
            _dense(y, K, h, best, tmp)
            r_ev = r + best * h
            if record:
                if count == cap:
                    cap *= 2
                    rs2 = np.empty(cap)
                    ys2 = np.empty((cap, dim))
                    rs2[:count] = rs[:count]
                    ys2[:count, :] = ys[:count, :]
                    rs = rs2
                    ys = ys2
                rs[count] = r_ev
                ys[count, :] = tmp
                count += 1
            return kind, detail, r_ev, tmp.copy(), rs[:count], ys[:count], STATUS_OK

        r = r_new
        for i in range(dim):
            y[i] = ynew[i]
            K[0, i] = K[6, i]
        if record:
            if count == cap:
                cap *= 2
                rs2 = np.empty(cap)
                ys2 = np.empty((cap, dim))
                rs2[:count] = rs[:count]
                ys2[:count, :] = ys[:count, :]
                rs = rs2
                ys = ys2
            rs[count] = r
            ys[count, :] = y
            count += 1
        fac = 10.0 if en == 0.0 else min(10.0, max(0.2, 0.9 * en ** (-0.2)))
        h = min(h * fac, hmax)

    if status == STATUS_UNDERFLOW:
        return KIND_NONE, 0, r, y, rs[:count], ys[:count], status
    if flags != 0:
        return KIND_INDETERMINATE, DETAIL_HORIZON, r, y, rs[:count], ys[:count], STATUS_OK
    return KIND_NONE, 0, r, y, rs[:count], ys[:count], STATUS_OK
