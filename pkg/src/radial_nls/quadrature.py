"""Vectorised adaptive Simpson quadrature over many intervals at once."""

import numpy as np


def adaptive_simpson(func, a, b, tol=1e-12, max_depth=40):
    """Integrate ``func`` over each interval [a[i], b[i]].

    ``func(x, idx)`` receives sample points and the index of the interval each
    point belongs to, and must return values of the same shape.  ``tol`` is an
    absolute tolerance per interval; it is halved on every bisection.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    m = a.size
    result = np.zeros(m)
    idx = np.arange(m)
    a = a.ravel().copy()
    b = b.ravel().copy()
    mid = 0.5 * (a + b)
    fa = func(a, idx)
    fb = func(b, idx)
    fm = func(mid, idx)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    tols = np.full(m, float(tol))
    depth = 0
    while idx.size:
        lm = 0.5 * (a + mid)
        rm = 0.5 * (mid + b)
        flm = func(lm, idx)
        frm = func(rm, idx)
        left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        done = np.abs(delta) <= 15.0 * tols
        if depth >= max_depth:
            done[:] = True
        np.add.at(result, idx[done], (left + right + delta / 15.0)[done])
        keep = ~done
        if not keep.any():
            break
        # children: [a, mid] and [mid, b]
        idx = np.concatenate([idx[keep], idx[keep]])
        na = np.concatenate([a[keep], mid[keep]])
        nb = np.concatenate([mid[keep], b[keep]])
        nfa = np.concatenate([fa[keep], fm[keep]])
        nfb = np.concatenate([fm[keep], fb[keep]])
        nfm = np.concatenate([flm[keep], frm[keep]])
        whole = np.concatenate([left[keep], right[keep]])
        tols = np.concatenate([tols[keep], tols[keep]]) * 0.5
        a, b, fa, fb, fm = na, nb, nfa, nfb, nfm
        mid = 0.5 * (a + b)
        depth += 1
    return result


def simpson_integral(func, a, b, tol=1e-12):
    """Scalar convenience wrapper: ``func(x)`` vectorised, one interval."""
    return float(adaptive_simpson(lambda x, i: func(x), [a], [b], tol)[0])
