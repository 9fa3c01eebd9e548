"""Vectorized numpy versions of the loop kernels in ``_numba.py``.

Same algorithms, same signatures, same status codes. Inner loops become
slice updates; the scalar control flow stays in Python, so these are much
slower than the compiled kernels but need nothing beyond numpy.
"""
import math

import numpy as np

EPS = np.finfo(np.float64).eps
MAX_ITS = 60
FLUSH = 1e-20


def balance(a):
    n = a.shape[0]
    d = np.ones(n)
    radix = 2.0
    sqrdx = radix * radix
    done = False
    while not done:
        done = True
        for i in range(n):
            c = np.abs(a[:, i]).sum() - abs(a[i, i])
            r = np.abs(a[i, :]).sum() - abs(a[i, i])
            if c != 0.0 and r != 0.0:
                g = r / radix
                f = 1.0
                s = c + r
                while c < g:
                    f *= radix
                    c *= sqrdx
                g = r * radix
                while c > g:
                    f /= radix
                    c /= sqrdx
                if (c + r) / f < 0.95 * s:
                    done = False
                    d[i] *= f
                    a[i, :] *= 1.0 / f
                    a[:, i] *= f
    return d


def hessenberg(a, want_q):
    n = a.shape[0]
    h = a.copy()
    q = np.eye(n, dtype=h.dtype)
    tiny = FLUSH * float(np.abs(h).sum())
    for k in range(n - 2):
        col = h[k + 2:, k]
        col[np.abs(col) <= tiny] = 0.0
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        last = k + 2 + int(nz[-1])
        x = h[k + 1:last + 1, k]
        xnorm2 = float(np.vdot(x, x).real)
        xnorm = math.sqrt(xnorm2)
        x0 = h[k + 1, k]
        ax0 = abs(x0)
        phase = x0 / ax0 if ax0 != 0.0 else 1.0
        alpha = -phase * xnorm
        v = x.copy()
        v[0] = x0 - alpha
        vnorm2 = abs(v[0]) ** 2 + xnorm2 - ax0 * ax0
        if vnorm2 <= 0.0:
            continue
        v /= math.sqrt(vnorm2)
        vc = np.conj(v)
        rs = slice(k + 1, last + 1)
        h[rs, k + 1:] -= 2.0 * np.outer(v, vc @ h[rs, k + 1:])
        h[:, rs] -= 2.0 * np.outer(h[:, rs] @ v, vc)
        if want_q:
            q[:, rs] -= 2.0 * np.outer(q[:, rs] @ v, vc)
        h[k + 1, k] = alpha
        h[k + 2:last + 1, k] = 0.0
    return h, q


def hqr_real(a):
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = float(np.abs(np.triu(a, -1)).sum())
    nn = n - 1
    t = 0.0
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) <= EPS * s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = float(a[nn, nn])
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = float(a[nn - 1, nn - 1])
            w = float(a[nn, nn - 1] * a[nn - 1, nn])
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if its == MAX_ITS:
                return wr, wi, nn + 1
            if its == 10 or its == 20:
                t += x
                idx = np.arange(nn + 1)
                a[idx, idx] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = y = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u <= EPS * v:
                    break
                m -= 1
            i = np.arange(m + 2, nn + 1)
            a[i, i - 2] = 0.0
            i = i[1:]
            a[i, i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                cols = slice(k, nn + 1)
                rows = slice(l, min(nn, k + 3) + 1)
                if k != nn - 1:
                    pv = a[k, cols] + q * a[k + 1, cols] + r * a[k + 2, cols]
                    a[k + 2, cols] -= pv * z
                    a[k + 1, cols] -= pv * y
                    a[k, cols] -= pv * x
                    pv = x * a[rows, k] + y * a[rows, k + 1] + z * a[rows, k + 2]
                    a[rows, k + 2] -= pv * r
                    a[rows, k + 1] -= pv * q
                    a[rows, k] -= pv
                else:
                    pv = a[k, cols] + q * a[k + 1, cols]
                    a[k + 1, cols] -= pv * y
                    a[k, cols] -= pv * x
                    pv = x * a[rows, k] + y * a[rows, k + 1]
                    a[rows, k + 1] -= pv * q
                    a[rows, k] -= pv
    return wr, wi, 0


def _wilkinson(a, b, c, d):
    half_tr = 0.5 * (a + d)
    disc = np.sqrt(0.25 * (a - d) * (a - d) + b * c + 0j)
    e1 = half_tr + disc
    e2 = half_tr - disc
    return e1 if abs(e1 - d) < abs(e2 - d) else e2


def hqr_complex(h):
    n = h.shape[0]
    w = np.zeros(n, dtype=np.complex128)
    anorm = float(np.abs(np.triu(h, -1)).sum())
    hi = n - 1
    its = 0
    while hi >= 0:
        l = hi
        while l >= 1:
            s = abs(h[l - 1, l - 1]) + abs(h[l, l])
            if s == 0.0:
                s = anorm
            if abs(h[l, l - 1]) <= EPS * s:
                h[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            w[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        if its == MAX_ITS:
            return w, hi + 1
        if its == 10 or its == 20:
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            mu = _wilkinson(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        its += 1
        for k in range(l, hi):
            if k == l:
                x = h[l, l] - mu
                y = h[l + 1, l]
            else:
                x = h[k, k - 1]
                y = h[k + 1, k - 1]
            ax = abs(x)
            ay = abs(y)
            if ay == 0.0:
                continue
            norm = math.hypot(ax, ay)
            if ax == 0.0:
                c = 0.0
                sn = np.conj(y) / ay
                r = ay + 0j
            else:
                c = ax / norm
                ph = x / ax
                sn = ph * np.conj(y) / norm
                r = ph * norm
            if k > l:
                h[k, k - 1] = r
                h[k + 1, k - 1] = 0.0
            cols = slice(k if k > l else l, hi + 1)
            t1 = h[k, cols].copy()
            t2 = h[k + 1, cols]
            h[k, cols] = c * t1 + sn * t2
            h[k + 1, cols] = -np.conj(sn) * t1 + c * t2
            rows = slice(l, min(k + 2, hi) + 1)
            t1 = h[rows, k].copy()
            t2 = h[rows, k + 1]
            h[rows, k] = c * t1 + np.conj(sn) * t2
            h[rows, k + 1] = -sn * t1 + c * t2
    return w, 0


def hess_solve(h, sigma, b, tiny):
    n = h.shape[0]
    u = h.copy()
    y = b.copy()
    u[np.arange(n), np.arange(n)] -= sigma
    for k in range(n - 1):
        if abs(u[k + 1, k]) > abs(u[k, k]):
            u[[k, k + 1], k:] = u[[k + 1, k], k:]
            y[[k, k + 1]] = y[[k + 1, k]]
        if u[k, k] == 0.0:
            u[k, k] = tiny
        f = u[k + 1, k] / u[k, k]
        if f != 0.0:
            u[k + 1, k + 1:] -= f * u[k, k + 1:]
            y[k + 1] -= f * y[k]
        u[k + 1, k] = 0.0
    if u[n - 1, n - 1] == 0.0:
        u[n - 1, n - 1] = tiny
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - u[i, i + 1:] @ y[i + 1:]) / u[i, i]
    return y
