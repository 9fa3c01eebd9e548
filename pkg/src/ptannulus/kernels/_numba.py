"""Loop kernels compiled with numba.

Every function here has a vectorized twin in ``_numpy.py`` with the same
signature and return convention. Status codes are returned rather than
raised so the kernels stay ``nogil``.
"""
import numpy as np
from numba import njit

EPS = np.finfo(np.float64).eps
MAX_ITS = 60
FLUSH = 1e-20


@njit(cache=True, nogil=True)
def balance(a):
    """Parlett-Reinsch diagonal scaling (radix 2), in place.

    Returns the scale vector ``d`` with ``a_out = D^-1 a_in D``.
    """
    n = a.shape[0]
    d = np.ones(n)
    radix = 2.0
    sqrdx = radix * radix
    done = False
    while not done:
        done = True
        for i in range(n):
            r = 0.0
            c = 0.0
            for j in range(n):
                if j != i:
                    c += abs(a[j, i])
                    r += abs(a[i, j])
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
                    g = 1.0 / f
                    d[i] *= f
                    for j in range(n):
                        a[i, j] *= g
                    for j in range(n):
                        a[j, i] *= f
    return d


@njit(cache=True, nogil=True)
def hessenberg(a, want_q):
    """Householder reduction ``a = q h q^H``; works for real and complex input.

    Entries below ``FLUSH * ||a||_1`` are zeroed before each reflector; this
    keeps banded input from filling in with underflowing noise.
    """
    n = a.shape[0]
    h = a.copy()
    q = np.zeros_like(h)
    for i in range(n):
        q[i, i] = 1.0
    anorm = 0.0
    for i in range(n):
        for j in range(n):
            anorm += abs(h[i, j])
    tiny = FLUSH * anorm
    v = np.zeros_like(h[0])
    for k in range(n - 2):
        last = k + 1
        for i in range(k + 2, n):
            if abs(h[i, k]) <= tiny:
                h[i, k] = 0.0
            else:
                last = i
        if last == k + 1:
            continue
        xnorm2 = 0.0
        for i in range(k + 1, last + 1):
            xnorm2 += abs(h[i, k]) ** 2
        xnorm = np.sqrt(xnorm2)
        x0 = h[k + 1, k]
        ax0 = abs(x0)
        if ax0 != 0.0:
            phase = x0 / ax0
        else:
            phase = x0 * 0.0 + 1.0
        alpha = -phase * xnorm
        v[k + 1] = x0 - alpha
        for i in range(k + 2, last + 1):
            v[i] = h[i, k]
        vnorm2 = abs(v[k + 1]) ** 2 + xnorm2 - ax0 * ax0
        if vnorm2 <= 0.0:
            continue
        vnorm = np.sqrt(vnorm2)
        for i in range(k + 1, last + 1):
            v[i] /= vnorm
        # left: rows k+1..last, columns k+1..
        for j in range(k + 1, n):
            s = v[k + 1] * 0.0
            for i in range(k + 1, last + 1):
                s += np.conj(v[i]) * h[i, j]
            s *= 2.0
            for i in range(k + 1, last + 1):
                h[i, j] -= v[i] * s
        # right: columns k+1..last
        for i in range(n):
            s = v[k + 1] * 0.0
            for j in range(k + 1, last + 1):
                s += h[i, j] * v[j]
            s *= 2.0
            for j in range(k + 1, last + 1):
                h[i, j] -= s * np.conj(v[j])
        if want_q:
            for i in range(n):
                s = v[k + 1] * 0.0
                for j in range(k + 1, last + 1):
                    s += q[i, j] * v[j]
                s *= 2.0
                for j in range(k + 1, last + 1):
                    q[i, j] -= s * np.conj(v[j])
        h[k + 1, k] = alpha
        for i in range(k + 2, last + 1):
            h[i, k] = 0.0
    return h, q


@njit(cache=True, nogil=True)
def hqr_real(a):
    """Francis double-shift QR on a real upper Hessenberg matrix (destroyed).

    Returns ``(wr, wi, info)``; ``info`` is 0 on success, otherwise 1 + the
    index of the eigenvalue that failed to converge.
    """
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = 0.0
    for i in range(n):
        for j in range(max(i - 1, 0), n):
            anorm += abs(a[i, j])
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
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = np.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + (z if p >= 0.0 else -z)
                    wr[nn - 1] = x + z
                    wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = 0.0
                    wi[nn] = 0.0
                else:
                    wr[nn - 1] = x + p
                    wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if its == MAX_ITS:
                return wr, wi, nn + 1
            if its == 10 or its == 20:
                t += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = 0.75 * s
                y = x
                w = -0.4375 * s * s
            its += 1
            m = nn - 2
            p = 0.0
            q = 0.0
            r = 0.0
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
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = 0.0
                    if k != nn - 1:
                        r = a[k + 2, k - 1]
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = np.sqrt(p * p + q * q + r * r)
                if p < 0.0:
                    s = -s
                if s != 0.0:
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
                    for j in range(k, nn + 1):
                        p = a[k, j] + q * a[k + 1, j]
                        if k != nn - 1:
                            p += r * a[k + 2, j]
                            a[k + 2, j] -= p * z
                        a[k + 1, j] -= p * y
                        a[k, j] -= p * x
                    mmin = min(nn, k + 3)
                    for i in range(l, mmin + 1):
                        p = x * a[i, k] + y * a[i, k + 1]
                        if k != nn - 1:
                            p += z * a[i, k + 2]
                            a[i, k + 2] -= p * r
                        a[i, k + 1] -= p * q
                        a[i, k] -= p
    return wr, wi, 0


@njit(cache=True, nogil=True)
def _wilkinson(a, b, c, d):
    # eigenvalue of [[a, b], [c, d]] closer to d
    half_tr = 0.5 * (a + d)
    disc = np.sqrt(0.25 * (a - d) * (a - d) + b * c)
    e1 = half_tr + disc
    e2 = half_tr - disc
    if abs(e1 - d) < abs(e2 - d):
        return e1
    return e2


@njit(cache=True, nogil=True)
def hqr_complex(h):
    """Single-shift implicit QR on a complex upper Hessenberg matrix (destroyed).

    Returns ``(w, info)`` with the same ``info`` convention as ``hqr_real``.
    """
    n = h.shape[0]
    w = np.zeros(n, dtype=np.complex128)
    anorm = 0.0
    for i in range(n):
        for j in range(max(i - 1, 0), n):
            anorm += abs(h[i, j])
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
            norm = np.sqrt(ax * ax + ay * ay)
            if ax == 0.0:
                c = 0.0
                sn = np.conj(y) / ay
                r = ay + 0.0j
            else:
                c = ax / norm
                ph = x / ax
                sn = ph * np.conj(y) / norm
                r = ph * norm
            if k > l:
                h[k, k - 1] = r
                h[k + 1, k - 1] = 0.0
            jstart = k if k > l else l
            for j in range(jstart, hi + 1):
                t1 = h[k, j]
                t2 = h[k + 1, j]
                h[k, j] = c * t1 + sn * t2
                h[k + 1, j] = -np.conj(sn) * t1 + c * t2
            iend = min(k + 2, hi)
            for i in range(l, iend + 1):
                t1 = h[i, k]
                t2 = h[i, k + 1]
                h[i, k] = c * t1 + np.conj(sn) * t2
                h[i, k + 1] = -sn * t1 + c * t2
    return w, 0


@njit(cache=True, nogil=True)
def hess_solve(h, sigma, b, tiny):
    """Solve ``(h - sigma I) y = b`` for complex upper Hessenberg ``h``.

    Gaussian elimination with adjacent-row pivoting; zero pivots are replaced
    by ``tiny`` (inverse iteration wants the near-singular solve).
    """
    n = h.shape[0]
    u = h.copy()
    y = b.copy()
    for i in range(n):
        u[i, i] -= sigma
    for k in range(n - 1):
        if abs(u[k + 1, k]) > abs(u[k, k]):
            for j in range(k, n):
                t = u[k, j]
                u[k, j] = u[k + 1, j]
                u[k + 1, j] = t
            t = y[k]
            y[k] = y[k + 1]
            y[k + 1] = t
        if u[k, k] == 0.0:
            u[k, k] = tiny
        f = u[k + 1, k] / u[k, k]
        if f != 0.0:
            for j in range(k + 1, n):
                u[k + 1, j] -= f * u[k, j]
            y[k + 1] -= f * y[k]
        u[k + 1, k] = 0.0
    if u[n - 1, n - 1] == 0.0:
        u[n - 1, n - 1] = tiny
    for i in range(n - 1, -1, -1):
        s = y[i]
        for j in range(i + 1, n):
            s -= u[i, j] * y[j]
        y[i] = s / u[i, i]
    return y
