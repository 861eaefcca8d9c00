"""Hot numeric kernels with optional numba acceleration.

Every kernel is written once as a plain Python/numpy function and wrapped
with ``numba.njit`` unless the environment variable ``NUMEROVCN_DISABLE_NUMBA``
is set to a non-empty value other than ``0``/``false`` (or numba is not
installed).  Both paths execute the same statements in the same order and
agree to rounding (complex division is the one primitive the two runtimes
evaluate differently); see ``benchmarks/bench_kernels.py`` for a timing
comparison.
"""

import os

import numpy as np

_env = os.environ.get("NUMEROVCN_DISABLE_NUMBA", "").strip().lower()
NUMBA_ENABLED = _env in ("", "0", "false")

if NUMBA_ENABLED:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def _njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@_njit(cache=True)
def tridiag_solve(dl, d, du, rhs, pivot_tol):
    """Solve a tridiagonal system by the Thomas double sweep.

    ``dl[i]`` is the entry in row ``i + 1`` below the diagonal, ``du[i]`` the
    entry in row ``i`` above it.  No pivoting is performed; a pivot whose
    modulus falls under ``pivot_tol`` times the infinity norm of its original
    row is reported as a failure.

    Returns ``(x, fail_row)`` where ``fail_row`` is -1 on success.
    """
    n = d.shape[0]
    x = np.empty(n, np.complex128)
    gam = np.empty(n, np.complex128)
    piv = d[0]
    scale = np.abs(d[0])
    if n > 1:
        scale += np.abs(du[0])
    if np.abs(piv) <= pivot_tol * scale:
        return x, 0
    x[0] = rhs[0] / piv
    for i in range(1, n):
        gam[i] = du[i - 1] / piv
        piv = d[i] - dl[i - 1] * gam[i]
        scale = np.abs(dl[i - 1]) + np.abs(d[i])
        if i < n - 1:
            scale += np.abs(du[i])
        if np.abs(piv) <= pivot_tol * scale:
            return x, i
        x[i] = (rhs[i] - dl[i - 1] * x[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - gam[i + 1] * x[i + 1]
    return x, -1


@_njit(cache=True)
def tridiag_matvec(dl, d, du, x):
    """y = T x for the tridiagonal matrix with bands (dl, d, du)."""
    n = d.shape[0]
    y = np.empty(n, np.complex128)
    for i in range(n):
        acc = d[i] * x[i]
        if i > 0:
            acc += dl[i - 1] * x[i - 1]
        if i < n - 1:
            acc += du[i] * x[i + 1]
        y[i] = acc
    return y


@_njit(cache=True)
def balance_inplace(a):
    """Diagonal similarity scaling equalizing row/column norms (radix 2)."""
    n = a.shape[0]
    radix = 2.0
    converged = False
    while not converged:
        converged = True
        for i in range(n):
            c = 0.0
            r = 0.0
            for j in range(n):
                if j != i:
                    c += np.abs(a[j, i])
                    r += np.abs(a[i, j])
            if c == 0.0 or r == 0.0:
                continue
            f = 1.0
            s = c + r
            while c < r / radix:
                c *= radix
                r /= radix
                f *= radix
            while c >= r * radix:
                c /= radix
                r *= radix
                f /= radix
            if (c + r) < 0.95 * s:
                converged = False
                inv = 1.0 / f
                for j in range(n):
                    a[i, j] *= inv
                for j in range(n):
                    a[j, i] *= f


@_njit(cache=True)
def hessenberg_inplace(a):
    """Householder similarity reduction to upper Hessenberg form."""
    n = a.shape[0]
    v = np.empty(n)
    for k in range(n - 2):
        xnorm = 0.0
        for i in range(k + 1, n):
            xnorm += a[i, k] * a[i, k]
        xnorm = np.sqrt(xnorm)
        if xnorm == 0.0:
            continue
        alpha = -xnorm if a[k + 1, k] >= 0.0 else xnorm
        vnorm2 = 0.0
        for i in range(k + 1, n):
            v[i] = a[i, k]
            if i == k + 1:
                v[i] -= alpha
            vnorm2 += v[i] * v[i]
        if vnorm2 == 0.0:
            continue
        # left: A <- A - (2/v'v) v (v'A)
        for j in range(k, n):
            dot = 0.0
            for i in range(k + 1, n):
                dot += v[i] * a[i, j]
            dot *= 2.0 / vnorm2
            for i in range(k + 1, n):
                a[i, j] -= dot * v[i]
        # right: A <- A - (A v) (2/v'v) v'
        for i in range(n):
            dot = 0.0
            for j in range(k + 1, n):
                dot += a[i, j] * v[j]
            dot *= 2.0 / vnorm2
            for j in range(k + 1, n):
                a[i, j] -= dot * v[j]
        a[k + 1, k] = alpha
        for i in range(k + 2, n):
            a[i, k] = 0.0


@_njit(cache=True)
def hessenberg_eigvals(h, max_iter_per_eig, defl_tol):
    """Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR.

    Subdiagonal entries below ``defl_tol`` times the sum of the moduli of the
    adjacent diagonal entries are deflated to zero.  Returns
    ``(re, im, fail)`` with ``fail`` the index of a block that exceeded the
    sweep budget, or -1 on full convergence.
    """
    n = h.shape[0]
    ere = np.empty(n)
    eim = np.empty(n)
    hi = n - 1
    iters = 0
    while hi >= 0:
        # locate the start of the active unreduced block
        lo = hi
        while lo > 0:
            s = np.abs(h[lo - 1, lo - 1]) + np.abs(h[lo, lo])
            if s == 0.0:
                s = 1.0
            if np.abs(h[lo, lo - 1]) <= defl_tol * s:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            ere[hi] = h[hi, hi]
            eim[hi] = 0.0
            hi -= 1
            iters = 0
            continue
        if lo == hi - 1:
            a = h[lo, lo]
            b = h[lo, hi]
            c = h[hi, lo]
            dd = h[hi, hi]
            tr2 = 0.5 * (a + dd)
            det = a * dd - b * c
            disc = tr2 * tr2 - det
            if disc >= 0.0:
                sq = np.sqrt(disc)
                if tr2 >= 0.0:
                    l1 = tr2 + sq
                else:
                    l1 = tr2 - sq
                ere[hi] = l1
                eim[hi] = 0.0
                if l1 != 0.0:
                    ere[hi - 1] = det / l1
                else:
                    ere[hi - 1] = 0.0
                eim[hi - 1] = 0.0
            else:
                sq = np.sqrt(-disc)
                ere[hi] = tr2
                eim[hi] = sq
                ere[hi - 1] = tr2
                eim[hi - 1] = -sq
            hi -= 2
            iters = 0
            continue
        iters += 1
        if iters > max_iter_per_eig:
            return ere, eim, hi
        # shift polynomial coefficients from the trailing 2x2 (or exceptional)
        if iters % 10 == 0:
            # stagnation: exceptional shift built from subdiagonal magnitudes
            s = np.abs(h[hi, hi - 1]) + np.abs(h[hi - 1, hi - 2])
            d11 = 0.75 * s + h[hi, hi]
            tr = 2.0 * d11
            det = d11 * d11 + 0.4375 * s * s
        else:
            tr = h[hi - 1, hi - 1] + h[hi, hi]
            det = h[hi - 1, hi - 1] * h[hi, hi] - h[hi - 1, hi] * h[hi, hi - 1]
        # first column of (H - s1 I)(H - s2 I)
        x = h[lo, lo] * h[lo, lo] + h[lo, lo + 1] * h[lo + 1, lo] - tr * h[lo, lo] + det
        y = h[lo + 1, lo] * (h[lo, lo] + h[lo + 1, lo + 1] - tr)
        if lo + 2 <= hi:
            z = h[lo + 2, lo + 1] * h[lo + 1, lo]
        else:
            z = 0.0
        # chase the bulge down the active block
        for k in range(lo, hi - 1):
            xn = np.sqrt(x * x + y * y + z * z)
            if xn != 0.0:
                alpha = -xn if x >= 0.0 else xn
                v0 = x - alpha
                v1 = y
                v2 = z
                vn2 = v0 * v0 + v1 * v1 + v2 * v2
                if vn2 != 0.0:
                    beta = 2.0 / vn2
                    jlo = k - 1 if k - 1 > lo else lo
                    for j in range(jlo, hi + 1):
                        dot = beta * (v0 * h[k, j] + v1 * h[k + 1, j] + v2 * h[k + 2, j])
                        h[k, j] -= dot * v0
                        h[k + 1, j] -= dot * v1
                        h[k + 2, j] -= dot * v2
                    iup = k + 3 if k + 3 < hi else hi
                    for i in range(lo, iup + 1):
                        dot = beta * (v0 * h[i, k] + v1 * h[i, k + 1] + v2 * h[i, k + 2])
                        h[i, k] -= dot * v0
                        h[i, k + 1] -= dot * v1
                        h[i, k + 2] -= dot * v2
            x = h[k + 1, k]
            y = h[k + 2, k]
            if k + 3 <= hi:
                z = h[k + 3, k]
            else:
                z = 0.0
        # last 2x2 rotation of the sweep
        xn = np.sqrt(x * x + y * y)
        if xn != 0.0:
            alpha = -xn if x >= 0.0 else xn
            v0 = x - alpha
            v1 = y
            vn2 = v0 * v0 + v1 * v1
            if vn2 != 0.0:
                beta = 2.0 / vn2
                k = hi - 1
                for j in range(k - 1, hi + 1):
                    dot = beta * (v0 * h[k, j] + v1 * h[k + 1, j])
                    h[k, j] -= dot * v0
                    h[k + 1, j] -= dot * v1
                for i in range(lo, hi + 1):
                    dot = beta * (v0 * h[i, k] + v1 * h[i, k + 1])
                    h[i, k] -= dot * v0
                    h[i, k + 1] -= dot * v1
    return ere, eim, -1


def warm_up():
    """Trigger JIT compilation of every kernel on tiny inputs."""
    dl = np.zeros(1, np.complex128)
    d = np.ones(2, np.complex128)
    du = np.zeros(1, np.complex128)
    rhs = np.ones(2, np.complex128)
    tridiag_solve(dl, d, du, rhs, 1e-14)
    tridiag_matvec(dl, d, du, rhs)
    a = np.eye(3)
    balance_inplace(a)
    hessenberg_inplace(a)
    hessenberg_eigvals(a, 40, 1e-14)
