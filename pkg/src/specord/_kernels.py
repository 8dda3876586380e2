"""Hot inner loops of the capacity Monte Carlo and precoder application.

Every kernel has two implementations with identical signatures: a numba
``@njit`` version and a pure-numpy version.  The numba path is used when
numba imports cleanly and ``SPECORD_DISABLE_NUMBA`` is unset (or ``0``).
Both are exposed through ``NUMBA_KERNELS`` / ``NUMPY_KERNELS`` so tests
and ``benchmarks/bench_kernels.py`` can exercise them side by side.

Shapes used throughout:

h    (n, K, Nr, Nt)  per-trial, per-tone channel matrices
q    (n, K, Nt, Nt)  per-tone terms G (I + rho G)^-1 with G = H^H H
z    (K, m, m)       outer products conj(w_k) w_k^T of a complement basis
"""
import os

import numpy as np

LN2 = np.log(2.0)


def _flag_disabled():
    return os.environ.get("SPECORD_DISABLE_NUMBA", "0").strip().lower() not in (
        "", "0", "false", "no")


# ---------------------------------------------------------------- numpy path

def tone_stats_np(h, rho):
    """Per-tone log2 det(I + rho H^H H) and the push-through term Q."""
    g = np.conj(np.swapaxes(h, -1, -2)) @ h
    nt = h.shape[-1]
    m = np.eye(nt) + rho * g
    chol = np.linalg.cholesky(m)
    diag = np.real(np.diagonal(chol, axis1=-2, axis2=-1))
    logdet = 2.0 * np.sum(np.log(diag), axis=-1) / LN2
    q = np.linalg.solve(m, g)
    return logdet, q


def deflation_logdet_np(z, q, rho):
    """log2 det(I - rho S) where S[(a,s),(b,t)] = sum_k z[k,a,b] q[k,s,t]."""
    n, k, nt, _ = q.shape
    mm = z.shape[1]
    zf = z.reshape(k, mm * mm).T
    s = zf @ q.reshape(n, k, nt * nt)
    s = s.reshape(n, mm, mm, nt, nt).transpose(0, 1, 3, 2, 4)
    s = s.reshape(n, mm * nt, mm * nt)
    a = np.eye(mm * nt) - rho * s
    chol = np.linalg.cholesky(a)
    diag = np.real(np.diagonal(chol, axis1=-2, axis2=-1))
    return 2.0 * np.sum(np.log(diag), axis=-1) / LN2


def reflector_apply_np(w, t, x):
    """x - W T W^H x for a (K, n) block of column vectors."""
    return x - w @ (t @ (np.conj(w.T) @ x))


# ---------------------------------------------------------------- numba path

try:
    import numba as nb
except ImportError:  # pragma: no cover - numba is a declared dependency
    nb = None


if nb is not None:

    @nb.njit(cache=True, nogil=True)
    def _chol_logdet_inplace(a):
        # lower Cholesky overwriting a; returns sum of log of the diagonal
        p = a.shape[0]
        acc = 0.0
        for j in range(p):
            d = a[j, j].real
            for c in range(j):
                d -= a[j, c].real ** 2 + a[j, c].imag ** 2
            if d <= 0.0:
                return np.nan
            d = np.sqrt(d)
            a[j, j] = d
            acc += np.log(d)
            for i in range(j + 1, p):
                v = a[i, j]
                for c in range(j):
                    v -= a[i, c] * np.conj(a[j, c])
                a[i, j] = v / d
        return acc

    @nb.njit(cache=True, nogil=True)
    def tone_stats_nb(h, rho):
        n, kk, nr, nt = h.shape
        logdet = np.empty((n, kk))
        q = np.empty((n, kk, nt, nt), dtype=np.complex128)
        g = np.empty((nt, nt), dtype=np.complex128)
        m = np.empty((nt, nt), dtype=np.complex128)
        y = np.empty(nt, dtype=np.complex128)
        for i in range(n):
            for k in range(kk):
                for a in range(nt):
                    for b in range(nt):
                        v = 0j
                        for r in range(nr):
                            v += np.conj(h[i, k, r, a]) * h[i, k, r, b]
                        g[a, b] = v
                        m[a, b] = rho * v
                    m[a, a] += 1.0
                logdet[i, k] = 2.0 * _chol_logdet_inplace(m) / LN2
                # Q = M^-1 G, one column of G at a time
                for col in range(nt):
                    for r in range(nt):
                        v = g[r, col]
                        for c in range(r):
                            v -= m[r, c] * y[c]
                        y[r] = v / m[r, r].real
                    for r in range(nt - 1, -1, -1):
                        v = y[r]
                        for c in range(r + 1, nt):
                            v -= np.conj(m[c, r]) * q[i, k, c, col]
                        q[i, k, r, col] = v / m[r, r].real
        return logdet, q

    @nb.njit(cache=True, nogil=True)
    def deflation_logdet_nb(z, q, rho):
        n, kk, nt, _ = q.shape
        mm = z.shape[1]
        p = mm * nt
        out = np.empty(n)
        s = np.empty((p, p), dtype=np.complex128)
        # the k-contraction goes through BLAS, only the Cholesky is a hand loop
        zf = np.ascontiguousarray(z.reshape(kk, mm * mm).T)
        for i in range(n):
            sf = np.dot(zf, q[i].reshape(kk, nt * nt))
            for a in range(mm):
                for st in range(nt):
                    for b in range(a + 1):
                        for tt in range(nt):
                            s[a * nt + st, b * nt + tt] = -rho * sf[a * mm + b, st * nt + tt]
            for j in range(p):
                s[j, j] += 1.0
            out[i] = 2.0 * _chol_logdet_inplace(s) / LN2
        return out

    @nb.njit(cache=True, nogil=True)
    def reflector_apply_nb(w, t, x):
        wh = np.ascontiguousarray(np.conj(w.T))
        return x - np.dot(w, np.dot(t, np.dot(wh, x)))

    NUMBA_KERNELS = {
        "tone_stats": tone_stats_nb,
        "deflation_logdet": deflation_logdet_nb,
        "reflector_apply": reflector_apply_nb,
    }
else:  # pragma: no cover
    NUMBA_KERNELS = {}

NUMPY_KERNELS = {
    "tone_stats": tone_stats_np,
    "deflation_logdet": deflation_logdet_np,
    "reflector_apply": reflector_apply_np,
}

USE_NUMBA = bool(NUMBA_KERNELS) and not _flag_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"
_ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS


def tone_stats(h, rho):
    h = np.ascontiguousarray(h, dtype=np.complex128)
    return _ACTIVE["tone_stats"](h, float(rho))


def deflation_logdet(z, q, rho):
    z = np.ascontiguousarray(z, dtype=np.complex128)
    q = np.ascontiguousarray(q, dtype=np.complex128)
    return _ACTIVE["deflation_logdet"](z, q, float(rho))


def reflector_apply(w, t, x):
    w = np.ascontiguousarray(w, dtype=np.complex128)
    t = np.ascontiguousarray(t, dtype=np.complex128)
    x = np.ascontiguousarray(x, dtype=np.complex128)
    return _ACTIVE["reflector_apply"](w, t, x)
