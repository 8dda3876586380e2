"""Householder QR and block reflectors.

A product of ``m`` Householder reflectors ``H_0 H_1 ... H_{m-1}`` acting on
``C^K`` is stored compactly as ``I - V T V^H`` (``V`` unit lower trapezoidal,
``T`` upper triangular), and re-expressed with an orthonormal ``W`` spanning
the same columns as ``I - W T' W^H``.  Applying that form costs two skinny
``K x m`` products plus one ``m x m`` product.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import FactorizationError


@dataclass(eq=False)
class HouseholderQR:
    """``X[:, perm] = Q R`` with ``Q = H_0 ... H_{m-1} = I - V T V^H``."""

    v: np.ndarray     # (K, m), v[j, j] = 1, zeros above
    tau: np.ndarray   # (m,) real, H_j = I - tau_j v_j v_j^H
    t: np.ndarray     # (m, m) upper triangular
    r: np.ndarray     # (m, m) upper triangular
    perm: np.ndarray  # column order used

    @property
    def shape(self):
        return self.v.shape

    def apply_q(self, x):
        """``Q @ x`` by applying the reflectors one after another."""
        x = np.array(x, dtype=complex, copy=True)
        vec = x.ndim == 1
        if vec:
            x = x[:, None]
        for j in range(self.v.shape[1] - 1, -1, -1):
            vj = self.v[j:, j]
            x[j:] -= self.tau[j] * np.outer(vj, np.conj(vj) @ x[j:])
        return x[:, 0] if vec else x

    def explicit_q(self, columns=None):
        k = self.v.shape[0]
        cols = np.arange(k) if columns is None else np.asarray(columns)
        e = np.zeros((k, cols.size), dtype=complex)
        e[cols, np.arange(cols.size)] = 1.0
        return self.apply_q(e)


def householder_qr(x, pivot=True):
    """Householder QR of a tall ``K x m`` matrix, optionally with column pivoting.

    Reflectors are Hermitian: ``H = I - 2 v v^H / (v^H v)`` with the phase of
    ``beta`` chosen opposite to the leading entry to avoid cancellation.
    """
    a = np.array(x, dtype=complex, copy=True)
    k, m = a.shape
    if m > k:
        raise FactorizationError(f"need a tall matrix, got {k}x{m}")
    v = np.zeros((k, m), dtype=complex)
    tau = np.zeros(m)
    perm = np.arange(m)
    for j in range(m):
        if pivot:
            norms = np.sum(np.abs(a[j:, j:]) ** 2, axis=0)
            jj = j + int(np.argmax(norms))
            if jj != j:
                a[:, [j, jj]] = a[:, [jj, j]]
                perm[[j, jj]] = perm[[jj, j]]
        col = a[j:, j]
        nrm = np.linalg.norm(col)
        if nrm == 0.0:
            v[j, j] = 1.0
            continue
        alpha = col[0]
        phase = alpha / abs(alpha) if alpha != 0 else 1.0
        beta = -phase * nrm
        vj = col.copy()
        vj[0] -= beta
        vj /= vj[0]
        tau[j] = 2.0 / np.real(np.vdot(vj, vj))
        a[j:, j:] -= tau[j] * np.outer(vj, np.conj(vj) @ a[j:, j:])
        a[j + 1:, j] = 0.0
        v[j:, j] = vj
    return HouseholderQR(v=v, tau=tau, t=compact_wy_t(v, tau), r=np.triu(a[:m]), perm=perm)


def compact_wy_t(v, tau):
    """Upper triangular ``T`` with ``H_0 ... H_{m-1} = I - V T V^H``."""
    m = v.shape[1]
    t = np.zeros((m, m), dtype=complex)
    for j in range(m):
        t[j, j] = tau[j]
        if j:
            t[:j, j] = -tau[j] * (t[:j, :j] @ (np.conj(v[:, :j].T) @ v[:, j]))
    return t


@dataclass(eq=False)
class BlockReflector:
    """``x -> x - W T W^H x`` with orthonormal ``W``, restricted to selected columns.

    The input vector ``d`` is embedded at rows ``offset:`` of a zero ``K``
    vector before the reflector acts, i.e. the operator's columns are
    ``offset .. K-1`` of the full ``K x K`` matrix.
    """

    w: np.ndarray
    t: np.ndarray
    offset: int = 0
    identity_t: bool = False

    @property
    def n_rows(self):
        return self.w.shape[0]

    @property
    def n_cols(self):
        return self.w.shape[0] - self.offset

    @property
    def rank(self):
        return self.w.shape[1]

    def apply(self, d, matmul=None):
        """Apply to a length ``n_cols`` vector or an ``(n_cols, n)`` block.

        Passing ``matmul`` routes every product through that callable (used to
        count arithmetic); otherwise the compiled kernel is used.
        """
        d = np.asarray(d, dtype=complex)
        vec = d.ndim == 1
        x = d[:, None] if vec else d
        if x.shape[0] != self.n_cols:
            raise ValueError(f"input has {x.shape[0]} rows, expected {self.n_cols}")
        full = np.zeros((self.n_rows, x.shape[1]), dtype=complex)
        full[self.offset:] = x
        if matmul is None:
            out = _kernels.reflector_apply(self.w, self.t, full)
        else:
            c = matmul(np.conj(self.w[self.offset:].T), x)
            if not self.identity_t:
                c = matmul(self.t, c)
            out = full - matmul(self.w, c)
        return out[:, 0] if vec else out

    def dense(self):
        return self.apply(np.eye(self.n_cols, dtype=complex))


def orthonormal_form(v, t):
    """Rewrite ``I - V T V^H`` as ``I - W T' W^H`` with ``W^H W = I``."""
    w, s = np.linalg.qr(v)
    return w, s @ t @ np.conj(s.T)
