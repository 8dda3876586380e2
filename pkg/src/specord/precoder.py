"""Spectral precoders: least-squares notching (LSN) and orthogonal PLM.

All precoders here act on the occupied tones only.  ``G`` is ``K x L``
with ``K`` occupied subcarriers and ``L`` data streams.  Every supported
design makes ``G G^H`` an orthogonal projector ``I - W_c W_c^H``, where
``W_c`` (``K x m``) spans the suppressed directions; the capacity module
relies on that complement basis for its fast path.
"""
import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (DimensionError, FactorizationError,
                     IllConditionedConstraintsError, SpecordError)
from .grid import NotchSpec, SubcarrierGrid, response_matrix
from .reflectors import BlockReflector, HouseholderQR, householder_qr, orthonormal_form

KINDS = ("identity", "lsn_projector", "lsn_orthonormal", "plm")
MAX_GRAM_CONDITION = 1e12


@dataclass(eq=False)
class Precoder:
    kind: str
    dense: Optional[np.ndarray] = None
    factored: Optional[BlockReflector] = None
    grid: Optional[SubcarrierGrid] = None
    notch: Optional[NotchSpec] = None
    constraints: Optional[np.ndarray] = None
    complement_basis: Optional[np.ndarray] = None
    _qr: Optional[HouseholderQR] = dataclasses.field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown precoder kind {self.kind!r}")
        if self.dense is None and self.factored is None:
            raise ValueError("precoder needs a dense or factored form")

    @property
    def n_subcarriers(self):
        if self.dense is not None:
            return self.dense.shape[0]
        return self.factored.n_rows

    @property
    def n_streams(self):
        if self.dense is not None:
            return self.dense.shape[1]
        return self.factored.n_cols

    @property
    def n_constraints(self):
        return self.complement().shape[1]

    def matrix(self):
        if self.dense is None:
            self.dense = self.factored.dense()
        return self.dense

    def complement(self):
        """Orthonormal basis of the directions ``G G^H`` removes."""
        if self.complement_basis is None:
            g = self.matrix()
            p = g @ np.conj(g.T)
            vals, vecs = np.linalg.eigh(np.eye(p.shape[0]) - p)
            keep = vals > 0.5
            self.complement_basis = vecs[:, keep]
        return self.complement_basis

    def apply(self, d):
        return apply_precoder(self, d)


@dataclass(eq=False)
class LeakageMatrix:
    b: np.ndarray
    sample_freqs: np.ndarray


def identity_precoder(n, grid=None):
    return Precoder("identity", dense=np.eye(n, dtype=complex), grid=grid,
                    complement_basis=np.zeros((n, 0), dtype=complex))


def constraint_matrix(grid, notch):
    """Rows are spectral responses of every occupied tone at one notch frequency."""
    freqs = notch.frequencies if isinstance(notch, NotchSpec) else notch
    return response_matrix(grid, freqs)


def _gram_condition(r):
    sv = np.linalg.svd(r, compute_uv=False)
    if sv[-1] == 0.0:
        return np.inf
    return (sv[0] / sv[-1]) ** 2


def lsn_precoder(a, mode="orthonormal", grid=None, notch=None):
    """Least-squares notching precoder with ``A G = 0``.

    ``projector``: ``G = I - A^H (A A^H)^-1 A`` (square, rank ``L0 - m``).
    ``orthonormal``: the last ``L0 - m`` columns of the unitary factor of
    ``A^H`` (``L0 x (L0 - m)``, orthonormal columns).
    """
    if mode not in ("projector", "orthonormal"):
        raise ValueError(f"mode must be 'projector' or 'orthonormal', got {mode!r}")
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    m, l0 = a.shape
    kind = "lsn_" + mode
    if m == 0:
        return Precoder(kind, dense=np.eye(l0, dtype=complex), grid=grid, notch=notch,
                        constraints=a, complement_basis=np.zeros((l0, 0), dtype=complex))
    if m >= l0:
        raise IllConditionedConstraintsError(f"{m} constraints leave no degrees of freedom on {l0} tones")
    qr = householder_qr(np.conj(a.T), pivot=True)
    cond = _gram_condition(qr.r)
    if not cond <= MAX_GRAM_CONDITION:
        raise IllConditionedConstraintsError(f"cond(A A^H) = {cond:.3e} exceeds {MAX_GRAM_CONDITION:.0e}")
    w = qr.explicit_q(range(m))
    if mode == "projector":
        g = np.eye(l0) - w @ np.conj(w.T)
    else:
        g = qr.explicit_q(range(m, l0))
    return Precoder(kind, dense=g, grid=grid, notch=notch, constraints=a,
                    complement_basis=w, _qr=qr)


def leakage_matrix(grid, notch):
    """Riemann-sum leakage ``B = F_s * sum_f conj(a(f)) a(f)^T`` over the band samples."""
    if not notch.is_band:
        raise ValueError("leakage matrix needs band intervals and a sample spacing")
    freqs = notch.sample_points()
    if freqs.size == 0:
        raise ValueError("band sample grid is empty")
    rows = response_matrix(grid, freqs)
    b = notch.sample_spacing * (np.conj(rows.T) @ rows)
    b = 0.5 * (b + np.conj(b.T))
    return LeakageMatrix(b=b, sample_freqs=freqs)


def plm_precoder(b, n_streams, grid=None, notch=None):
    """Orthonormal precoder minimising ``trace(G^H B G)``.

    The minimiser is spanned by the eigenvectors of the ``n_streams``
    smallest eigenvalues.  Ties at the cut make the subspace solver
    dependent; the attained leakage is not.
    """
    mat = b.b if isinstance(b, LeakageMatrix) else np.asarray(b)
    l0 = mat.shape[0]
    if not 1 <= n_streams <= l0:
        raise DimensionError(f"stream count must be in [1, {l0}], got {n_streams}")
    try:
        _, vecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise SpecordError(f"eigendecomposition of the leakage matrix failed: {exc}") from exc
    return Precoder("plm", dense=np.ascontiguousarray(vecs[:, :n_streams]), grid=grid, notch=notch,
                    complement_basis=np.ascontiguousarray(vecs[:, n_streams:]))


def leakage(p, b):
    """``trace(G^H B G)``."""
    mat = b.b if isinstance(b, LeakageMatrix) else np.asarray(b)
    g = p.matrix() if isinstance(p, Precoder) else np.asarray(p)
    return float(np.real(np.sum(np.conj(g) * (mat @ g))))


def block_reflector_factorize(p):
    """Attach the block-reflector form of an LSN precoder.

    Projector mode is ``I - W W^H`` directly.  Orthonormal mode uses the
    compact WY representation of the Householder factor of ``A^H``, rewritten
    with an orthonormal ``W`` and an ``m x m`` coupling block.
    """
    if p.kind not in ("lsn_projector", "lsn_orthonormal"):
        raise FactorizationError(f"block reflector form is defined for LSN precoders, not {p.kind!r}")
    qr = p._qr
    if qr is None:
        if p.constraints is None:
            raise FactorizationError("precoder carries no constraint matrix to factor")
        if p.constraints.shape[0] == 0:
            qr = None
        else:
            qr = householder_qr(np.conj(p.constraints.T), pivot=True)
    l0 = p.n_subcarriers
    if qr is None:
        refl = BlockReflector(np.zeros((l0, 0), dtype=complex), np.zeros((0, 0), dtype=complex),
                              offset=0, identity_t=True)
        return dataclasses.replace(p, factored=refl)
    m = qr.v.shape[1]
    if l0 - m != np.linalg.matrix_rank(p.matrix(), tol=1e-8):
        raise FactorizationError("rank of the precoder does not match its constraint count")
    if p.kind == "lsn_projector":
        w = p.complement() if p.complement_basis is not None else qr.explicit_q(range(m))
        refl = BlockReflector(w, np.eye(m, dtype=complex), offset=0, identity_t=True)
    else:
        w, t = orthonormal_form(qr.v, qr.t)
        refl = BlockReflector(w, t, offset=m)
    return dataclasses.replace(p, factored=refl, _qr=qr)


def apply_precoder(p, d):
    """``xi = G d`` on the occupied tones; uses the factored form when present."""
    d = np.asarray(d)
    if d.shape[0] != p.n_streams:
        raise DimensionError(f"data has {d.shape[0]} streams, precoder expects {p.n_streams}")
    if p.factored is not None:
        return p.factored.apply(d)
    return p.dense @ d
