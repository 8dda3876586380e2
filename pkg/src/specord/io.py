"""Text matrix format for caching precoder designs.

Header line::

    # specord-precoder kind=<kind> K=<K> L=<L> m=<m>

followed by ``K`` rows of ``2L`` numbers: real and imaginary part of each
entry, row-major.
"""
import numpy as np

from .errors import SpecordError
from .precoder import KINDS, Precoder

MAGIC = "# specord-precoder"


def save_precoder(p, path):
    g = p.matrix()
    k, l = g.shape
    pairs = np.empty((k, 2 * l))
    pairs[:, 0::2] = g.real
    pairs[:, 1::2] = g.imag
    header = f"{MAGIC} kind={p.kind} K={k} L={l} m={p.n_constraints}"
    with open(path, "w") as fh:
        fh.write(header + "\n")
        np.savetxt(fh, pairs, fmt="%.17g")


def load_precoder(path):
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith(MAGIC):
            raise SpecordError(f"{path}: not a precoder file")
        try:
            fields = dict(tok.split("=", 1) for tok in header[len(MAGIC):].split())
            kind, k, l, m = fields["kind"], int(fields["K"]), int(fields["L"]), int(fields["m"])
        except (KeyError, ValueError):
            raise SpecordError(f"{path}: malformed header {header!r}") from None
        if kind not in KINDS:
            raise SpecordError(f"{path}: unknown precoder kind {kind!r}")
        pairs = np.loadtxt(fh, ndmin=2)
    if pairs.shape != (k, 2 * l):
        raise SpecordError(f"{path}: body is {pairs.shape}, header says {k}x{2 * l}")
    p = Precoder(kind, dense=pairs[:, 0::2] + 1j * pairs[:, 1::2])
    if p.n_constraints != m:
        raise SpecordError(f"{path}: precoder removes {p.n_constraints} directions, header says {m}")
    return p
