"""Independent reference computations used by the tests.

These avoid the package's assembly code: constraint rows are built directly
from dense state vectors with explicit index loops.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def dense_constraints(vectors, dims, measured):
    """Rows <psi_i|(I (x) E)|psi_j> as linear forms in the entries E[a, b]."""
    n_parties = len(dims)
    kept = [p for p in range(n_parties) if p not in measured]
    mdims = [dims[p] for p in measured]
    kdims = [dims[p] for p in kept]
    dm = math.prod(mdims)
    tensors = [np.asarray(v).reshape(dims) for v in vectors]
    rows = []
    for i, j in itertools.permutations(range(len(vectors)), 2):
        row = np.zeros((dm, dm), dtype=complex)
        for klab in itertools.product(*(range(d) for d in kdims)):
            for a, alab in enumerate(itertools.product(*(range(d) for d in mdims))):
                idx_a = _merge(klab, alab, kept, measured, n_parties)
                ca = np.conj(tensors[i][idx_a])
                if ca == 0:
                    continue
                for b, blab in enumerate(itertools.product(*(range(d) for d in mdims))):
                    row[a, b] += ca * tensors[j][_merge(klab, blab, kept, measured, n_parties)]
        rows.append(row.reshape(-1))
    return np.array(rows)


def _merge(klab, mlab, kept, measured, n):
    out = [0] * n
    for p, x in zip(kept, klab):
        out[p] = x
    for p, x in zip(measured, mlab):
        out[p] = x
    return tuple(out)


def nullspace_dim(matrix, rel_tol=1e-9):
    n = matrix.shape[1]
    s = np.linalg.svd(matrix, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return n
    return n - int(np.count_nonzero(s >= rel_tol * s[0]))
