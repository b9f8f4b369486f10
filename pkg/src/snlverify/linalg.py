"""Rank-revealing helpers: nullspace, spectral tail and gap of a dense matrix.

Two methods give the same answer. ``svd`` runs a full dense SVD. ``qr``
factors A = QR once, then finds the smallest singular pairs of R with ARPACK
applied to (R^H R)^{-1} through triangular solves; every singular direction
found below the threshold is lifted to the top of the spectrum by appending a
row to R (Givens update) so the next round sees a well-conditioned factor.
The qr method never forms the full spectrum, only its tail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .errors import ValidationError

FULL_SVD_LIMIT = 1024


@dataclass
class Spectrum:
    """Nullspace of a matrix at a relative tolerance plus spectral diagnostics."""

    smax: float
    null_basis: np.ndarray  # columns, orthonormal
    null_values: np.ndarray  # singular values of the null directions
    kept_tail: np.ndarray  # smallest singular values above the threshold, ascending
    method: str

    @property
    def null_dim(self) -> int:
        return self.null_basis.shape[1]

    @property
    def gap(self) -> float:
        """Smallest kept over largest discarded singular value (inf when nothing is kept)."""
        if self.kept_tail.size == 0:
            return float("inf")
        floor = np.finfo(float).eps * self.smax
        worst = max(float(self.null_values.max()), floor) if self.null_values.size else floor
        return float(self.kept_tail[0]) / worst

    def tail(self, count: int = 8) -> list[float]:
        """Smallest singular values in descending order (kept tail then null values)."""
        vals = np.concatenate([np.sort(self.kept_tail)[::-1], np.sort(self.null_values)[::-1]])
        return [float(x) for x in vals[-count:]]


def _pad(s: np.ndarray, n: int) -> np.ndarray:
    return np.concatenate([s, np.zeros(n - s.size)]) if s.size < n else s


def svd_spectrum(a: np.ndarray, rel_tol: float) -> Spectrum:
    n = a.shape[1]
    try:
        _, s, vh = scipy.linalg.svd(a, full_matrices=True, check_finite=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        _, s, vh = scipy.linalg.svd(a, full_matrices=True, check_finite=False, lapack_driver="gesvd")
    s = _pad(s, n)
    smax = float(s[0]) if n else 0.0
    null = s < rel_tol * smax if smax > 0 else np.ones(n, dtype=bool)
    k = int(np.count_nonzero(null))
    basis = vh[n - k:].conj().T
    return Spectrum(smax, basis, s[n - k:], np.sort(s[: n - k]), "svd")


def _givens_append(t: np.ndarray, w: np.ndarray) -> None:
    """In place: t (upper triangular) <- R factor of [t; w]."""
    w = w.astype(t.dtype, copy=True)
    n = t.shape[0]
    for i in range(n):
        g = w[i]
        if g == 0:
            continue
        f = t[i, i]
        rho = np.hypot(abs(f), abs(g))
        if f == 0:
            c, s = 0.0, 1.0
            row = t[i, i:].copy()
            t[i, i:] = w[i:]
            w[i:] = -row
            continue
        phase = f / abs(f)
        c = abs(f) / rho
        s = phase * np.conj(g) / rho
        row = t[i, i:].copy()
        t[i, i:] = c * row + s * w[i:]
        w[i:] = -np.conj(s) * row + c * w[i:]


def _smallest_pairs(t: np.ndarray, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Smallest singular values (ascending) and right vectors of upper-triangular t."""
    n = t.shape[0]

    def matvec(x):
        y = scipy.linalg.solve_triangular(t, x, trans="C", check_finite=False)
        return scipy.linalg.solve_triangular(t, y, check_finite=False)

    op = spla.LinearOperator((n, n), matvec=matvec, dtype=t.dtype)
    v0 = np.ones(n, dtype=t.dtype)
    lam, vecs = spla.eigsh(op, k=count, which="LA", v0=v0, tol=1e-13, maxiter=20 * n)
    order = np.argsort(lam)[::-1]
    lam, vecs = lam[order], vecs[:, order]
    sig = np.array([np.linalg.norm(t @ vecs[:, j]) for j in range(vecs.shape[1])])
    return sig, vecs


def qr_spectrum(a: np.ndarray, rel_tol: float, tail: int = 8) -> Spectrum:
    m, n = a.shape
    if n < tail + 3:  # ARPACK needs k < n - 1 for complex operators
        return svd_spectrum(a, rel_tol)
    r = scipy.linalg.qr(a, mode="r", check_finite=False)[0]
    r = np.vstack([r[:n], np.zeros((max(0, n - r.shape[0]), n), dtype=r.dtype)])
    rh = np.ascontiguousarray(r.conj().T)
    smax = float(np.sqrt(spla.eigsh(
        spla.LinearOperator((n, n), matvec=lambda x: rh @ (r @ x), dtype=r.dtype),
        k=1, which="LA", v0=np.ones(n, dtype=r.dtype), tol=1e-12)[0][0]))
    if smax == 0.0:
        return svd_spectrum(a, rel_tol)
    thresh = rel_tol * smax
    t = np.asfortranarray(r)  # LAPACK solves with trans="C" copy C-ordered input
    floor = np.finfo(float).eps * smax
    diag = np.abs(np.diag(t))
    tiny = np.flatnonzero(diag < floor)
    t[tiny, tiny] = floor
    count = tail
    found: list[np.ndarray] = []
    while True:
        sig, vecs = _smallest_pairs(t, count)
        below = [j for j in range(sig.size) if sig[j] < thresh]
        if not below:
            break
        for j in below:
            v = vecs[:, j]
            for u in found:
                v = v - np.vdot(u, v) * u
            v = v / np.linalg.norm(v)
            found.append(v)
            _givens_append(t, smax * v.conj())
        if len(found) >= n - 1:
            return svd_spectrum(a, rel_tol)
    basis = np.stack(found, axis=1) if found else np.zeros((n, 0), dtype=a.dtype)
    if found:
        basis, _ = np.linalg.qr(basis)
    null_values = np.array([np.linalg.norm(r @ basis[:, j]) for j in range(basis.shape[1])])
    return Spectrum(smax, basis, null_values, np.sort(sig), "qr")


def spectrum(a: np.ndarray, rel_tol: float, method: str = "auto", tail: int = 8) -> Spectrum:
    if not 0 < rel_tol < 1:
        raise ValidationError("rel_tol must lie in (0, 1)")
    if a.shape[0] == 0:
        raise ValidationError("matrix has no rows")
    if method == "auto":
        method = "svd" if a.shape[1] <= FULL_SVD_LIMIT else "qr"
    if method == "svd":
        return svd_spectrum(a, rel_tol)
    if method == "qr":
        try:
            return qr_spectrum(a, rel_tol, tail)
        except spla.ArpackNoConvergence:
            return svd_spectrum(a, rel_tol)
    raise ValidationError(f"unknown method {method!r}")
