"""Numerical oracle: the linear constraints an orthogonality-preserving measurement obeys.

For measured parties M and kept parties K, a measurement element E on M
preserves orthogonality of the set iff <psi_i| I_K (x) E |psi_j> = 0 for every
ordered pair i != j. With Psi_i the K x M reshape of psi_i this reads
sum_{a,b} (Psi_i^H Psi_j)[a, b] E[a, b] = 0, one row per ordered pair. The
identity always solves it; the set is trivial on M iff nothing else does.
"""

from __future__ import annotations

import enum
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .constructions import StateSet
from .errors import SizeLimitExceeded, ValidationError
from .linalg import Spectrum, spectrum
from .tensor import MeasuredSet, reshape

DEFAULT_REL_TOL = 1e-9
GAP_THRESHOLD = 1e3
IDENTITY_OVERLAP_TOL = 1e-8
IDENTITY_RESIDUAL_TOL = 1e-10
MAX_UNKNOWNS = 8192
THREADS_ENV = "SNLV_THREADS"


class Verdict(str, enum.Enum):
    TRIVIAL = "Trivial"
    NONTRIVIAL = "NonTrivial"
    INCONCLUSIVE = "Inconclusive"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ConstraintSystem:
    rows: tuple[tuple[int, int], ...]
    measured: MeasuredSet
    dim: int
    matrix: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def identity_residual(self) -> float:
        """||C vec(I)|| relative to the largest row norm."""
        vec_id = np.eye(self.dim, dtype=complex).reshape(-1)
        scale = max(float(np.max(np.linalg.norm(self.matrix, axis=1))), 1e-300)
        return float(np.linalg.norm(self.matrix @ vec_id)) / scale


def _check_size(dim: int) -> None:
    if dim * dim > MAX_UNKNOWNS:
        raise SizeLimitExceeded(
            f"measured dimension {dim} gives {dim * dim} unknowns, above the {MAX_UNKNOWNS} dense limit")


def assemble(s: StateSet, m: MeasuredSet) -> ConstraintSystem:
    m.check(s.dims)
    n = len(s.psis)
    if n < 2:
        raise ValidationError("need at least two states to constrain anything")
    dim = m.dim(s.dims)
    _check_size(dim)
    blocks = np.stack([reshape(k, m) for k in s.psis])  # n x K x D
    rows = tuple((i, j) for i in range(n) for j in range(n) if i != j)
    matrix = np.empty((len(rows), dim * dim), dtype=complex)
    conj = blocks.conj()
    for i in range(n):
        # (Psi_i^H Psi_j) for all j at once: D x n x D
        prod = np.einsum("ka,jkb->jab", conj[i], blocks, optimize=True)
        start = i * (n - 1)
        others = [j for j in range(n) if j != i]
        matrix[start:start + n - 1] = prod[others].reshape(n - 1, dim * dim)
    return ConstraintSystem(rows, m, dim, matrix)


def solution_space(c: ConstraintSystem, rel_tol: float = DEFAULT_REL_TOL,
                   method: str = "auto") -> Spectrum:
    """Numerical nullspace of the constraint matrix with its spectral diagnostics."""
    return spectrum(c.matrix, rel_tol, method)


def hermitian_matrix(c: ConstraintSystem) -> np.ndarray:
    """Real constraint matrix for Hermitian E in D^2 real coordinates.

    Coordinates: E[a, a] for each a, then Re and Im of E[a, b] for a < b, each
    scaled so the coordinate map is an isometry. For Hermitian E the (j, i)
    constraint is the conjugate of the (i, j) one, so only i < j rows are used.
    """
    dim = c.dim
    mat = c.matrix[[r for r, (i, j) in enumerate(c.rows) if i < j]]
    diag = np.arange(dim) * (dim + 1)
    a, b = np.triu_indices(dim, k=1)
    ab, ba = mat[:, a * dim + b], mat[:, b * dim + a]
    block = np.concatenate(
        [mat[:, diag], (ab + ba) / math.sqrt(2), 1j * (ab - ba) / math.sqrt(2)], axis=1)
    return np.concatenate([block.real, block.imag], axis=0)


def hermitian_solution_dim(c: ConstraintSystem, rel_tol: float = DEFAULT_REL_TOL,
                           method: str = "auto") -> tuple[int, float]:
    sp = spectrum(hermitian_matrix(c), rel_tol, method)
    return sp.null_dim, sp.gap


@dataclass
class TrivialityVerdict:
    measured: tuple[int, ...]
    n_states: int
    dim: int
    nullspace_dim: int
    identity_overlap: float | None
    spectral_gap: float
    verdict: Verdict
    hermitian_nullspace_dim: int
    hermitian_gap: float
    identity_residual: float
    singular_values: list[float]
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def wall_time(self) -> float:
        return sum(self.timings.values())

    def to_json(self) -> dict:
        def num(x):
            return None if x is None or not math.isfinite(x) else x

        return {
            "measured_parties": list(self.measured),
            "n": self.n_states,
            "D": self.dim,
            "nullspace_dim": self.nullspace_dim,
            "hermitian_nullspace_dim": self.hermitian_nullspace_dim,
            "identity_overlap": num(self.identity_overlap),
            "spectral_gap": num(self.spectral_gap),
            "hermitian_gap": num(self.hermitian_gap),
            "identity_residual": self.identity_residual,
            "verdict": self.verdict.value,
            "singular_values_tail": self.singular_values,
            "wall_time": self.wall_time,
            "timings": self.timings,
        }


def _decide(null_dim: int, overlap: float | None, gap: float, herm_dim: int, herm_gap: float) -> Verdict:
    if gap < GAP_THRESHOLD or herm_gap < GAP_THRESHOLD or null_dim != herm_dim:
        return Verdict.INCONCLUSIVE
    if null_dim == 1 and overlap is not None and overlap >= 1 - IDENTITY_OVERLAP_TOL:
        return Verdict.TRIVIAL
    return Verdict.NONTRIVIAL


def check_triviality(s: StateSet, m: MeasuredSet, rel_tol: float = DEFAULT_REL_TOL,
                     tail: int = 8, method: str = "auto") -> TrivialityVerdict:
    timings = {}
    t0 = time.perf_counter()
    c = assemble(s, m)
    timings["assemble"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sp = solution_space(c, rel_tol, method)
    basis, null_dim, gap = sp.null_basis, sp.null_dim, sp.gap
    timings["decompose"] = time.perf_counter() - t0

    overlap = None
    if null_dim == 1:
        vec_id = np.eye(c.dim, dtype=complex).reshape(-1) / math.sqrt(c.dim)
        overlap = float(abs(np.vdot(basis[:, 0], vec_id)) ** 2)

    t0 = time.perf_counter()
    herm_dim, herm_gap = hermitian_solution_dim(c, rel_tol, method)
    timings["hermitian"] = time.perf_counter() - t0

    return TrivialityVerdict(
        measured=m.parties,
        n_states=len(s.psis),
        dim=c.dim,
        nullspace_dim=null_dim,
        identity_overlap=overlap,
        spectral_gap=gap,
        verdict=_decide(null_dim, overlap, gap, herm_dim, herm_gap),
        hermitian_nullspace_dim=herm_dim,
        hermitian_gap=herm_gap,
        identity_residual=c.identity_residual(),
        singular_values=sp.tail(tail),
        timings=timings,
    )


def check_single_party(s: StateSet, party: int, rel_tol: float = DEFAULT_REL_TOL) -> TrivialityVerdict:
    return check_triviality(s, MeasuredSet((party,), s.n_parties), rel_tol)


@dataclass
class StrongestReport:
    construction: str
    dims: tuple[int, ...]
    n_states: int
    per_party: list[TrivialityVerdict]

    @property
    def verdict(self) -> Verdict:
        verdicts = {v.verdict for v in self.per_party}
        if verdicts == {Verdict.TRIVIAL}:
            return Verdict.TRIVIAL
        if Verdict.NONTRIVIAL in verdicts:
            return Verdict.NONTRIVIAL
        return Verdict.INCONCLUSIVE

    def to_json(self) -> dict:
        return {
            "construction": self.construction,
            "dims": list(self.dims),
            "n": self.n_states,
            "verdict": self.verdict.value,
            "bipartitions": [v.to_json() for v in self.per_party],
        }


def verify_strongest(s: StateSet, rel_tol: float = DEFAULT_REL_TOL,
                     threads: int | None = None) -> StrongestReport:
    """Check the complement of every single party."""
    sets = [MeasuredSet.complement_of(p, s.n_parties) for p in range(s.n_parties)]
    threads = threads or default_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda m: check_triviality(s, m, rel_tol), sets))
    else:
        results = [check_triviality(s, m, rel_tol) for m in sets]
    return StrongestReport(s.name, tuple(s.dims), len(s.psis), results)
