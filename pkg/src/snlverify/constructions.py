"""Builders for the origin-plus-Fourier-block state sets.

Each builder lists the alpha families in the published order, every family
enumerated lexicographically over its index tuple. Labels are generated
literally and validated afterwards, so a transcription that leaves the local
dimensions is reported instead of repaired.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import IndexOutOfRange, ValidationError
from .tensor import Dims, ExactScalar, Ket, exact_inner, is_exact_one

log = logging.getLogger(__name__)

ORIGIN = "ORIGIN"
THEOREM_IDS = ("T1", "T2", "EX1", "T3", "T4")


@dataclass(frozen=True)
class FamilyTag:
    theorem: str
    family: str
    params: tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {"theorem": self.theorem, "family": self.family, "params": list(self.params)}

    @classmethod
    def from_json(cls, obj) -> "FamilyTag":
        return cls(obj["theorem"], obj["family"], tuple(obj.get("params", ())))


@dataclass(frozen=True)
class StateSet:
    dims: Dims
    alphas: tuple[tuple[Ket, FamilyTag], ...]
    psis: tuple[Ket, ...]
    name: str
    params: tuple[int, ...] = ()
    notes: tuple[str, ...] = field(default=(), compare=False)

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def alpha_kets(self) -> list[Ket]:
        return [k for k, _ in self.alphas]

    @property
    def tags(self) -> list[FamilyTag]:
        return [t for _, t in self.alphas]

    def __len__(self) -> int:
        return len(self.psis)

    def has_fourier_block(self) -> bool:
        """True when psis are exactly the Fourier mix of alphas with the origin first."""
        if len(self.alphas) < 2 or len(self.alphas) != len(self.psis):
            return False
        if self.alphas[0][1].family != ORIGIN:
            return False
        try:
            return tuple(fourier_mix(self.alpha_kets)) == self.psis
        except ValidationError:
            return False

    def with_psis(self, psis: Sequence[Ket], name: str | None = None) -> "StateSet":
        """Copy with a replaced psi list; alphas are dropped when they no longer generate it."""
        psis = tuple(psis)
        alphas = self.alphas if psis == self.psis else ()
        return StateSet(self.dims, alphas, psis, name or self.name, self.params, self.notes)

    def permuted(self, perm: Sequence[int]) -> "StateSet":
        perm = tuple(perm)
        if sorted(perm) != list(range(self.n_parties)):
            raise ValidationError(f"{perm} is not a permutation of the parties")
        return StateSet(
            Dims(self.dims[p] for p in perm),
            tuple((k.permuted(perm), t) for k, t in self.alphas),
            tuple(k.permuted(perm) for k in self.psis),
            self.name,
            self.params,
            self.notes,
        )


def custom_set(dims: Sequence[int], psis: Iterable[Ket], name: str = "custom") -> StateSet:
    dims = Dims(dims)
    psis = tuple(psis)
    for k in psis:
        if k.dims != dims:
            raise ValidationError(f"state dims {k.dims} differ from set dims {dims}")
    return StateSet(dims, (), psis, name)


def product_basis(dims: Sequence[int]) -> StateSet:
    dims = Dims(dims)
    kets = [Ket.basis(dims, label) for label in itertools.product(*(range(d) for d in dims))]
    return custom_set(dims, kets, "product-basis")


def lower_bound(dims: Sequence[int]) -> int:
    """Conjectured minimal size max_i(prod(d)/d_i) + 1."""
    dims = Dims(dims)
    return dims.total // min(dims) + 1


def check_orthonormal(kets: Sequence[Ket]) -> None:
    """Exact pairwise orthonormality; requires real amplitudes."""
    for i, a in enumerate(kets):
        if not is_exact_one(exact_inner(a, a)):
            raise ValidationError(f"state {i} is not normalized")
        for j in range(i + 1, len(kets)):
            if exact_inner(a, kets[j]):
                raise ValidationError(f"states {i} and {j} are not orthogonal")


def fourier_mix(alphas: Sequence[Ket]) -> list[Ket]:
    """psi_0 = alpha_0, psi_i = n^{-1/2} sum_j w_n^{ij} alpha_j for 1 <= i, j <= n.

    The alpha supports must be pairwise disjoint so every psi amplitude stays a
    single exact scalar; for real nonnegative alphas this is the same as
    orthogonality.
    """
    if not alphas:
        raise ValidationError("need at least the origin state")
    seen: set = set()
    for j, a in enumerate(alphas):
        if seen & a.support:
            raise ValidationError(f"alpha {j} overlaps an earlier alpha; input is not orthonormal")
        seen |= a.support
        if a.dims != alphas[0].dims:
            raise ValidationError("alphas have different dims")
    n = len(alphas) - 1
    scale = ExactScalar.inv_sqrt_of(n) if n else None
    coeffs = [ExactScalar.root_of_unity(n, k) * scale for k in range(n)] if n else []
    products: dict[tuple[ExactScalar, int], ExactScalar] = {}  # few distinct alpha amplitudes

    def times(amp: ExactScalar, k: int) -> ExactScalar:
        key = (amp, k)
        if key not in products:
            products[key] = amp * coeffs[k]
        return products[key]

    psis = [alphas[0]]
    for i in range(1, n + 1):
        terms = []
        for j in range(1, n + 1):
            k = (i * j) % n
            terms.extend((label, times(amp, k)) for label, amp in alphas[j].terms)
        psis.append(Ket(alphas[0].dims, tuple(terms)))
    return psis


def stopper_state(dims: Sequence[int]) -> Ket:
    dims = Dims(dims)
    return Ket.uniform(dims, itertools.product(*(range(d) for d in dims)))


def family_counts(s: StateSet) -> dict[str, int]:
    counts = Counter(t.family for t in s.tags if t.family != ORIGIN)
    return dict(counts)


# -- builders ---------------------------------------------------------------

Gen = list[tuple[str, tuple[int, ...], list[tuple[int, ...]]]]


def _rng(lo: int, hi: int) -> range:
    return range(lo, hi + 1)


def _assemble(theorem: str, name: str, dims: Sequence[int], generated: Gen,
              params: tuple[int, ...], notes: tuple[str, ...] = ()) -> StateSet:
    dims = Dims(dims)
    bad = [lab for _, _, labels in generated for lab in labels
           if any(not 0 <= x < d for x, d in zip(lab, dims))]
    if bad:
        raise IndexOutOfRange(name, dims, bad)
    origin = Ket.basis(dims, (0,) * len(dims))
    alphas = [(origin, FamilyTag(theorem, ORIGIN))]
    for family, index, labels in generated:
        alphas.append((Ket.uniform(dims, labels), FamilyTag(theorem, family, index)))
    kets = [k for k, _ in alphas]
    check_orthonormal(kets)
    psis = tuple(fourier_mix(kets))
    return StateSet(dims, tuple(alphas), psis, name, params, notes)


def _emit(out: Gen, family: str, indices: Iterable[tuple[int, ...]],
          labels: Callable[..., list[tuple[int, ...]]], skip: Callable[..., bool] | None = None):
    for index in indices:
        if skip is not None and skip(*index):
            continue
        out.append((family, tuple(index), labels(*index)))


def build_theorem1(d: int) -> StateSet:
    if d < 2:
        raise ValidationError(f"d must be >= 2, got {d}")
    g: Gen = []
    _emit(g, "B1", [(1,), (2,), (3,)], lambda j: [[(1, 0, 0)], [(0, 0, 1)], [(0, 1, 0)]][j - 1])
    one = lambda i: [(i,) for i in _rng(2, d - 1)]  # noqa: E731
    _emit(g, "B2", one(0), lambda i: [(0, 0, i), (i - 1, i - 1, 0)])
    _emit(g, "B3", one(0), lambda i: [(0, i, 0), (i - 1, 0, i - 1)])
    _emit(g, "B4", one(0), lambda i: [(0, i - 1, i - 1), (i, 0, 0)])
    _emit(g, "B5", itertools.product(_rng(1, d - 1), repeat=2),
          lambda i, j: [(0, i, j), (i, j, 0), (j, 0, i)],
          skip=lambda i, j: i == j and i <= d - 2)
    return _assemble("T1", "t1", (d, d, d), g, (d,))


def build_theorem2(d1: int, d2: int, d3: int) -> StateSet:
    if not 2 <= d1 <= d2 <= d3:
        raise ValidationError(f"need 2 <= d1 <= d2 <= d3, got {(d1, d2, d3)}")
    if d1 == d2 == d3:
        note = f"all dims equal; built with the symmetric tripartite construction at d={d1}"
        log.warning(note)
        s = build_theorem1(d1)
        return StateSet(s.dims, s.alphas, s.psis, s.name, s.params, (note,))
    P = itertools.product
    g: Gen = []
    _emit(g, "B1", [(1,), (2,), (3,)], lambda j: [[(1, 0, 0)], [(0, 0, 1)], [(0, 1, 0)]][j - 1])
    _emit(g, "B2", [(i,) for i in _rng(2, d1)], lambda i: [(0, 0, i), (i - 1, i - 1, 0)])
    _emit(g, "B3", [(i,) for i in _rng(2, d1)], lambda i: [(0, i, 0), (i - 1, 0, i - 1)])
    _emit(g, "B4", [(i,) for i in _rng(d1 + 1, d3 - 1)], lambda i: [(0, 0, i)])
    _emit(g, "B5", [(i,) for i in _rng(d1 + 1, d2 - 1)], lambda i: [(0, i, 0)])
    _emit(g, "B6", [(i,) for i in _rng(2, d1 - 1)], lambda i: [(0, i - 1, i - 1), (i, 0, 0)])
    _emit(g, "B7", [(i,) for i in _rng(d1, d2)], lambda i: [(0, i - 1, i - 1)])
    _emit(g, "B8", P(_rng(1, d1 - 1), repeat=2), lambda i, j: [(0, i, j), (i, j, 0), (j, 0, i)],
          skip=lambda i, j: i == j)
    _emit(g, "B9", P(_rng(1, d1 - 1), _rng(d1, d2 - 1)), lambda i, j: [(0, i, j), (i, j, 0)])
    _emit(g, "B10", P(_rng(1, d1 - 1), _rng(d1, d2 - 1)), lambda i, j: [(0, j, i), (i, 0, j)])
    _emit(g, "B11", P(_rng(1, d1 - 1), _rng(d2, d3 - 1)), lambda i, j: [(0, i, j), (i, 0, j)])
    _emit(g, "B12", P(_rng(d1, d2 - 1), _rng(d2, d3 - 1)), lambda i, j: [(0, i, j)])
    _emit(g, "B13", P(_rng(d1, d2 - 1), repeat=2), lambda i, j: [(0, i, j)],
          skip=lambda i, j: i == j)
    return _assemble("T2", "t2", (d1, d2, d3), g, (d1, d2, d3))


EXAMPLE1_ALPHAS = (
    ("1000",), ("0001",), ("0010",), ("0100",),
    ("0110", "1001"), ("0101", "1010"), ("0011", "1100"),
    ("0120", "2001"), ("0201", "2010"), ("0021", "2100"),
    ("0002", "1110"), ("0020", "1101"), ("0200", "1011"),
    ("0210", "1002"), ("0102", "1020"), ("0012", "1200"),
    ("0220", "2002"), ("0202", "2020"), ("0022", "2200"),
    ("0111", "2000"),
    ("0112", "1120", "1201", "2011"),
    ("0121", "1210", "2101", "1012"),
    ("0122", "1220", "2201", "2012"),
    ("0211", "2110", "1102", "1021"),
    ("0212", "2120", "1202", "2021"),
    ("0221", "2210", "2102", "1022"),
    ("0222", "2220", "2202", "2022"),
)


def build_example1() -> StateSet:
    """The explicit 28-state set on four qutrits.

    States are tagged with the symmetric four-party family they coincide with,
    so family-batched schedules apply unchanged.
    """
    reference = {k.support: t for k, t in build_theorem3(3).alphas}
    g: Gen = []
    for x, strings in enumerate(EXAMPLE1_ALPHAS, start=1):
        labels = [tuple(int(c) for c in s) for s in strings]
        tag = reference.get(frozenset(labels))
        family = tag.family if tag else f"a{x}"
        g.append((family, tag.params if tag else (x,), labels))
    return _assemble("EX1", "ex1", (3, 3, 3, 3), g, ())


def build_theorem3(d: int) -> StateSet:
    if d < 2:
        raise ValidationError(f"d must be >= 2, got {d}")
    P = itertools.product
    pair = lambda: P(_rng(1, d - 1), repeat=2)  # noqa: E731
    up = [(i,) for i in _rng(2, d - 1)]
    g: Gen = []
    _emit(g, "B1", [(1,), (2,), (3,), (4,)],
          lambda j: [[(1, 0, 0, 0)], [(0, 0, 0, 1)], [(0, 0, 1, 0)], [(0, 1, 0, 0)]][j - 1])
    _emit(g, "B2", pair(), lambda i, j: [(0, j, i, 0), (i, 0, 0, j)])
    _emit(g, "B3", pair(), lambda i, j: [(0, i, 0, j), (i, 0, j, 0)])
    _emit(g, "B4", pair(), lambda i, j: [(0, 0, i, j), (i, j, 0, 0)])
    _emit(g, "B5", up, lambda i: [(0, 0, 0, i), (i - 1, i - 1, i - 1, 0)])
    _emit(g, "B6", up, lambda i: [(0, 0, i, 0), (i - 1, i - 1, 0, i - 1)])
    _emit(g, "B7", up, lambda i: [(0, i, 0, 0), (i - 1, 0, i - 1, i - 1)])
    _emit(g, "B8", up, lambda i: [(0, i - 1, i - 1, i - 1), (i, 0, 0, 0)])
    _emit(g, "B9", P(_rng(1, d - 1), repeat=3),
          lambda i, j, k: [(0, i, j, k), (i, j, k, 0), (j, k, 0, i), (k, 0, i, j)],
          skip=lambda i, j, k: i == j == k and i <= d - 2)
    return _assemble("T3", "t3", (d, d, d, d), g, (d,))


def build_theorem4(d1: int, d2: int, d3: int, d4: int, literal: bool = False) -> StateSet:
    """General four-party construction; ``literal=True`` stops the B36 k range at d2 - 1."""
    if not 2 <= d1 <= d2 <= d3 <= d4:
        raise ValidationError(f"need 2 <= d1 <= d2 <= d3 <= d4, got {(d1, d2, d3, d4)}")
    if d1 == d2 == d3 == d4:
        note = f"all dims equal; built with the symmetric four-party construction at d={d1}"
        log.warning(note)
        s = build_theorem3(d1)
        return StateSet(s.dims, s.alphas, s.psis, s.name, s.params, (note,))
    P = itertools.product
    R = _rng
    g: Gen = []
    _emit(g, "B1", [(1,), (2,), (3,), (4,)],
          lambda j: [[(1, 0, 0, 0)], [(0, 0, 0, 1)], [(0, 0, 1, 0)], [(0, 1, 0, 0)]][j - 1])
    _emit(g, "B2", P(R(1, d1 - 1), R(1, d2 - 1)), lambda i, j: [(0, j, i, 0), (i, 0, 0, j)])
    _emit(g, "B3", P(R(d1, d2 - 1), R(1, d2 - 1)), lambda i, j: [(0, j, i, 0)])
    _emit(g, "B4", P(R(d2, d3 - 1), R(d1, d2 - 1)), lambda i, j: [(0, j, i, 0)])
    _emit(g, "B5", P(R(d2, d3 - 1), R(1, d1 - 1)), lambda i, j: [(0, j, i, 0), (j, 0, 0, i)])
    _emit(g, "B6", P(R(1, d1 - 1), R(1, d3 - 1)), lambda i, j: [(0, i, 0, j), (i, 0, j, 0)])
    _emit(g, "B7", P(R(1, d1 - 1), R(d3, d4 - 1)), lambda i, j: [(0, i, 0, j)])
    _emit(g, "B8", P(R(d1, d2 - 1), R(1, d4 - 1)), lambda i, j: [(0, i, 0, j)])
    _emit(g, "B9", P(R(1, d1 - 1), R(1, d2 - 1)), lambda i, j: [(0, 0, i, j), (i, j, 0, 0)])
    _emit(g, "B10", P(R(1, d1 - 1), R(d2, d4 - 1)), lambda i, j: [(0, 0, i, j)])
    _emit(g, "B11", P(R(d1, d3 - 1), R(1, d4 - 1)), lambda i, j: [(0, 0, i, j)])
    _emit(g, "B12", [(i,) for i in R(2, d1)], lambda i: [(0, 0, 0, i), (i - 1, i - 1, i - 1, 0)])
    _emit(g, "B13", [(i,) for i in R(2, d1)], lambda i: [(0, 0, i, 0), (i - 1, i - 1, 0, i - 1)])
    _emit(g, "B14", [(i,) for i in R(2, d1)], lambda i: [(0, i, 0, 0), (i - 1, 0, i - 1, i - 1)])
    _emit(g, "B15", [(i,) for i in R(d1 + 1, d4 - 1)], lambda i: [(0, 0, 0, i)])
    _emit(g, "B16", [(i,) for i in R(d1 + 1, d3 - 1)], lambda i: [(0, 0, i, 0)])
    _emit(g, "B17", [(i,) for i in R(d1 + 1, d2 - 1)], lambda i: [(0, i, 0, 0)])
    _emit(g, "B18", [(i,) for i in R(2, d1 - 1)], lambda i: [(0, i - 1, i - 1, i - 1), (i, 0, 0, 0)])
    _emit(g, "B19", [(i,) for i in R(d1, d2)], lambda i: [(0, i - 1, i - 1, i - 1)])
    _emit(g, "B20", P(R(1, d1 - 1), repeat=3),
          lambda i, j, k: [(0, i, j, k), (i, j, k, 0), (j, k, 0, i), (k, 0, i, j)],
          skip=lambda i, j, k: i == j == k)
    _emit(g, "B21", P(R(1, d1 - 1), R(1, d1 - 1), R(d1, d2 - 1)),
          lambda i, j, k: [(0, i, j, k), (i, j, k, 0), (j, k, 0, i)])
    _emit(g, "B22", P(R(1, d1 - 1), R(d1, d2 - 1), R(1, d1 - 1)),
          lambda i, j, k: [(0, i, j, k), (i, j, k, 0), (k, 0, i, j)])
    _emit(g, "B23", P(R(d1, d2 - 1), R(1, d1 - 1), R(1, d1 - 1)),
          lambda i, j, k: [(0, i, j, k), (j, k, 0, i), (k, 0, i, j)])
    _emit(g, "B24", P(R(1, d1 - 1), R(1, d1 - 1), R(d2, d3 - 1)),
          lambda i, j, k: [(0, i, j, k), (i, j, k, 0), (i, 0, k, j)])
    _emit(g, "B25", P(R(1, d1 - 1), R(d2, d3 - 1), R(1, d1 - 1)),
          lambda i, j, k: [(0, i, j, k), (k, 0, i, j), (i, k, 0, j)])
    _emit(g, "B26", P(R(1, d1 - 1), R(1, d1 - 1), R(d3, d4 - 1)),
          lambda i, j, k: [(0, i, j, k), (j, 0, i, k), (i, j, 0, k)])
    _emit(g, "B27", P(R(1, d1 - 1), R(d1, d2 - 1), R(d3, d4 - 1)),
          lambda i, j, k: [(0, i, j, k), (i, 0, j, k), (i, j, 0, k)])
    _emit(g, "B28", P(R(1, d1 - 1), R(d1, d2 - 1), R(d1, d3 - 1)),
          lambda i, j, k: [(0, i, j, k), (i, j, k, 0)])
    _emit(g, "B29", P(R(d1, d2 - 1), R(d1, d3 - 1), R(1, d1 - 1)),
          lambda i, j, k: [(0, i, j, k), (k, 0, i, j)])
    _emit(g, "B30", P(R(d1, d2 - 1), R(1, d1 - 1), R(d1, d2 - 1)),
          lambda i, j, k: [(0, i, j, k), (j, k, 0, i)])
    _emit(g, "B31", P(R(1, d1 - 1), R(d2, d3 - 1), R(d1, d4 - 1)),
          lambda i, j, k: [(0, i, j, k), (i, 0, j, k)])
    _emit(g, "B32", P(R(d1, d2 - 1), R(1, d1 - 1), R(d2, d3 - 1)),
          lambda i, j, k: [(0, i, j, k), (j, i, 0, k)])
    _emit(g, "B33", P(R(1, d1 - 1), R(d3, d4 - 1)), lambda i, j: [(0, d2 - 1, i, j), (i, 0, 0, j)])
    _emit(g, "B34", P(R(d1, d2 - 1), R(d2, d3 - 1), R(d1, d4 - 1)), lambda i, j, k: [(0, i, j, k)])
    _emit(g, "B35", P(R(d1, d2 - 2), R(1, d1 - 1), R(d3, d4 - 1)), lambda i, j, k: [(0, i, j, k)])
    # With k stopping at d2 - 1, the labels |0ijk> with
    # d1 <= i, j <= d2 - 1 < k <= d4 - 1 belong to no family, leaving the set
    # short of d2*d3*d4 alphas whenever d2 < d4. The default extends k to d4 - 1.
    k_top = d2 - 1 if literal else d4 - 1
    _emit(g, "B36", P(R(d1, d2 - 1), R(d1, d2 - 1), R(d1, k_top)), lambda i, j, k: [(0, i, j, k)],
          skip=lambda i, j, k: i == j == k)
    return _assemble("T4", "t4", (d1, d2, d3, d4), g, (d1, d2, d3, d4))


BUILDERS: dict[str, Callable[..., StateSet]] = {
    "t1": build_theorem1,
    "t2": build_theorem2,
    "ex1": build_example1,
    "t3": build_theorem3,
    "t4": build_theorem4,
}
ARITY = {"t1": 1, "t2": 3, "ex1": 0, "t3": 1, "t4": 4}


def build(construction: str, params: Sequence[int] = ()) -> StateSet:
    try:
        fn = BUILDERS[construction]
    except KeyError:
        raise ValidationError(f"unknown construction {construction!r}; choose from {sorted(BUILDERS)}")
    params = tuple(int(p) for p in params)
    if len(params) != ARITY[construction]:
        raise ValidationError(f"{construction} takes {ARITY[construction]} dimension parameter(s), got {params}")
    return fn(*params)


def expected_size(construction: str, params: Sequence[int] = ()) -> int:
    p = tuple(params)
    if construction == "t1":
        return p[0] ** 2 + 1
    if construction == "t3":
        return p[0] ** 3 + 1
    if construction == "ex1":
        return 28
    return math.prod(p[1:]) + 1


def global_phase_equal(a: Ket, b: Ket, tol: float = 1e-12) -> bool:
    """Whether a = e^{i theta} b for some theta (float rendering)."""
    return abs(abs(np.vdot(a.vector, b.vector)) - 1.0) < tol


__all__ = [
    "FamilyTag", "StateSet", "ORIGIN", "lower_bound", "fourier_mix", "stopper_state",
    "family_counts", "build_theorem1", "build_theorem2", "build_example1", "build_theorem3",
    "build_theorem4", "build", "custom_set", "product_basis", "check_orthonormal",
    "expected_size", "global_phase_equal",
]
