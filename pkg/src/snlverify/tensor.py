"""Multipartite index arithmetic, exact amplitudes, kets and bipartition reshapes."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ValidationError

DEFAULT_RANK_TOL = 1e-9

Label = tuple[int, ...]


class Dims(tuple):
    """Local dimensions d_1..d_N of a multipartite space (immutable)."""

    def __new__(cls, party_dims: Iterable[int]):
        dims = tuple(int(d) for d in party_dims)
        if len(dims) < 2:
            raise ValidationError(f"need at least two parties, got {dims}")
        for k, d in enumerate(dims):
            if d < 2:
                raise ValidationError(f"party {k} has dimension {d} < 2")
        return super().__new__(cls, dims)

    @property
    def total(self) -> int:
        return math.prod(self)

    def sub(self, parties: Sequence[int]) -> tuple[int, ...]:
        return tuple(self[p] for p in parties)

    def __repr__(self) -> str:
        return f"Dims{tuple(self)}"


def validate_label(label: Sequence[int], dims: Sequence[int]) -> Label:
    label = tuple(int(x) for x in label)
    if len(label) != len(dims):
        raise ValidationError(f"label {label} has {len(label)} digits, expected {len(dims)}")
    for party, (digit, d) in enumerate(zip(label, dims)):
        if not 0 <= digit < d:
            raise ValidationError(f"party {party}: digit {digit} out of range for dimension {d}")
    return label


def encode(label: Sequence[int], dims: Sequence[int]) -> int:
    """Mixed-radix flat index, most significant party first."""
    validate_label(label, dims)
    index = 0
    for digit, d in zip(label, dims):
        index = index * d + digit
    return index


def decode(index: int, dims: Sequence[int]) -> Label:
    total = math.prod(dims)
    if not 0 <= index < total:
        raise ValidationError(f"flat index {index} outside 0..{total - 1}")
    digits = []
    for d in reversed(dims):
        index, r = divmod(index, d)
        digits.append(r)
    return tuple(reversed(digits))


def format_label(label: Sequence[int], dims: Sequence[int] | None = None) -> str:
    """Compact digit string; comma separated once any digit can exceed 9."""
    if dims is not None and max(dims) > 10 or any(x > 9 for x in label):
        return ",".join(str(x) for x in label)
    return "".join(str(x) for x in label)


def parse_label(text: str) -> Label:
    text = text.strip()
    if "," in text:
        return tuple(int(x) for x in text.split(","))
    return tuple(int(ch) for ch in text)


def _squarefree_split(r: int) -> tuple[int, int]:
    """Return (s, f) with r = s*s*f and f squarefree."""
    s, f = 1, 1
    p = 2
    while p * p <= r:
        while r % (p * p) == 0:
            r //= p * p
            s *= p
        if r % p == 0:
            r //= p
            f *= p
        p += 1
    return s, f * r


@dataclass(frozen=True)
class ExactScalar:
    """The number rational / sqrt(inv_sqrt) * exp(2*pi*i*phase_power/phase_order).

    Stored canonically: rational >= 0, inv_sqrt squarefree, phase reduced
    into [0, 1). Field equality is therefore value equality.
    """

    rational: Fraction
    inv_sqrt: int = 1
    phase_order: int = 1
    phase_power: int = 0

    def __post_init__(self):
        q = Fraction(self.rational)
        r, n, k = int(self.inv_sqrt), int(self.phase_order), int(self.phase_power)
        if r < 1 or n < 1:
            raise ValidationError(f"bad exact scalar fields r={r}, n={n}")
        if q == 0:
            q, r, n, k = Fraction(0), 1, 1, 0
        else:
            if q < 0:
                q = -q
                if n % 2:
                    n, k = 2 * n, 2 * k
                k += n // 2
            s, r = _squarefree_split(r)
            q /= s
            k %= n
            g = math.gcd(k, n)
            n, k = n // g, k // g
        object.__setattr__(self, "rational", q)
        object.__setattr__(self, "inv_sqrt", r)
        object.__setattr__(self, "phase_order", n)
        object.__setattr__(self, "phase_power", k)

    @classmethod
    def root_of_unity(cls, order: int, power: int) -> "ExactScalar":
        return cls(Fraction(1), 1, order, power)

    @classmethod
    def inv_sqrt_of(cls, r: int) -> "ExactScalar":
        return cls(Fraction(1), r)

    def is_zero(self) -> bool:
        return self.rational == 0

    @property
    def is_real(self) -> bool:
        return self.phase_power == 0

    def abs2(self) -> Fraction:
        return self.rational * self.rational / self.inv_sqrt

    def conjugate(self) -> "ExactScalar":
        return ExactScalar(self.rational, self.inv_sqrt, self.phase_order, -self.phase_power)

    def __mul__(self, other: "ExactScalar") -> "ExactScalar":
        if not isinstance(other, ExactScalar):
            if isinstance(other, (int, Fraction)):
                other = ExactScalar(Fraction(other))
            else:
                return NotImplemented
        n = math.lcm(self.phase_order, other.phase_order)
        k = self.phase_power * (n // self.phase_order) + other.phase_power * (n // other.phase_order)
        return ExactScalar(self.rational * other.rational, self.inv_sqrt * other.inv_sqrt, n, k)

    __rmul__ = __mul__

    def __truediv__(self, other: "ExactScalar") -> "ExactScalar":
        if other.is_zero():
            raise ZeroDivisionError("exact scalar division by zero")
        # 1/(p/sqrt(r)) = sqrt(r)/p = r/(p sqrt(r))
        inverse = ExactScalar(other.inv_sqrt / other.rational, other.inv_sqrt,
                              other.phase_order, -other.phase_power)
        return self * inverse

    def __complex__(self) -> complex:
        magnitude = float(self.rational) / math.sqrt(self.inv_sqrt)
        if self.phase_power == 0:
            return complex(magnitude)
        return cmath.rect(magnitude, 2 * math.pi * self.phase_power / self.phase_order)

    def to_json(self) -> dict:
        return {
            "p": self.rational.numerator,
            "q": self.rational.denominator,
            "r": self.inv_sqrt,
            "phase_order": self.phase_order,
            "phase_power": self.phase_power,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ExactScalar":
        return cls(Fraction(int(obj["p"]), int(obj["q"])), int(obj["r"]),
                   int(obj["phase_order"]), int(obj["phase_power"]))

    def __str__(self) -> str:
        out = str(self.rational)
        if self.inv_sqrt != 1:
            out += f"/sqrt({self.inv_sqrt})"
        if self.phase_power:
            out += f"*w{self.phase_order}^{self.phase_power}"
        return out


ONE = ExactScalar(Fraction(1))


@dataclass(frozen=True)
class Ket:
    """Normalized state with exact amplitudes; the dense float vector is rendered lazily."""

    dims: Dims
    terms: tuple[tuple[Label, ExactScalar], ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        dims = self.dims if isinstance(self.dims, Dims) else Dims(self.dims)
        object.__setattr__(self, "dims", dims)
        merged: dict[Label, ExactScalar] = {}
        for label, amp in self.terms:
            label = validate_label(label, dims)
            if label in merged:
                raise ValidationError(f"label {label} listed twice")
            if not amp.is_zero():
                merged[label] = amp
        ordered = tuple(sorted(merged.items(), key=lambda t: encode(t[0], dims)))
        object.__setattr__(self, "terms", ordered)
        object.__setattr__(self, "_index", dict(ordered))
        norm = sum((amp.abs2() for _, amp in ordered), Fraction(0))
        if norm != 1:
            raise ValidationError(f"ket has squared norm {norm}, expected 1")

    @classmethod
    def basis(cls, dims: Sequence[int], label: Sequence[int]) -> "Ket":
        return cls(Dims(dims), ((tuple(label), ONE),))

    @classmethod
    def uniform(cls, dims: Sequence[int], labels: Iterable[Sequence[int]]) -> "Ket":
        """Equal-weight superposition (1/sqrt(m)) sum of the given labels."""
        labels = [tuple(x) for x in labels]
        amp = ExactScalar.inv_sqrt_of(len(labels))
        return cls(Dims(dims), tuple((label, amp) for label in labels))

    @property
    def amplitudes(self) -> dict[Label, ExactScalar]:
        return dict(self._index)

    @property
    def support(self) -> frozenset[Label]:
        return frozenset(self._index)

    def amplitude(self, label: Sequence[int]) -> ExactScalar:
        return self._index.get(tuple(label), ExactScalar(Fraction(0)))

    @cached_property
    def vector(self) -> np.ndarray:
        vec = np.zeros(self.dims.total, dtype=complex)
        for label, amp in self.terms:
            vec[encode(label, self.dims)] = complex(amp)
        vec.setflags(write=False)
        return vec

    def scaled(self, factor: ExactScalar) -> "Ket":
        """Multiply by a unit-modulus exact factor (global phase)."""
        if factor.abs2() != 1:
            raise ValidationError("scaling factor must have modulus one")
        return Ket(self.dims, tuple((label, amp * factor) for label, amp in self.terms))

    def permuted(self, perm: Sequence[int]) -> "Ket":
        """Reorder parties: new party k is old party perm[k]."""
        dims = Dims(self.dims[p] for p in perm)
        return Ket(dims, tuple((tuple(label[p] for p in perm), amp) for label, amp in self.terms))

    def __len__(self) -> int:
        return len(self.terms)

    def __str__(self) -> str:
        return " + ".join(f"({amp})|{format_label(label, self.dims)}>" for label, amp in self.terms)


def inner(a: Ket, b: Ket) -> complex:
    """<a|b>, conjugate-linear in the first argument (float rendering)."""
    if a.dims != b.dims:
        raise ValidationError(f"dims mismatch {a.dims} vs {b.dims}")
    small, large, flip = (a, b, False) if len(a) <= len(b) else (b, a, True)
    total = 0j
    for label, amp in small.terms:
        other = large._index.get(label)
        if other is None:
            continue
        x, y = complex(amp), complex(other)
        total += x * y.conjugate() if flip else x.conjugate() * y
    return total


def exact_inner(a: Ket, b: Ket) -> dict[int, Fraction]:
    """Exact <a|b> for kets with real amplitudes, as {r: c} meaning sum of c/sqrt(r).

    Square roots of distinct squarefree integers are linearly independent over
    the rationals, so the value is zero iff the returned mapping is empty.
    """
    if a.dims != b.dims:
        raise ValidationError(f"dims mismatch {a.dims} vs {b.dims}")
    out: dict[int, Fraction] = {}
    for label, amp in a.terms:
        other = b._index.get(label)
        if other is None:
            continue
        prod = amp.conjugate() * other
        if prod.phase_order > 2:
            raise ValidationError("exact_inner needs real amplitudes")
        sign = -1 if prod.phase_power else 1
        out[prod.inv_sqrt] = out.get(prod.inv_sqrt, Fraction(0)) + sign * prod.rational
    return {r: c for r, c in out.items() if c != 0}


def is_exact_one(value: Mapping[int, Fraction]) -> bool:
    return dict(value) == {1: Fraction(1)}


@dataclass(frozen=True)
class MeasuredSet:
    """Parties performing the joint measurement; the rest are kept as identity."""

    parties: tuple[int, ...]
    n_parties: int

    def __post_init__(self):
        parties = tuple(sorted(set(int(p) for p in self.parties)))
        if not parties:
            raise ValidationError("measured set is empty")
        if any(not 0 <= p < self.n_parties for p in parties):
            raise ValidationError(f"parties {parties} outside 0..{self.n_parties - 1}")
        if len(parties) == self.n_parties:
            raise ValidationError("measured set cannot contain every party")
        object.__setattr__(self, "parties", parties)

    @classmethod
    def complement_of(cls, party: int, n_parties: int) -> "MeasuredSet":
        return cls(tuple(p for p in range(n_parties) if p != party), n_parties)

    @property
    def kept(self) -> tuple[int, ...]:
        return tuple(p for p in range(self.n_parties) if p not in self.parties)

    def complement(self) -> "MeasuredSet":
        return MeasuredSet(self.kept, self.n_parties)

    def dim(self, dims: Sequence[int]) -> int:
        return math.prod(dims[p] for p in self.parties)

    def kept_dim(self, dims: Sequence[int]) -> int:
        return math.prod(dims[p] for p in self.kept)

    def split(self, label: Sequence[int]) -> tuple[Label, Label]:
        """(kept digits, measured digits) of a full label."""
        return tuple(label[p] for p in self.kept), tuple(label[p] for p in self.parties)

    def check(self, dims: Sequence[int]) -> None:
        if len(dims) != self.n_parties:
            raise ValidationError(f"measured set is for {self.n_parties} parties, dims have {len(dims)}")


def reshape(k: Ket, m: MeasuredSet) -> np.ndarray:
    """Kept parties as rows, measured parties as columns, each in mixed-radix order."""
    m.check(k.dims)
    kept_dims, meas_dims = k.dims.sub(m.kept), k.dims.sub(m.parties)
    mat = np.zeros((math.prod(kept_dims), math.prod(meas_dims)), dtype=complex)
    for label, amp in k.terms:
        row, col = m.split(label)
        mat[encode(row, kept_dims), encode(col, meas_dims)] = complex(amp)
    return mat


def schmidt_rank(k: Ket, m: MeasuredSet, tol: float = DEFAULT_RANK_TOL) -> int:
    if tol <= 0:
        raise ValidationError("tol must be positive")
    s = np.linalg.svd(reshape(k, m), compute_uv=False)
    return int(np.sum(s > tol * s[0]))
