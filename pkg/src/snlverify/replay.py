"""Exact symbolic replay of the block-lemma triviality argument.

For a measured set M, every fact is a statement about entries <a|E|b> of the
measured-side operator E, where I_K (x) E must keep the states orthogonal.
Facts come from two lemmas and two propagation rules:

* block zeros: psi_0 is orthogonal under E' to the span of the Fourier block,
  so <alpha_0|E'|alpha_y> = <alpha_y|E'|alpha_0> = 0 for every block alpha;
* block trivial: once a pivot alpha_p has <alpha_p|E'|alpha_y> = 0 (both
  orientations) for every other block alpha, E' restricted to the block is a
  multiple of the identity, so every cross relation vanishes and every
  diagonal <alpha_y|E'|alpha_y> is equal;
* a zero-sum relation with one unknown entry forces that entry to zero;
* diagonal equalities whose off-diagonal terms are all zero are rewritten on
  union-find class representatives; two opposite terms merge the classes, and
  a final exact nullspace pass over the leftovers finds the remaining merges.

Coefficients are products of exact amplitudes, never sums, so a term cannot
cancel; diagonal weights are exact rationals.
"""

from __future__ import annotations

import enum
import itertools
import time
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
import sympy
from networkx.utils import UnionFind

from .constructions import StateSet
from .errors import DuplicateEntry, HypothesisNotEstablished, ValidationError
from .tensor import ExactScalar, Ket, Label, MeasuredSet, format_label

ZERO_SUM = "ZeroSum"
EQUALITY = "Equality"
ORTHOGONALITY_FACT = "<psi_i|E'|psi_j>=0 (i!=j)"


class Mode(str, enum.Enum):
    FIXPOINT = "fixpoint"
    PAPER_ORDER = "paper-order"


class ReplayVerdict(str, enum.Enum):
    PROVED = "ProvedTrivial"
    INCOMPLETE = "Incomplete"


@dataclass(frozen=True, order=True)
class EntryId:
    """Operator entry <row|E|col> on the measured parties."""

    row: Label
    col: Label

    @property
    def is_diagonal(self) -> bool:
        return self.row == self.col

    def render(self, dims: Sequence[int] | None = None) -> str:
        return f"<{format_label(self.row, dims)}|E|{format_label(self.col, dims)}>"


Term = tuple[EntryId, ExactScalar]


@dataclass(frozen=True)
class Relation:
    """ZeroSum: sum(terms) = 0. Equality: sum(terms) = sum(rhs)."""

    terms: tuple[Term, ...]
    kind: str
    provenance: str
    rhs: tuple[Term, ...] = ()

    def __post_init__(self):
        if self.kind not in (ZERO_SUM, EQUALITY):
            raise ValidationError(f"unknown relation kind {self.kind!r}")
        for side in (self.terms, self.rhs):
            entries = [e for e, _ in side]
            if len(set(entries)) != len(entries):
                raise DuplicateEntry(f"relation {self.provenance} repeats an entry")
            if any(c.is_zero() for _, c in side):
                raise ValidationError(f"relation {self.provenance} has a zero coefficient")
        if self.kind == ZERO_SUM and self.rhs:
            raise ValidationError("zero-sum relations have no right-hand side")

    @property
    def fact(self) -> str:
        return f"R[{self.provenance}]"

    @property
    def entries(self) -> list[EntryId]:
        return [e for e, _ in self.terms] + [e for e, _ in self.rhs]


def _split(k: Ket, m: MeasuredSet) -> dict[Label, list[tuple[Label, ExactScalar]]]:
    out: dict[Label, list[tuple[Label, ExactScalar]]] = defaultdict(list)
    for label, amp in k.terms:
        kept, meas = m.split(label)
        out[kept].append((meas, amp))
    return out


def _expand_terms(x: Ket, y: Ket, m: MeasuredSet) -> tuple[Term, ...]:
    left, right = _split(x, m), _split(y, m)
    terms = []
    for kept, xs in left.items():
        for ms, cs in xs:
            for mt, ct in right.get(kept, ()):
                terms.append((EntryId(ms, mt), cs.conjugate() * ct))
    return tuple(terms)


def expand(alpha_x: Ket, alpha_y: Ket, m: MeasuredSet, provenance: str = "") -> Relation:
    """<alpha_x| I_K (x) E |alpha_y> written as entries of E.

    For x != y this is a ZeroSum relation. For x == y it is the left side of a
    diagonal Equality: weights |amplitude|^2 on diagonal entries, plus cross
    terms for labels that share their kept digits.
    """
    kind = EQUALITY if alpha_x == alpha_y else ZERO_SUM
    return Relation(_expand_terms(alpha_x, alpha_y, m), kind, provenance)


@dataclass(frozen=True)
class TraceStep:
    label: str
    rule: str
    consumed: tuple[str, ...]
    produced: tuple[str, ...]
    zeros: int
    merges: int
    note: str = ""

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "rule": self.rule,
            "consumed": list(self.consumed),
            "produced": list(self.produced),
            "zeros": self.zeros,
            "merges": self.merges,
            "note": self.note,
        }


APPENDIX = {"T1": "A", "T2": "A", "T3": "B", "EX1": "B", "T4": "C"}


@dataclass
class ProofTrace:
    steps: list[TraceStep] = field(default_factory=list)
    _known: set[str] = field(default_factory=set, repr=False)

    def record(self, label: str, rule: str, consumed: Iterable[str], produced: Iterable[str],
               zeros: int, merges: int, note: str = "") -> TraceStep:
        consumed, produced = tuple(dict.fromkeys(consumed)), tuple(produced)
        missing = [f for f in consumed if f not in self._known]
        if missing:
            raise RuntimeError(f"step {label}/{rule} cites facts not yet derived: {missing[:3]}")
        step = TraceStep(label, rule, consumed, produced, zeros, merges, note)
        self.steps.append(step)
        self._known.update(produced)
        return step

    def knows(self, fact: str) -> bool:
        return fact in self._known

    def stages(self) -> list[str]:
        return list(dict.fromkeys(s.label for s in self.steps))

    def to_json(self) -> dict:
        return {"steps": [s.to_json() for s in self.steps]}

    def render_text(self, appendix: str | None = None, max_cited: int = 6) -> str:
        lines = []
        current = None
        for i, step in enumerate(self.steps):
            if step.label != current:
                current = step.label
                head = current
                if appendix is not None and current.startswith("Step"):
                    head = f"{current}  [Appendix {appendix}, {current}]"
                lines.append(head)
            cited = ", ".join(step.consumed[:max_cited])
            if len(step.consumed) > max_cited:
                cited += f", ... ({len(step.consumed)} facts)"
            shown = ", ".join(step.produced[:max_cited])
            if len(step.produced) > max_cited:
                shown += f", ... ({len(step.produced)} facts)"
            lines.append(f"  ({i}) {step.rule}: {shown}")
            if cited:
                lines.append(f"      from {cited}")
            if step.note:
                lines.append(f"      note: {step.note}")
        return "\n".join(lines) + "\n"


class Knowledge:
    """Entries known zero, diagonal classes, pending relations and the trace."""

    def __init__(self, measured_dims: Sequence[int]):
        self.mdims = tuple(measured_dims)
        self.labels: list[Label] = list(itertools.product(*(range(d) for d in self.mdims)))
        self.zero: set[EntryId] = set()
        self.classes = UnionFind(self.labels)
        self._evidence: dict[Label, list[str]] = {lab: [] for lab in self.labels}
        self.trace = ProofTrace()
        self.notes: list[str] = []
        self._relations: list[Relation] = []
        self._registered: set[str] = set()
        self._watch: dict[EntryId, list[int]] = defaultdict(list)
        self._todo: deque[int] = deque()
        self._diag_ready: list[int] = []
        self._diag_done: set[int] = set()
        self._n_classes = len(self.labels)
        self.record("Setup", "premise", [], [ORTHOGONALITY_FACT])

    # -- summaries --

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def n_classes(self) -> int:
        return self._n_classes

    @property
    def merges(self) -> int:
        return self.dim - self._n_classes

    def zero_fact(self, e: EntryId) -> str:
        return f"{e.render(self.mdims)}=0"

    def offdiag_zero_count(self) -> int:
        return sum(1 for e in self.zero if not e.is_diagonal)

    def all_offdiag_zero(self) -> bool:
        return self.offdiag_zero_count() == self.dim * (self.dim - 1)

    def partition(self) -> list[frozenset[Label]]:
        return sorted((frozenset(c) for c in self.classes.to_sets()), key=lambda c: min(c))

    def record(self, label: str, rule: str, consumed: Iterable[str], produced: Iterable[str],
               note: str = "") -> TraceStep:
        return self.trace.record(label, rule, consumed, produced, len(self.zero), self.merges, note)

    # -- relation intake --

    def register(self, relations: Iterable[Relation]) -> int:
        added = 0
        for rel in relations:
            if rel.provenance in self._registered:
                continue
            if not self.trace.knows(rel.fact):
                raise RuntimeError(f"relation {rel.provenance} was never produced by a lemma step")
            self._registered.add(rel.provenance)
            idx = len(self._relations)
            self._relations.append(rel)
            for e in rel.entries:
                if not e.is_diagonal:
                    self._watch[e].append(idx)
            self._todo.append(idx)
            added += 1
        return added

    # -- propagation --

    def _set_zero(self, e: EntryId, rel: Relation, label: str) -> None:
        if e.is_diagonal:
            raise RuntimeError(f"relation {rel.provenance} forces diagonal {e.render(self.mdims)} to zero")
        cited = [rel.fact] + [self.zero_fact(x) for x, _ in rel.terms if x != e]
        self.zero.add(e)
        self.record(label, "zero-sum", cited, [self.zero_fact(e)])
        self._todo.extend(self._watch.get(e, ()))

    def _drain_zero_sums(self, label: str) -> None:
        while self._todo:
            idx = self._todo.popleft()
            rel = self._relations[idx]
            if rel.kind == EQUALITY:
                if idx not in self._diag_done and all(
                        e.is_diagonal or e in self.zero for e in rel.entries):
                    self._diag_done.add(idx)
                    self._diag_ready.append(idx)
                continue
            unknown = [e for e, _ in rel.terms if e not in self.zero]
            if len(unknown) == 1:
                self._set_zero(unknown[0], rel, label)

    def _reduce(self, rel: Relation) -> dict[Label, Fraction]:
        weights: dict[Label, Fraction] = defaultdict(Fraction)
        for side, sign in ((rel.terms, 1), (rel.rhs, -1)):
            for e, c in side:
                if not e.is_diagonal:
                    continue
                if c.inv_sqrt != 1 or not c.is_real:
                    raise RuntimeError(f"diagonal weight {c} in {rel.provenance} is not rational")
                weights[self.classes[e.row]] += sign * c.rational
        return {k: w for k, w in weights.items() if w != 0}

    def _diag_cited(self, rel: Relation, roots: Iterable[Label]) -> list[str]:
        cited = [rel.fact] + [self.zero_fact(e) for e in rel.entries if not e.is_diagonal]
        for e in rel.entries:
            if e.is_diagonal:
                cited.extend(self._evidence[self.classes[e.row]])
        for r in roots:
            cited.extend(self._evidence[r])
        return cited

    def _merge(self, a: Label, b: Label, label: str, rule: str, cited: list[str]) -> None:
        ra, rb = self.classes[a], self.classes[b]
        if ra == rb:
            return
        fact = f"{EntryId(ra, ra).render(self.mdims)}={EntryId(rb, rb).render(self.mdims)}"
        self.record(label, rule, cited, [fact])
        evidence = self._evidence.pop(ra) + self._evidence.pop(rb) + [fact]
        self.classes.union(ra, rb)
        self._evidence[self.classes[ra]] = evidence
        self._n_classes -= 1

    def _substitute(self, label: str) -> None:
        changed = True
        while changed:
            changed = False
            keep = []
            for idx in self._diag_ready:
                rel = self._relations[idx]
                reduced = self._reduce(rel)
                if len(reduced) == 1:
                    raise RuntimeError(f"relation {rel.provenance} forces a diagonal class to zero")
                if len(reduced) == 2:
                    a, b = reduced
                    self._merge(a, b, label, "diag-merge", self._diag_cited(rel, (a, b)))
                    changed = True
                elif reduced:
                    keep.append(idx)
            self._diag_ready = keep

    def _nullspace_merges(self, label: str) -> bool:
        """Exact pass over stalled diagonal relations; True when some classes merged."""
        rows, cited = [], []
        for idx in self._diag_ready:
            rel = self._relations[idx]
            reduced = self._reduce(rel)
            if reduced:
                rows.append(reduced)
                cited.extend(self._diag_cited(rel, reduced))
        if not rows:
            return False
        variables = sorted({v for row in rows for v in row})
        col = {v: i for i, v in enumerate(variables)}
        mat = sympy.zeros(len(rows), len(variables))
        for r, row in enumerate(rows):
            for v, w in row.items():
                mat[r, col[v]] = sympy.Rational(w.numerator, w.denominator)
        basis = mat.nullspace()
        groups: dict[tuple, list[Label]] = defaultdict(list)
        for v in variables:
            groups[tuple(vec[col[v]] for vec in basis)].append(v)
        merged = False
        for members in groups.values():
            for other in members[1:]:
                if self.classes[other] != self.classes[members[0]]:
                    self._merge(members[0], other, label, "nullspace-merge", cited)
                    merged = True
        return merged

    def propagate(self, label: str, closure: bool = False) -> "Knowledge":
        """Run both rules to a fixpoint; ``closure`` adds the exact nullspace pass."""
        while True:
            self._drain_zero_sums(label)
            self._substitute(label)
            if closure and self.n_classes > 1 and self._nullspace_merges(label):
                continue
            if not self._todo:
                return self


# -- lemma applications -----------------------------------------------------

def _coefficients(psi: Ket, block: Sequence[Ket]) -> list[ExactScalar]:
    """Exact c_y with psi = sum_y c_y alpha_y, or ValidationError if psi leaves the span."""
    coeffs = []
    covered = 0
    for alpha in block:
        ratio = None
        hits = 0
        for label, amp in alpha.terms:
            value = psi.amplitude(label)
            if value.is_zero():
                continue
            hits += 1
            r = value / amp
            if ratio is not None and r != ratio:
                raise ValidationError("state is not in the span of the block")
            ratio = r
        if ratio is not None and hits != len(alpha):
            raise ValidationError("state is not in the span of the block")
        covered += hits
        coeffs.append(ratio if ratio is not None else ExactScalar(Fraction(0)))
    if covered != len(psi):
        raise ValidationError("state has support outside the block")
    return coeffs


def _check_span(psis: Sequence[Ket], block: Sequence[Ket]) -> list[list[ExactScalar]]:
    if len(psis) != len(block):
        raise ValidationError(f"{len(psis)} states cannot span a block of {len(block)}")
    coeffs = [_coefficients(p, block) for p in psis]
    mat = np.array([[complex(c) for c in row] for row in coeffs])
    if np.linalg.matrix_rank(mat) != len(block):
        raise ValidationError("states do not span the block")
    return coeffs


def _check_disjoint(blocks: Sequence[Sequence[Ket]]) -> None:
    seen: set = set()
    for block in blocks:
        for k in block:
            if seen & k.support:
                raise ValidationError("blocks share basis labels")
            seen |= k.support


def apply_block_zeros(know: Knowledge, block_s: Sequence[Ket], block_t: Sequence[Ket],
                      psis_s: Sequence[Ket], psis_t: Sequence[Ket], m: MeasuredSet,
                      label: str = "Lemma 1", names_s: Sequence[str] | None = None,
                      names_t: Sequence[str] | None = None) -> Knowledge:
    """Cross-block zeros: <x|E'|y> = <y|E'|x> = 0 for x in block S, y in block T.

    Blocks are lists of orthonormal kets with disjoint supports (single basis
    kets give the entry-level form). psis_s and psis_t must span them.
    """
    if not block_s or not block_t:
        raise ValidationError("blocks must be nonempty")
    _check_disjoint([block_s, block_t])
    _check_span(psis_s, block_s)
    _check_span(psis_t, block_t)
    names_s = list(names_s or [f"s{i}" for i in range(len(block_s))])
    names_t = list(names_t or [f"t{i}" for i in range(len(block_t))])
    rels = []
    for x, nx in zip(block_s, names_s):
        for y, ny in zip(block_t, names_t):
            for a, b, na, nb in ((x, y, nx, ny), (y, x, ny, nx)):
                terms = _expand_terms(a, b, m)
                if terms:
                    rels.append(Relation(terms, ZERO_SUM, f"L1 <{na}|E'|{nb}>"))
    know.record(label, "Lemma 1 (block zeros)", [ORTHOGONALITY_FACT], [r.fact for r in rels])
    know.register(rels)
    return know.propagate(label)


def block_trivial_hypothesis(know: Knowledge, block: Sequence[Ket], pivot: int,
                             m: MeasuredSet) -> list[str] | None:
    """Zero facts establishing <pivot|E'|y> = <y|E'|pivot> = 0, or None if not derivable."""
    cited = []
    for y, alpha in enumerate(block):
        if y == pivot:
            continue
        for a, b in ((block[pivot], alpha), (alpha, block[pivot])):
            for e, _ in _expand_terms(a, b, m):
                if e not in know.zero:
                    return None
                cited.append(know.zero_fact(e))
    return cited


def apply_block_trivial(know: Knowledge, block: Sequence[Ket], pivot: int, psis: Sequence[Ket],
                        m: MeasuredSet, label: str = "Lemma 2",
                        names: Sequence[str] | None = None) -> list[Relation]:
    """Relations making E' a multiple of the identity on the block spanned by psis.

    Returns ZeroSum relations for every ordered pair of distinct block states
    and Equality relations between the pivot's diagonal and every other one.
    """
    if len(block) < 2:
        return []
    _check_disjoint([[k] for k in block])
    coeffs = _check_span(psis, block)
    names = list(names or [f"a{i}" for i in range(len(block))])
    for j, row in enumerate(coeffs):
        if row[pivot].is_zero():
            raise HypothesisNotEstablished(f"state {j} has no overlap with pivot {names[pivot]}")
    cited = block_trivial_hypothesis(know, block, pivot, m)
    if cited is None:
        raise HypothesisNotEstablished(
            f"<{names[pivot]}|E'|y> = 0 is not derivable for every other block state")
    rels = []
    for y, z in itertools.permutations(range(len(block)), 2):
        terms = _expand_terms(block[y], block[z], m)
        if terms:
            rels.append(Relation(terms, ZERO_SUM, f"L2 <{names[y]}|E'|{names[z]}>"))
    left = _expand_terms(block[pivot], block[pivot], m)
    for y in range(len(block)):
        if y != pivot:
            rels.append(Relation(left, EQUALITY, f"L2 {names[pivot]}~{names[y]}",
                                 _expand_terms(block[y], block[y], m)))
    know.record(label, "Lemma 2 (block trivial)", [ORTHOGONALITY_FACT] + cited,
                [r.fact for r in rels], note=f"pivot {names[pivot]}")
    return rels


# -- schedules ---------------------------------------------------------------

Batch = tuple[str, Callable]


def _fam(*names: str, **where) -> Callable:
    """Predicate on a FamilyTag: family in names and params matching ``where``."""
    def pred(tag) -> bool:
        if tag.family not in names:
            return False
        for key, test in where.items():
            pos = {"i": 0, "j": 1}[key]
            if len(tag.params) <= pos or not test(tag.params[pos]):
                return False
        return True
    return pred


def staged_schedule(s: StateSet) -> list[Batch]:
    """Family batches in the order the staged derivations use them."""
    theorem = s.tags[0].theorem if s.alphas else ""
    out: list[Batch] = []
    if theorem in ("T1", "T2"):
        d1 = s.dims[0]
        last = d1 if theorem == "T1" else d1 + 1
        out.append(("Step 1", _fam("B1")))
        top = d1 - 1 if theorem == "T1" else d1
        for k in range(2, top + 1):
            out.append((f"Step {k}", _fam("B2", "B3", i=lambda v, k=k: v == k)))
        if theorem == "T1":
            out.append((f"Step {last}", _fam("B4", "B5")))
        else:
            out.append((f"Step {last}", _fam("B4", "B5")))
            out.append((f"Step {last + 1}", _fam(*(f"B{x}" for x in range(6, 14)))))
    elif theorem in ("T3", "EX1"):
        d = s.dims[0]
        out.append(("Step 1", _fam("B1")))
        out.append(("Step 1", _fam("B2", "B3", "B4", j=lambda v: v == 1)))
        for k in range(2, d):
            out.append((f"Step {k}", _fam("B5", "B6", "B7", i=lambda v, k=k: v == k)))
            out.append((f"Step {k}", _fam("B2", "B3", "B4", j=lambda v, k=k: v == k)))
        out.append((f"Step {d}", _fam("B8", "B9")))
    elif theorem == "T4":
        d1 = s.dims[0]
        out.append(("Step 1", _fam("B1")))
        out.append(("Step 1", _fam("B2", "B6", "B9", j=lambda v: v == 1)))
        for k in range(2, d1 + 1):
            out.append((f"Step {k}", _fam("B12", "B13", "B14", i=lambda v, k=k: v == k)))
            out.append((f"Step {k}", _fam("B2", "B6", "B9", j=lambda v, k=k: v == k)))
        step = f"Step {d1 + 1}"
        out.append((step, _fam("B15", "B16", "B17")))
        out.append((step, _fam("B2", "B6", "B9", j=lambda v: v >= d1 + 1)))
        out.append((step, _fam("B5")))
        out.append((step, _fam("B3", "B4", "B7", "B8", "B10", "B11")))
        out.append((f"Step {d1 + 2}", _fam(*(f"B{x}" for x in range(18, 37)))))
    return out


# -- orchestration -----------------------------------------------------------

@dataclass
class ReplayResult:
    construction: str
    dims: tuple[int, ...]
    measured: tuple[int, ...]
    mode: Mode
    verdict: ReplayVerdict
    knowledge: Knowledge = field(repr=False)
    appendix: str | None = None
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def trace(self) -> ProofTrace:
        return self.knowledge.trace

    def summary(self) -> dict:
        k = self.knowledge
        return {
            "construction": self.construction,
            "dims": list(self.dims),
            "measured_parties": list(self.measured),
            "mode": self.mode.value,
            "verdict": self.verdict.value,
            "D": k.dim,
            "offdiag_zero": k.offdiag_zero_count(),
            "offdiag_total": k.dim * (k.dim - 1),
            "diag_classes": k.n_classes,
            "steps": len(k.trace.steps),
            "stages": k.trace.stages(),
            "notes": list(k.notes),
            "wall_time": sum(self.timings.values()),
        }

    def to_json(self) -> dict:
        out = self.summary()
        out["trace"] = self.trace.to_json()["steps"]
        return out

    def render_text(self, diff_appendix: bool = False) -> str:
        head = (f"{self.construction} dims={self.dims} measured={self.measured} "
                f"mode={self.mode.value}: {self.verdict.value}\n")
        body = self.trace.render_text(self.appendix if diff_appendix else None)
        return head + body


def _names(s: StateSet) -> list[str]:
    out = []
    for x, tag in enumerate(s.tags):
        params = ",".join(map(str, tag.params))
        out.append(f"a{x}" if x == 0 else f"a{x}:{tag.family}({params})")
    return out


def _direct(s: StateSet, m: MeasuredSet, know: Knowledge, label: str) -> None:
    rels = []
    for i, j in itertools.permutations(range(len(s.psis)), 2):
        terms = _expand_terms(s.psis[i], s.psis[j], m)
        if not terms:
            continue
        try:
            rels.append(Relation(terms, ZERO_SUM, f"OP <psi{i}|E'|psi{j}>"))
        except DuplicateEntry:
            know.notes.append(f"skipped <psi{i}|E'|psi{j}>: two terms share an entry")
    know.record(label, "orthogonality (direct)", [ORTHOGONALITY_FACT], [r.fact for r in rels])
    know.register(rels)


def replay(s: StateSet, m: MeasuredSet, mode: Mode | str = Mode.FIXPOINT) -> ReplayResult:
    mode = Mode(mode)
    m.check(s.dims)
    t0 = time.perf_counter()
    know = Knowledge(s.dims.sub(m.parties))
    appendix = None
    if s.has_fourier_block():
        appendix = APPENDIX.get(s.tags[0].theorem)
        _replay_block(s, m, mode, know)
    else:
        know.notes.append("no origin-plus-Fourier block; used the pairwise relations directly")
        _direct(s, m, know, "Direct")
        know.propagate("Direct", closure=True)
    proved = know.all_offdiag_zero() and know.n_classes == 1
    verdict = ReplayVerdict.PROVED if proved else ReplayVerdict.INCOMPLETE
    return ReplayResult(s.name, tuple(s.dims), m.parties, mode, verdict, know, appendix,
                        {"replay": time.perf_counter() - t0})


def _replay_block(s: StateSet, m: MeasuredSet, mode: Mode, know: Knowledge) -> None:
    alphas, names = s.alpha_kets, _names(s)
    block, block_psis, block_names = alphas[1:], list(s.psis[1:]), names[1:]
    first = "Step 1" if mode == Mode.PAPER_ORDER else "Fixpoint"
    apply_block_zeros(know, alphas[:1], block, s.psis[:1], block_psis, m, first,
                      names[:1], block_names)
    pivot = next((p for p in range(len(block))
                  if block_trivial_hypothesis(know, block, p, m) is not None), None)
    if pivot is None:
        know.notes.append("no block state satisfies the pivot hypothesis; lemma 2 not applied")
        know.propagate(first, closure=True)
        return
    rels = apply_block_trivial(know, block, pivot, block_psis, m, first, block_names)
    if mode == Mode.FIXPOINT:
        know.register(rels)
        know.propagate("Fixpoint", closure=True)
        return
    batches = staged_schedule(s)
    tags = s.tags[1:]
    where = [next((b for b, (_, pred) in enumerate(batches) if pred(t)), len(batches)) for t in tags]
    index = {n: i for i, n in enumerate(block_names)}
    grouped: dict[int, list[Relation]] = defaultdict(list)
    for rel in rels:
        # provenance "L2 <a|E'|b>" or "L2 a~b"; runs with its earliest-scheduled endpoint
        body = rel.provenance[3:]
        ends = body.strip("<>").split("|E'|") if rel.kind == ZERO_SUM else body.split("~")[1:]
        grouped[min(where[index[e]] for e in ends)].append(rel)
    for b, (label, _) in enumerate(batches):
        if know.register(grouped.get(b, ())):
            know.propagate(label)
    if know.register(grouped.get(len(batches), ())):
        know.notes.append("relations outside the scheduled families ran in a residual stage")
        know.propagate("Residual")
    know.propagate("Closure", closure=True)


def replay_strongest(s: StateSet, mode: Mode | str = Mode.FIXPOINT) -> list[ReplayResult]:
    return [replay(s, MeasuredSet.complement_of(p, s.n_parties), mode) for p in range(s.n_parties)]


def overall(results: Sequence[ReplayResult]) -> ReplayVerdict:
    if results and all(r.verdict == ReplayVerdict.PROVED for r in results):
        return ReplayVerdict.PROVED
    return ReplayVerdict.INCOMPLETE


__all__ = [
    "EntryId", "Relation", "Knowledge", "ProofTrace", "TraceStep", "Mode", "ReplayVerdict",
    "ReplayResult", "expand", "apply_block_zeros", "apply_block_trivial", "replay",
    "replay_strongest", "staged_schedule", "overall", "ZERO_SUM", "EQUALITY",
]
