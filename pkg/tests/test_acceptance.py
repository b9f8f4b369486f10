"""Acceptance criteria 1-9. Each test records one PASS/FAIL line, shown in the run summary."""

import itertools
import math
import random
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_SETS, built, numeric
from oracles import dense_constraints, nullspace_dim
from snlverify.constructions import (
    build, build_theorem1, check_orthonormal, custom_set, global_phase_equal, lower_bound,
    product_basis, stopper_state,
)
from snlverify.replay import Mode, ReplayVerdict, replay
from snlverify.report import sweep
from snlverify.tensor import ExactScalar, Ket, MeasuredSet, schmidt_rank
from snlverify.verifier import Verdict, assemble, check_triviality, solution_space

TRIPARTITE_BUDGET = 60.0
FOUR_PARTY_BUDGET = 600.0


def _cases():
    for name, params in ACCEPTANCE_SETS:
        n = len(built(name, params).dims)
        for p in range(n):
            yield name, params, p


def _expected(name, params):
    if name in ("t1", "t3"):
        d = params[0]
        return d ** 2 + 1 if name == "t1" else d ** 3 + 1
    if name == "ex1":
        return 28
    return math.prod(params[1:]) + 1


def test_c1_cardinality(criterion):
    bad = []
    slowest = 0.0
    for name, params in ACCEPTANCE_SETS:
        t0 = time.perf_counter()
        s = build(name, params)
        elapsed = time.perf_counter() - t0
        slowest = max(slowest, elapsed)
        if len(s) != _expected(name, params) or len(s) != lower_bound(s.dims) or elapsed >= 1.0:
            bad.append((name, params, len(s), elapsed))
    criterion("1", not bad, f"{len(ACCEPTANCE_SETS)} sets, slowest build {slowest:.3f}s {bad or ''}")
    assert not bad


def test_c2_orthogonality(criterion):
    worst = 0.0
    for name, params in ACCEPTANCE_SETS:
        s = built(name, params)
        check_orthonormal(s.alpha_kets)  # exact; raises on failure
        v = np.array([k.vector for k in s.psis])
        worst = max(worst, float(np.max(np.abs(v.conj() @ v.T - np.eye(len(s))))))
    ok = worst <= 1e-12
    criterion("2", ok, f"alphas exact; max |<psi_i|psi_j> - delta_ij| = {worst:.2e}")
    assert ok


@pytest.mark.slow
def test_c3_numeric_oracle(criterion):
    failures = []
    per_set: dict = {}
    for name, params, p in _cases():
        v = numeric(name, params, p)
        per_set[(name, params)] = per_set.get((name, params), 0.0) + v.wall_time
        if not (v.verdict == Verdict.TRIVIAL and v.nullspace_dim == 1
                and v.identity_overlap >= 1 - 1e-8 and v.spectral_gap >= 1e3):
            failures.append((name, params, p, v.verdict.value, v.nullspace_dim, v.spectral_gap))
    over = []
    for (name, params), t in per_set.items():
        budget = TRIPARTITE_BUDGET if len(built(name, params).dims) == 3 else FOUR_PARTY_BUDGET
        if t > budget:
            over.append((name, params, round(t, 1)))
    ok = not failures and not over
    heaviest = max(per_set.items(), key=lambda kv: kv[1])
    criterion("3", ok, f"{sum(1 for _ in _cases())} complements Trivial; heaviest {heaviest[0]} "
                       f"{heaviest[1]:.1f}s {failures or ''}{over or ''}")
    assert ok


@pytest.mark.slow
def test_c4_symbolic_oracle(criterion):
    failures = []
    for name, params, p in _cases():
        s = built(name, params)
        m = MeasuredSet.complement_of(p, s.n_parties)
        numeric_trivial = numeric(name, params, p).verdict == Verdict.TRIVIAL
        for mode in Mode:
            r = replay(s, m, mode)
            if r.verdict != ReplayVerdict.PROVED or not numeric_trivial:
                failures.append((name, params, p, mode.value, r.verdict.value))
    criterion("4", not failures, f"ProvedTrivial in both modes, agreeing with the numeric oracle {failures or ''}")
    assert not failures


def test_c5_negative_controls(criterion):
    d = (2, 2, 2)
    m = MeasuredSet((1, 2), 3)
    ghz = custom_set(d, [Ket.basis(d, (0, 0, 0)), Ket.basis(d, (1, 1, 1))])
    found = {}
    ok = True
    for label, s in (("product", product_basis(d)), ("ghz-pair", ghz)):
        c = assemble(s, m)
        brute = nullspace_dim(dense_constraints([k.vector for k in s.psis], d, [1, 2]))
        got = solution_space(c).null_dim
        numeric_verdict = check_triviality(s, m).verdict
        replays = [replay(s, MeasuredSet.complement_of(p, 3)).verdict for p in range(3)]
        found[label] = got
        ok &= (got == brute and numeric_verdict == Verdict.NONTRIVIAL
               and all(v == ReplayVerdict.INCOMPLETE for v in replays))
    ok &= found["product"] == 4
    criterion("5", ok, f"NonTrivial + Incomplete; nullspace dims {found['product']}, {found['ghz-pair']} "
                       "equal the brute-force constraint count")
    literal = found["ghz-pair"] == 14
    criterion("5 literal", literal,
              f"stated nullspace dim 14 for the {{|000>,|111>}} pair; computed {found['ghz-pair']} "
              "(every constraint row vanishes because the kept digits differ)")
    assert ok


def test_c6_table_deltas(criterion):
    rows = sweep("t3", 2, 4)
    deltas = {r.dims[0]: int(r.as_record()["delta_vs_shifted"]) for r in rows}
    ok = all(deltas[d] == d - 2 for d in (2, 3, 4))
    ok &= all(r.cardinality == r.dims[0] ** 3 + 1 for r in rows)
    criterion("6", ok, f"four-party symmetric delta vs d^3+d-1: {deltas}")
    assert ok


def test_c7_structure(criterion):
    bad = []
    for name, params in ACCEPTANCE_SETS:
        s = built(name, params)
        n = s.n_parties
        cuts = [MeasuredSet(c, n) for r in range(1, n // 2 + 1) for c in itertools.combinations(range(n), r)]
        products = [i for i, k in enumerate(s.psis) if all(schmidt_rank(k, m) == 1 for m in cuts)]
        entangled = all(schmidt_rank(k, m) >= 2 for i, k in enumerate(s.psis) if i not in products
                        for m in cuts)
        stop = stopper_state(s.dims)
        if products != [0] or not entangled or any(global_phase_equal(k, stop) for k in s.psis):
            bad.append((name, params, products))
    criterion("7", not bad, f"one product state, others genuinely entangled, no stopper {bad or ''}")
    assert not bad


def test_c8_minimality(criterion):
    bad = []
    checked = 0
    for d in (2, 3):
        s = build_theorem1(d)
        for i in range(1, len(s)):
            reduced = s.with_psis([k for j, k in enumerate(s.psis) if j != i])
            dims = [check_triviality(reduced, MeasuredSet.complement_of(p, 3)).nullspace_dim for p in range(3)]
            checked += 1
            if max(dims) <= 1:
                bad.append((d, i, dims))
    criterion("8", not bad, f"{checked} single deletions all enlarge some complement's nullspace {bad or ''}")
    assert not bad


def _rephased(s, rng):
    powers = [rng.randrange(16) for _ in s.psis]
    return s.with_psis([k.scaled(ExactScalar.root_of_unity(16, q)) for k, q in zip(s.psis, powers)])


@pytest.mark.slow
def test_c9_robustness(criterion):
    rng = random.Random(20261019)
    cases = list(_cases())
    changed = []
    for trial in range(10):
        name, params, p = rng.choice(cases)
        s = built(name, params)
        base = numeric(name, params, p)
        m = MeasuredSet.complement_of(p, s.n_parties)
        v = check_triviality(_rephased(s, rng), m)
        if v.verdict != base.verdict or v.nullspace_dim != base.nullspace_dim:
            changed.append(("phase", name, params, p))
    for trial in range(10):
        name, params, p = rng.choice(cases)
        s = built(name, params)
        base = numeric(name, params, p)
        perm = list(range(s.n_parties))
        rng.shuffle(perm)
        moved = s.permuted(perm)
        v = check_triviality(moved, MeasuredSet.complement_of(perm.index(p), s.n_parties))
        if v.verdict != base.verdict or v.nullspace_dim != base.nullspace_dim:
            changed.append(("perm", name, params, p, tuple(perm)))
    criterion("9", not changed, f"10 phase + 10 permutation trials unchanged {changed or ''}")
    assert not changed
