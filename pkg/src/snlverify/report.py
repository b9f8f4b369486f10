"""Grids, cardinality sweeps, benchmark tables and the figures drawn from them."""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .constructions import ORIGIN, StateSet, build, lower_bound  # noqa: E402
from .errors import ValidationError  # noqa: E402
from .replay import Mode, ReplayVerdict, overall, replay  # noqa: E402
from .tensor import MeasuredSet, decode, encode, format_label  # noqa: E402
from .verifier import StrongestReport, Verdict, check_triviality, verify_strongest  # noqa: E402


# -- grids -------------------------------------------------------------------

def grid_cells(s: StateSet) -> list[list[int | None]]:
    """Rows: digit of the first party. Columns: remaining digits in mixed-radix order.

    A cell holds the index of the alpha whose support contains that label.
    """
    if not s.alphas:
        raise ValidationError("grid needs the alpha states of a construction")
    rest = s.dims[1:]
    cols = math.prod(rest)
    cells: list[list[int | None]] = [[None] * cols for _ in range(s.dims[0])]
    for x, k in enumerate(s.alpha_kets):
        for label in k.support:
            cells[label[0]][encode(label[1:], rest)] = x
    return cells


def render_grid(s: StateSet) -> str:
    cells = grid_cells(s)
    rest = s.dims[1:]
    heads = [format_label(decode(c, rest), rest) for c in range(len(cells[0]))]
    width = max(max(len(h) for h in heads), len(str(len(s.alphas) - 1)))
    lines = [" " * 3 + " ".join(h.rjust(width) for h in heads)]
    for r, row in enumerate(cells):
        shown = ["." if x is None else str(x) for x in row]
        lines.append(f"{r:>2} " + " ".join(v.rjust(width) for v in shown))
    lines.append("")
    for x, tag in enumerate(s.tags):
        params = ",".join(map(str, tag.params))
        name = "origin" if tag.family == ORIGIN else f"{tag.family}({params})"
        lines.append(f"{x:>4}  {name}")
    return "\n".join(lines) + "\n"


def plot_grid(s: StateSet, path: str | Path) -> None:
    cells = grid_cells(s)
    rows, cols = len(cells), len(cells[0])
    families = sorted({t.family for t in s.tags}, key=lambda f: (f != ORIGIN, len(f), f))
    colour = {f: i for i, f in enumerate(families)}
    fam = [[float("nan") if x is None else colour[s.tags[x].family] for x in row] for row in cells]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.45 * cols + 1), max(2.0, 0.45 * rows + 1)))
    ax.imshow(fam, cmap="tab20", vmin=0, vmax=max(19, len(families)), aspect="equal")
    if rows * cols <= 400:
        for r, c in itertools.product(range(rows), range(cols)):
            if cells[r][c] is not None:
                ax.text(c, r, str(cells[r][c]), ha="center", va="center", fontsize=7)
    rest = s.dims[1:]
    ax.set_xticks(range(cols))
    ax.set_xticklabels([format_label(decode(c, rest), rest) for c in range(cols)], rotation=90, fontsize=6)
    ax.set_yticks(range(rows))
    ax.set_xlabel("parties 2..N")
    ax.set_ylabel("party 1")
    ax.set_title(f"{s.name} {tuple(s.dims)}: {len(s)} states")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# -- prior-work cardinalities --------------------------------------------------

def prior_cardinalities(dims: Sequence[int]) -> dict[str, int | None]:
    """Cardinalities of earlier strongest-nonlocal constructions on the same system."""
    d = sorted(dims)
    n = len(d)
    out: dict[str, int | None] = {
        "prior_complement": math.prod(d) - math.prod(x - 1 for x in d),
        "prior_qutrit": 2 * 3 ** (n - 1) if all(x == 3 for x in d) else None,
        "prior_shifted": None,
        "prior_stopper": None,
    }
    if n == 3:
        out["prior_shifted"] = d[1] * d[2] + d[0] - 1
        out["prior_stopper"] = d[1] * d[2] + 1
    elif n == 4 and len(set(d)) == 1:
        out["prior_shifted"] = d[0] ** 3 + d[0] - 1
    return out


# -- sweeps --------------------------------------------------------------------

SWEEP_HEADER = (
    "construction", "dims", "cardinality", "lower_bound", "prior_complement", "prior_qutrit",
    "prior_shifted", "prior_stopper", "delta_vs_shifted", "status", "numeric_verdict",
    "replay_verdict", "note", "build_s", "verify_s", "replay_s",
)
TIMING_COLUMNS = ("build_s", "verify_s", "replay_s")
CHECKS = ("none", "numeric", "replay", "both")


@dataclass
class SweepRow:
    construction: str
    dims: tuple[int, ...]
    cardinality: int | None
    lower_bound: int
    priors: dict[str, int | None]
    status: str
    numeric_verdict: str = ""
    replay_verdict: str = ""
    note: str = ""
    timings: dict[str, float] = field(default_factory=dict)

    def as_record(self) -> dict[str, str]:
        shifted = self.priors.get("prior_shifted")
        delta = "" if shifted is None or self.cardinality is None else str(shifted - self.cardinality)
        rec = {
            "construction": self.construction,
            "dims": "x".join(map(str, self.dims)),
            "cardinality": "" if self.cardinality is None else str(self.cardinality),
            "lower_bound": str(self.lower_bound),
            "delta_vs_shifted": delta,
            "status": self.status,
            "numeric_verdict": self.numeric_verdict,
            "replay_verdict": self.replay_verdict,
            "note": self.note,
        }
        for key, value in self.priors.items():
            rec[key] = "" if value is None else str(value)
        for key in TIMING_COLUMNS:
            rec[key] = f"{self.timings[key]:.3f}" if key in self.timings else ""
        return rec


def sweep_dims(family: str, lo: int, hi: int) -> list[tuple[int, ...]]:
    if lo < 2 or hi < lo:
        raise ValidationError(f"bad dimension range {lo}..{hi}")
    r = range(lo, hi + 1)
    if family in ("t1", "t3"):
        return [(d,) for d in r]
    arity = {"t2": 3, "t4": 4}.get(family)
    if arity is None:
        raise ValidationError(f"cannot sweep {family!r}; choose t1, t2, t3 or t4")
    return list(itertools.combinations_with_replacement(r, arity))


def _full_dims(family: str, params: tuple[int, ...]) -> tuple[int, ...]:
    if family == "t1":
        return params * 3
    if family == "t3":
        return params * 4
    return params


def sweep_row(family: str, params: tuple[int, ...], checks: str = "none",
              rel_tol: float = 1e-9, threads: int | None = None) -> SweepRow:
    if checks not in CHECKS:
        raise ValidationError(f"checks must be one of {CHECKS}")
    dims = _full_dims(family, params)
    priors = prior_cardinalities(dims)
    t0 = time.perf_counter()
    try:
        s = build(family, params)
    except ValidationError as exc:
        return SweepRow(family, dims, None, lower_bound(dims), priors, "skipped", note=str(exc))
    row = SweepRow(family, dims, len(s), lower_bound(dims), priors, "built",
                   note="; ".join(s.notes), timings={"build_s": time.perf_counter() - t0})
    if checks in ("numeric", "both"):
        t0 = time.perf_counter()
        row.numeric_verdict = verify_strongest(s, rel_tol, threads).verdict.value
        row.timings["verify_s"] = time.perf_counter() - t0
    if checks in ("replay", "both"):
        t0 = time.perf_counter()
        results = [replay(s, MeasuredSet.complement_of(p, s.n_parties)) for p in range(s.n_parties)]
        row.replay_verdict = overall(results).value
        row.timings["replay_s"] = time.perf_counter() - t0
    return row


def sweep(family: str, lo: int, hi: int, checks: str = "none", rel_tol: float = 1e-9,
          threads: int | None = None) -> list[SweepRow]:
    return [sweep_row(family, p, checks, rel_tol, threads) for p in sweep_dims(family, lo, hi)]


def sweep_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_HEADER, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_record())
    return buf.getvalue()


def plot_sweep(rows: Sequence[SweepRow], path: str | Path) -> None:
    built = [r for r in rows if r.cardinality is not None]
    if not built:
        raise ValidationError("no buildable rows to plot")
    xs = range(len(built))
    fig, ax = plt.subplots(figsize=(max(5.0, 0.5 * len(built) + 2), 3.8))
    ax.plot(xs, [r.cardinality for r in built], "o-", label="this construction")
    ax.plot(xs, [r.lower_bound for r in built], "k--", label="lower bound")
    for key, style in (("prior_shifted", "s:"), ("prior_complement", "^:"), ("prior_qutrit", "D")):
        ys = [r.priors.get(key) for r in built]
        if any(y is not None for y in ys):
            ax.plot(xs, [float("nan") if y is None else y for y in ys], style, label=key)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(["x".join(map(str, r.dims)) for r in built], rotation=45, fontsize=7)
    ax.set_ylabel("number of states")
    ax.set_yscale("log")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# -- verifier figures and benchmark --------------------------------------------

def plot_spectra(report: StrongestReport, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    for v in report.per_party:
        tail = [max(x, 1e-18) for x in v.singular_values]
        ax.semilogy(range(len(tail)), tail, "o-", label=f"measured {v.measured}: {v.verdict.value}")
    ax.set_xlabel("tail position (smallest last)")
    ax.set_ylabel("singular value")
    ax.set_title(f"{report.construction} {report.dims}")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def summary_lines(report: StrongestReport) -> list[str]:
    """Tab-delimited per-bipartition lines with a header."""
    out = ["measured\tn\tD\tnullspace_dim\thermitian_dim\tidentity_overlap\tspectral_gap\tverdict\twall_s"]
    for v in report.per_party:
        overlap = "" if v.identity_overlap is None else f"{v.identity_overlap:.12f}"
        out.append("\t".join([
            ",".join(map(str, v.measured)), str(v.n_states), str(v.dim), str(v.nullspace_dim),
            str(v.hermitian_nullspace_dim), overlap, f"{v.spectral_gap:.3e}", v.verdict.value,
            f"{v.wall_time:.3f}",
        ]))
    out.append(f"overall\t{report.n_states}\t\t\t\t\t\t{report.verdict.value}\t")
    return out


def bench(cases: Sequence[tuple[str, tuple[int, ...]]], rel_tol: float = 1e-9,
          replay_mode: Mode | str = Mode.FIXPOINT) -> list[dict]:
    """Wall time per (construction, complement) for assembly, decomposition and replay."""
    out = []
    for name, params in cases:
        t0 = time.perf_counter()
        s = build(name, params)
        built = time.perf_counter() - t0
        for p in range(s.n_parties):
            m = MeasuredSet.complement_of(p, s.n_parties)
            v = check_triviality(s, m, rel_tol)
            r = replay(s, m, replay_mode)
            out.append({
                "construction": name,
                "params": list(params),
                "dims": list(s.dims),
                "measured_parties": list(m.parties),
                "D": v.dim,
                "build_s": built,
                **{f"{k}_s": t for k, t in v.timings.items()},
                "replay_s": r.timings["replay"],
                "numeric_verdict": v.verdict.value,
                "replay_verdict": r.verdict.value,
            })
    return out


__all__ = [
    "grid_cells", "render_grid", "plot_grid", "prior_cardinalities", "SWEEP_HEADER", "SweepRow",
    "sweep_dims", "sweep_row", "sweep", "sweep_csv", "plot_sweep", "plot_spectra", "summary_lines",
    "bench", "Verdict", "ReplayVerdict",
]
