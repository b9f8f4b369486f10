import csv
import io

import pytest

from snlverify.constructions import build_example1, build_theorem1, product_basis
from snlverify.errors import ValidationError
from snlverify.report import (
    SWEEP_HEADER, bench, grid_cells, plot_grid, plot_spectra, plot_sweep, prior_cardinalities,
    render_grid, summary_lines, sweep, sweep_csv, sweep_dims, sweep_row,
)
from snlverify.verifier import verify_strongest


def test_grid_shape_and_coverage():
    s = build_theorem1(3)
    cells = grid_cells(s)
    assert len(cells) == 3 and all(len(r) == 9 for r in cells)
    filled = [x for r in cells for x in r if x is not None]
    assert len(filled) == sum(len(k) for k in s.alpha_kets)
    text = render_grid(s)
    assert "origin" in text and "B5(" in text
    with pytest.raises(ValidationError):
        grid_cells(product_basis((2, 2)))


def test_example1_grid():
    cells = grid_cells(build_example1())
    assert len(cells) == 3 and len(cells[0]) == 27
    assert cells[0][2] == cells[1][1 * 9 + 1 * 3] == 11


@pytest.mark.parametrize("dims,expected", [
    ((3, 3, 3), {"prior_complement": 19, "prior_qutrit": 18, "prior_shifted": 11, "prior_stopper": 10}),
    ((2, 3, 4), {"prior_complement": 18, "prior_qutrit": None, "prior_shifted": 13, "prior_stopper": 13}),
    ((3, 3, 3, 3), {"prior_complement": 65, "prior_qutrit": 54, "prior_shifted": 29, "prior_stopper": None}),
])
def test_prior_cardinalities(dims, expected):
    assert prior_cardinalities(dims) == expected


def test_sweep_dims():
    assert sweep_dims("t1", 2, 4) == [(2,), (3,), (4,)]
    assert len(sweep_dims("t2", 2, 3)) == 4
    with pytest.raises(ValidationError):
        sweep_dims("ex1", 2, 3)
    with pytest.raises(ValidationError):
        sweep_dims("t1", 1, 3)


def test_sweep_rows_and_csv():
    rows = sweep("t2", 2, 3)
    rec = {r.dims: r for r in rows}
    assert rec[(2, 2, 3)].status == "skipped" and "2" in rec[(2, 2, 3)].note
    assert rec[(2, 3, 3)].cardinality == 10 == rec[(2, 3, 3)].lower_bound
    parsed = list(csv.DictReader(io.StringIO(sweep_csv(rows))))
    assert tuple(parsed[0]) == SWEEP_HEADER
    assert len(parsed) == len(rows)


def test_sweep_symmetric_four_party_delta():
    rows = sweep("t3", 2, 4)
    assert [int(r.as_record()["delta_vs_shifted"]) for r in rows] == [0, 1, 2]


def test_sweep_checks():
    row = sweep_row("t1", (2,), "both")
    assert row.numeric_verdict == "Trivial" and row.replay_verdict == "ProvedTrivial"
    assert set(row.timings) == {"build_s", "verify_s", "replay_s"}
    with pytest.raises(ValidationError):
        sweep_row("t1", (2,), "all")


def test_summary_and_bench():
    rep = verify_strongest(build_theorem1(2))
    lines = summary_lines(rep)
    assert lines[0].startswith("measured\t") and lines[-1].startswith("overall")
    assert len(lines) == 5
    rows = bench([("t1", (2,))])
    assert len(rows) == 3 and all(r["replay_verdict"] == "ProvedTrivial" for r in rows)


def test_figures(tmp_path):
    plot_grid(build_theorem1(3), tmp_path / "grid.png")
    plot_spectra(verify_strongest(build_theorem1(2)), tmp_path / "spec.png")
    plot_sweep(sweep("t1", 2, 3), tmp_path / "sweep.png")
    for name in ("grid.png", "spec.png", "sweep.png"):
        assert (tmp_path / name).stat().st_size > 1000
    with pytest.raises(ValidationError):
        plot_sweep([sweep_row("t2", (2, 2, 3))], tmp_path / "none.png")
