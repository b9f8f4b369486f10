import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from snlverify.constructions import build  # noqa: E402
from snlverify.tensor import MeasuredSet  # noqa: E402
from snlverify.verifier import check_triviality  # noqa: E402

# (construction, params) for every set named in the cardinality criterion
ACCEPTANCE_SETS = (
    [("t1", (d,)) for d in range(2, 7)]
    + [("t2", p) for p in [(2, 3, 3), (2, 3, 4), (3, 4, 4), (3, 4, 5)]]
    + [("ex1", ())]
    + [("t3", (d,)) for d in (2, 3, 4)]
    + [("t4", p) for p in [(2, 3, 3, 3), (2, 3, 3, 4), (2, 3, 4, 5)]]
)

CRITERIA: dict[str, tuple[bool, str]] = {}


@functools.lru_cache(maxsize=None)
def built(name, params):
    return build(name, params)


@functools.lru_cache(maxsize=None)
def numeric(name, params, party):
    s = built(name, params)
    return check_triviality(s, MeasuredSet.complement_of(party, s.n_parties))


def record_criterion(key: str, ok: bool, detail: str) -> None:
    line = f"CRITERION {key}: {'PASS' if ok else 'FAIL'}  {detail}"
    CRITERIA[key] = (ok, line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(CRITERIA, key=lambda k: (int(k.split()[0]), k)):
        terminalreporter.write_line(CRITERIA[key][1])


@pytest.fixture
def criterion():
    return record_criterion
