from fractions import Fraction

import pytest

from liftcorr import kernels
from liftcorr.quantale import BoolQuantale, ChainQuantale, PowersetQuantale, UnitRationalQuantale

F = Fraction


@pytest.fixture(params=["bool", "chain2", "chain4", "powerset"])
def finite_q(request):
    return {"bool": BoolQuantale(), "chain2": ChainQuantale(2, 1), "chain4": ChainQuantale(4, 1),
            "powerset": PowersetQuantale(["c1", "c2"])}[request.param]


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request, monkeypatch):
    """Run the test against each importable kernel implementation."""
    impl = kernels.backends()[request.param]
    for name in ("enumerate_pseudometric_tables", "enumerate_morphism_tables", "is_pseudometric_table"):
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture
def unit():
    return UnitRationalQuantale(1)


# acceptance bookkeeping: each criterion passes only if all of its parts do

_CRITERIA = {}


@pytest.fixture
def criterion(request):
    def record(n, title, ok, detail=""):
        prev = _CRITERIA.get(n)
        parts = (prev[2] if prev else []) + [(request.node.name, ok, detail)]
        _CRITERIA[n] = (title, (prev[1] if prev else True) and ok, parts)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, parts = _CRITERIA[n]
        notes = "; ".join(d for _, _, d in parts if d)
        tr.write_line(f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{notes}]" if notes else ""))
