import math

import pytest

from radshoot import BaseModel, SolverControls, compile_nonlinearity, find_alpha_star

# AC number -> list of (part, passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def record(ac: int, part: str, passed: bool, detail: str = ""):
    ACCEPTANCE.setdefault(ac, []).append((part, bool(passed), detail))
    print(f"{'PASS' if passed else 'FAIL'} AC{ac} {part}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for ac in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[ac]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name}: {'ok' if good else 'FAILED'} ({d})"
                           for name, good, d in parts)
        tr.write_line(f"{'PASS' if ok else 'FAIL'} AC{ac} {detail}")


@pytest.fixture(scope="session")
def base22():
    return BaseModel(2.0, 4)


@pytest.fixture(scope="session")
def nl22(base22):
    return compile_nonlinearity(base22)


@pytest.fixture(scope="session")
def controls():
    return SolverControls()


@pytest.fixture(scope="session")
def star_bracket(nl22):
    return find_alpha_star(nl22, tol=1e-10)


@pytest.fixture(scope="session")
def alpha_star(star_bracket):
    return star_bracket.midpoint


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def is_close(a, b, rel):
    return math.isclose(a, b, rel_tol=rel, abs_tol=0.0)
