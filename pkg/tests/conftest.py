import numpy as np
import pytest

from wienerhopf.kernel import ConditionId, KernelSpec, Level, Term, verify_conditions

_CRITERIA: dict = {}


@pytest.fixture
def record_criterion():
    """Store a one-line verdict per acceptance criterion for the terminal summary."""

    def record(number: int, passed: bool, detail: str):
        _CRITERIA[number] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")


def random_admissible_kernels(count: int, seed: int = 20240611) -> list[KernelSpec]:
    """Exp-family K1 kernels drawn at random, kept only if both K1 conditions hold."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        pos = [Term(rng.uniform(0.2, 2.0), int(rng.integers(0, 3)), rng.uniform(0.5, 3.0))
               for _ in range(rng.integers(1, 4))]
        neg = [Term(rng.uniform(-2.0, 0.6), int(rng.integers(0, 3)), rng.uniform(0.5, 3.0))
               for _ in range(rng.integers(0, 3))]
        spec = KernelSpec(Level.K1, pos, neg)
        verdicts = {v.condition: v.holds for v in verify_conditions(spec)}
        if verdicts[ConditionId.SIGN] and verdicts[ConditionId.POSITIVITY]:
            out.append(spec)
    return out


@pytest.fixture(scope="session")
def admissible_kernels():
    return random_admissible_kernels(10)
