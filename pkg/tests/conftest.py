import pytest

from elicitsim import dataset

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, ok, detail)``."""
    def record(number, ok, detail=""):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def matrix_from_dense(R):
    """SparseRatingMatrix with user/item indices as ids; 0 means missing."""
    return dataset.SparseRatingMatrix(
        (u, i, r) for u, row in enumerate(R) for i, r in enumerate(row) if r > 0)


@pytest.fixture
def planted_split():
    triples, Q = dataset.synthetic_ratings(50, 200, rank=3, density=0.8, seed=3)
    return dataset.split(triples, 1, 10, seed=3), dataset.synthetic_features(Q, seed=3)
