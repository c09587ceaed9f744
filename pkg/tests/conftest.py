import pytest

from qharmony.generator import Pipeline, sample_block
from qharmony.rng import make_rng

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def record_criterion(name: str, ok: bool, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip()
    print(line)
    _ACCEPTANCE.append((name, ok, detail))


@pytest.fixture(scope="session")
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())


@pytest.fixture(scope="session")
def pipeline():
    return Pipeline.default()


@pytest.fixture(scope="session")
def joint(pipeline):
    return pipeline.joint()


@pytest.fixture(scope="session")
def samples_500k(pipeline, joint):
    return sample_block(joint, make_rng(20240611, "tests", "500k"), 500_000, pipeline.pairs)
