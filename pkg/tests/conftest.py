import pytest

from judgebench.kripke import build_model

_ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


_MODELS: dict = {}


def _model(key, *args, **kw):
    if key not in _MODELS:
        _MODELS[key] = build_model(*args, **kw)
    return _MODELS[key]


@pytest.fixture(scope="session")
def models():
    """Lazily built, shared protocol models."""

    class _Lazy:
        def __getitem__(self, name):
            table = {
                "mm": ("three_judges_mm", 1),
                "central3": ("centralised", 1),
                "central5": ("centralised", 2),
                "dcp3": ("dcp_sum", 1),
                "dcp5": ("dcp_sum", 2),
            }
            return _model(name, *table[name])

    return _Lazy()
