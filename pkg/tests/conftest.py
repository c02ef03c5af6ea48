import sys
from pathlib import Path

import pytest

from gazefuse import _backend

sys.path.insert(0, str(Path(__file__).parent))

BACKENDS = [pytest.param(_backend.pykernels, id="python")]
if _backend.ckernels is not None:
    BACKENDS.append(pytest.param(_backend.ckernels, id="cython"))


@pytest.fixture(params=BACKENDS)
def kern(request):
    return request.param


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Route the library's kernel calls through one backend."""
    from gazefuse import events, fusion

    monkeypatch.setattr(fusion, "kernels", request.param)
    monkeypatch.setattr(events, "kernels", request.param)
    return request.param


DATA = Path(__file__).parent / "data"


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
