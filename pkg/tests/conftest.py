import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import synthetic  # noqa: E402


def pytest_addoption(parser):
    parser.addoption(
        "--pheme-root",
        default=os.environ.get("PHEME_ROOT", ""),
        help="root of the PHEME rumour/non-rumour release (folder holding the five event folders)",
    )


@pytest.fixture(scope="session")
def pheme_root(request):
    return request.config.getoption("--pheme-root")


@pytest.fixture(scope="session")
def small_ds():
    return synthetic.make_dataset(0)


@pytest.fixture
def pheme_dir(tmp_path, small_ds):
    return synthetic.write_pheme(small_ds, tmp_path / "pheme")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod and mod.VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.VERDICTS:
            terminalreporter.write_line(line)
