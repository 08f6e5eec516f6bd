import pytest

from qushadow import verify


@pytest.fixture(scope="session")
def ghz_workload():
    """Shared 4-config GHZ estimation workload (100 runs of 10^4 shots each)."""
    return verify.ghz_workload()
