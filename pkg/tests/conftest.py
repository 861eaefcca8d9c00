import sys
from pathlib import Path

import pytest

from numerovcn import kernels

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the jitted kernels once so timed tests measure algorithm time."""
    kernels.warm_up()
