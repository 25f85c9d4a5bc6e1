import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sipl.prime_engine import build_table  # noqa: E402


@pytest.fixture(scope="session")
def small_table():
    return build_table(1, 200_000)
