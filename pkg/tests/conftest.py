import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIO_DIR = REPO_ROOT / "scenarios"

# Makes vcd_reader importable from test modules regardless of rootdir.
sys.path.insert(0, str(Path(__file__).resolve().parent))


@pytest.fixture
def scenario_dir():
    return SCENARIO_DIR
