import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from core.model import OscillatorModel, quartic_model  # noqa: E402


@pytest.fixture
def quartic():
    """U = q⁴/24 with m = ω = ħ = 1."""
    return quartic_model()


@pytest.fixture
def harmonic():
    return OscillatorModel()
