from pathlib import Path

import pytest

from flatvirtual.diagram import load_diagram

FIXTURES = Path(__file__).parent / "fixtures"
W_STRING = "-a^-10 - a^-6 + a^-6*b^2 - a^-2*b^2"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def w_diagram():
    return load_diagram(FIXTURES / "whitehead_W.diagram")
