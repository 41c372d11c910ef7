import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from apd.generators import fibonacci_chain, thue_morse_ones, lattice
from apd.pointset import Box


@pytest.fixture(scope="session")
def tm8():
    """Thue-Morse 1-positions of the full 4^8-letter expansion."""
    return thue_morse_ones(8)


@pytest.fixture(scope="session")
def tm10():
    return thue_morse_ones(10)


@pytest.fixture(scope="session")
def fib19():
    """Fibonacci chain with 10946 tiles."""
    return fibonacci_chain(19)


@pytest.fixture(scope="session")
def z_chain():
    return lattice(1, 1.0, Box((0.0,), (4000.0,)), label="Z")
