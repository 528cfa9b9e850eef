from pathlib import Path

import pytest

from exitsim import load_model

MODEL_DIR = Path(__file__).resolve().parent.parent / "models"


@pytest.fixture(scope="session")
def sir_path():
    return MODEL_DIR / "sir.json"


@pytest.fixture(scope="session")
def sir(sir_path):
    """(system, initial, exit_condition) for the bundled epidemic model."""
    return load_model(sir_path)


@pytest.fixture(scope="session")
def sir_doc():
    return {
        "species": ["S", "I", "R"],
        "omega": 100,
        "reactions": [
            {"rate": 1.5, "reactants": {"S": 1, "I": 1}, "products": {"I": 2}},
            {"rate": 1.0, "reactants": {"I": 1}, "products": {"R": 1}},
        ],
        "initial": {"S": 95, "I": 5},
        "exit": {"species": "R", "op": ">=", "value": 85},
    }
