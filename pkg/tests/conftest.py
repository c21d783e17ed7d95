from pathlib import Path

import pytest

from fdes import load_model

MODELS_DIR = Path(__file__).resolve().parent.parent / "models"


@pytest.fixture(scope="session")
def models_dir() -> Path:
    return MODELS_DIR


@pytest.fixture(scope="session")
def ex1():
    return load_model(MODELS_DIR / "example1.json")


@pytest.fixture(scope="session")
def ex2():
    return load_model(MODELS_DIR / "example2.json")


@pytest.fixture(scope="session")
def ex3():
    return load_model(MODELS_DIR / "example3.json")


@pytest.fixture(scope="session")
def ex4():
    return load_model(MODELS_DIR / "example4.json")
