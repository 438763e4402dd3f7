from pathlib import Path

import pytest

from envforge.config.validate import validate_environment_file

REPO_ROOT = Path(__file__).resolve().parent.parent
CONFIG_DIR = REPO_ROOT / "configs"
DATA_DIR = Path(__file__).resolve().parent / "data"


def load_env_config(path):
    config, report = validate_environment_file(path)
    assert config is not None, f"{path} failed validation:\n{report}"
    return config


@pytest.fixture(scope="session")
def docking_env_path():
    return CONFIG_DIR / "docking" / "environment.yml"


@pytest.fixture(scope="session")
def docking_short_env_path():
    return CONFIG_DIR / "docking" / "environment_short.yml"


@pytest.fixture(scope="session")
def cartpole_env_path():
    return CONFIG_DIR / "cartpole" / "environment.yml"


@pytest.fixture()
def docking_config(docking_env_path):
    return load_env_config(docking_env_path)


@pytest.fixture()
def docking_short_config(docking_short_env_path):
    return load_env_config(docking_short_env_path)


@pytest.fixture()
def cartpole_config(cartpole_env_path):
    return load_env_config(cartpole_env_path)
