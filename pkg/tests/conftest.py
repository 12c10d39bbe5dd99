import json
from pathlib import Path

import pytest

from webmap.config import EngineConfig
from webmap.pipeline import ingest

FIXTURES = Path(__file__).parent / "fixtures"
FIXTURE_CONFIG = FIXTURES / "webmap.json"


def load_fixture_config(data_dir) -> EngineConfig:
    config = EngineConfig.load(FIXTURE_CONFIG)
    config.data_dir = str(data_dir)
    return config


@pytest.fixture(scope="session")
def fixture_ingest(tmp_path_factory):
    """One shared ingest of the 12-doc corpus for read-only tests."""
    data_dir = tmp_path_factory.mktemp("webmap-data") / "data"
    config = load_fixture_config(data_dir)
    report = ingest(config)
    return config, Path(config.resolved_data_dir()), report


def write_config(path: Path, **overrides) -> Path:
    """Minimal config file for one-off pipeline tests."""
    base = json.loads(FIXTURE_CONFIG.read_text())
    base.update(overrides)
    path.write_text(json.dumps(base, indent=2))
    return path
