#!/usr/bin/env python3
"""Record live API responses from the fixture corpus into frontend/fixtures/.

Run from the repository root after changing the engine or the corpus:

    python3 scripts/record_api_fixtures.py
"""

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from webmap.config import EngineConfig  # noqa: E402
from webmap.pipeline import ingest  # noqa: E402
from webmap.service import create_app  # noqa: E402

CAPTURES = {
    "health.json": "/api/health",
    "map.json": "/api/map",
    "cluster_seismic.json": "/api/cluster/seismic",
    "cluster_earthquake.json": "/api/cluster/earthquake",
    "signpost_sw-method.json": "/api/doc/sw-method/signpost",
    "signpost_sw-field.json": "/api/doc/sw-field/signpost",
    "trace_sw-field.json": "/api/trace/sw-field?depth=5",
    "trace_sw-method.json": "/api/trace/sw-method?depth=5",
    "search_seismology.json": "/api/search?q=seismology",
}


def main() -> None:
    out_dir = ROOT / "frontend" / "fixtures"
    out_dir.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(prefix="webmap-fixtures-") as tmp:
        config = EngineConfig.load(ROOT / "tests" / "fixtures" / "webmap.json")
        config.data_dir = str(Path(tmp) / "data")
        ingest(config)
        client = TestClient(create_app(config.resolved_data_dir()))
        for filename, url in CAPTURES.items():
            response = client.get(url)
            response.raise_for_status()
            path = out_dir / filename
            path.write_text(
                json.dumps(response.json(), indent=2, ensure_ascii=False) + "\n"
            )
            print(f"wrote {path.relative_to(ROOT)}")
        error = client.get("/api/cluster/uncharted")
        assert error.status_code == 404
        (out_dir / "error_unknown_cluster.json").write_text(
            json.dumps(error.json(), indent=2, ensure_ascii=False) + "\n"
        )
        print("wrote frontend/fixtures/error_unknown_cluster.json")


if __name__ == "__main__":
    main()
