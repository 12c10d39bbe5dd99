import hashlib
import json
from pathlib import Path

import pytest

from webmap.config import EngineConfig
from webmap.overlay import ClusterRef, assert_overlay_invariants
from webmap.pipeline import ingest, load_state

from conftest import load_fixture_config, write_config


def tree_digest(root: Path) -> dict[str, str]:
    digest = {}
    for path in sorted(root.rglob("*")):
        if path.is_file():
            digest[str(path.relative_to(root))] = hashlib.sha256(
                path.read_bytes()
            ).hexdigest()
    return digest


class TestFixtureIngest:
    def test_report_counts(self, fixture_ingest):
        _, _, report = fixture_ingest
        assert report.docs_ingested == 12
        assert report.docs_failed == 0
        assert report.errors == []
        assert report.clusters_created >= 3
        assert report.cluster_links == 2

    def test_cluster_structure(self, fixture_ingest):
        config, data_dir, _ = fixture_ingest
        state = load_state(data_dir)
        clusters = {c.trc: c for c in state.overlay.all_clusters()}
        assert set(clusters) == {"earthquake", "seismic", "seismology"}
        assert clusters["earthquake"].links == {ClusterRef("seismic", "p1")}
        assert clusters["seismic"].links == {
            ClusterRef("earthquake", "p1"),
            ClusterRef("seismology", "p1"),
        }
        # the seismic cluster was created as a path intermediate on p1 and
        # later populated by p2's documents
        assert clusters["seismic"].peer_id == "p1"
        assert {d.owner_peer for d in clusters["seismic"].docs} == {"p2"}

    def test_every_document_attached_exactly_once(self, fixture_ingest):
        _, data_dir, _ = fixture_ingest
        state = load_state(data_dir)
        attached = [
            d.doc_id for c in state.overlay.all_clusters() for d in c.docs
        ]
        assert len(attached) == 12
        assert len(set(attached)) == 12
        all_docs = {
            doc_id
            for peer in state.overlay.peers.values()
            for doc_id in peer.documents
        }
        assert set(attached) == all_docs

    def test_global_invariants_after_reload(self, fixture_ingest):
        _, data_dir, _ = fixture_ingest
        state = load_state(data_dir)
        assert_overlay_invariants(state.overlay)

    def test_subclusters_partition_each_cluster(self, fixture_ingest):
        _, data_dir, _ = fixture_ingest
        state = load_state(data_dir)
        for cluster in state.overlay.all_clusters():
            covered = sorted(d for r in cluster.subclusters for d in r.doc_ids)
            assert covered == sorted(cluster.doc_ids())

    def test_doc_link_chain(self, fixture_ingest):
        _, data_dir, _ = fixture_ingest
        state = load_state(data_dir)
        assert state.trace("sw-field", 5) == ["sw-field", "sw-method", "sw-core"]
        assert state.trace("sw-method", 5) == ["sw-method", "sw-core"]

    def test_signposts_loaded_for_every_doc(self, fixture_ingest):
        _, data_dir, _ = fixture_ingest
        state = load_state(data_dir)
        assert len(state.signposts) == 12
        sample = state.signposts["sw-method"]
        assert sample["authorities"][0]["term"] == "seismic"
        terms = {e["term"] for e in sample["authorities"]}
        assert "survey" in terms

    def test_cluster_files_on_disk(self, fixture_ingest):
        _, data_dir, _ = fixture_ingest
        path = data_dir / "clusters" / "p1" / "earthquake.json"
        data = json.loads(path.read_text())
        assert list(data) == ["trc", "docs", "links", "subclusters"]
        assert data["trc"] == "earthquake"
        assert len(data["docs"]) == 4

    def test_deterministic_rerun_byte_identical(self, tmp_path):
        config = load_fixture_config(tmp_path / "data")
        ingest(config)
        first = tree_digest(tmp_path / "data")
        ingest(config)
        second = tree_digest(tmp_path / "data")
        assert first == second
        assert len(first) > 10


class TestIngestEdgeCases:
    def test_empty_corpus(self, tmp_path):
        path = write_config(
            tmp_path / "webmap.json",
            data_dir=str(tmp_path / "data"),
            peers=[{"peer_id": "p1", "corpus": []}],
        )
        report = ingest(EngineConfig.load(path))
        assert report.docs_ingested == 0
        assert report.clusters_created == 0
        assert report.errors == []
        entries = sorted(p.name for p in (tmp_path / "data").iterdir())
        assert entries == ["config.json"]

    def test_cross_peer_duplicate_id_recorded(self, tmp_path):
        corpus_a = tmp_path / "a.jsonl"
        corpus_b = tmp_path / "b.jsonl"
        corpus_a.write_text(
            json.dumps({"id": "same", "text": "alpha beta gamma."}) + "\n"
        )
        corpus_b.write_text(
            json.dumps({"id": "same", "text": "delta epsilon zeta."}) + "\n"
        )
        path = write_config(
            tmp_path / "webmap.json",
            data_dir=str(tmp_path / "data"),
            peers=[
                {"peer_id": "p1", "corpus": [str(corpus_a)]},
                {"peer_id": "p2", "corpus": [str(corpus_b)]},
            ],
        )
        report = ingest(EngineConfig.load(path))
        assert report.docs_ingested == 1
        assert report.docs_failed == 1
        assert any("already ingested" in e for e in report.errors)

    def test_bad_record_skipped_ingestion_continues(self, tmp_path):
        corpus = tmp_path / "docs.jsonl"
        corpus.write_text(
            "THIS IS NOT JSON\n"
            + json.dumps({"id": "ok", "text": "alpha beta gamma."}) + "\n"
        )
        path = write_config(
            tmp_path / "webmap.json",
            data_dir=str(tmp_path / "data"),
            peers=[{"peer_id": "p1", "corpus": [str(corpus)]}],
        )
        report = ingest(EngineConfig.load(path))
        assert report.docs_ingested == 1
        assert report.docs_failed == 1

    def test_refuses_to_clobber_foreign_directory(self, tmp_path):
        target = tmp_path / "data"
        target.mkdir()
        (target / "precious.txt").write_text("do not delete")
        path = write_config(
            tmp_path / "webmap.json",
            data_dir=str(target),
            peers=[{"peer_id": "p1", "corpus": []}],
        )
        from webmap.errors import ConfigError

        with pytest.raises(ConfigError, match="refusing"):
            ingest(EngineConfig.load(path))
        assert (target / "precious.txt").exists()

    def test_termless_document_recorded_as_failure(self, tmp_path):
        corpus = tmp_path / "docs.jsonl"
        corpus.write_text(
            json.dumps({"id": "stop", "text": "the and was."}) + "\n"
            + json.dumps({"id": "ok", "text": "alpha beta gamma."}) + "\n"
        )
        path = write_config(
            tmp_path / "webmap.json",
            data_dir=str(tmp_path / "data"),
            peers=[{"peer_id": "p1", "corpus": [str(corpus)]}],
        )
        report = ingest(EngineConfig.load(path))
        assert report.docs_ingested == 1
        assert report.docs_failed == 1
        assert any("stop" in e for e in report.errors)
