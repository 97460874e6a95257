"""HTTP annotation backend tests: routing, validation, durability, concurrency."""

import json
import subprocess
import sys
import threading
import urllib.error
import urllib.request

import pytest

from finetype.corpus import Document, Mention, Token
from finetype.service import AnnotationStore, load_annotation_records, make_server
from finetype.taxonomy import Taxonomy

TAX = Taxonomy([
    "person/artist/actor",
    "person/athlete",
    "organization/company",
    "other",
])


def tiny_docs():
    def doc(doc_id, split):
        tokens = tuple(Token(text=w) for w in ("Alice", "joined", "Acme", "."))
        mentions = (
            Mention(id="m0", sentence=0, start=0, end=1, head=0),
            Mention(id="m1", sentence=0, start=2, end=3, head=2),
        )
        return Document(id=doc_id, split=split, sentences=(tokens,),
                        mentions=mentions)
    return [doc("d1", "train"), doc("d2", "dev")]


@pytest.fixture()
def server(tmp_path):
    srv, store = make_server(
        tiny_docs(), TAX, port=0, store_path=str(tmp_path / "store.jsonl"))
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    host, port = srv.server_address[:2]
    yield f"http://{host}:{port}", store
    srv.shutdown()
    srv.server_close()
    store.close()


def get(base, path):
    try:
        with urllib.request.urlopen(base + path) as response:
            return response.status, json.loads(response.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


def post(base, obj, raw=None):
    data = raw if raw is not None else json.dumps(obj).encode()
    req = urllib.request.Request(
        base + "/api/annotations", data=data,
        headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as response:
            return response.status, json.loads(response.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


class TestReadEndpoints:
    def test_taxonomy(self, server):
        base, _ = server
        status, payload = get(base, "/api/taxonomy")
        assert status == 200
        names = [l["name"] for l in payload["labels"]]
        assert "person/artist/actor" in names
        by_name = {l["name"]: l for l in payload["labels"]}
        assert by_name["person/artist"]["parent"] == "person"
        assert by_name["person"]["parent"] is None
        assert by_name["person/artist/actor"]["depth"] == 3

    def test_document_listing_and_fetch(self, server):
        base, _ = server
        status, listing = get(base, "/api/documents")
        assert status == 200
        assert [d["id"] for d in listing["documents"]] == ["d1", "d2"]
        status, doc = get(base, "/api/documents/d2")
        assert status == 200
        assert doc["id"] == "d2"
        assert len(doc["mentions"]) == 2
        assert doc["sentences"][0][0]["text"] == "Alice"

    def test_missing_document_404(self, server):
        base, _ = server
        status, err = get(base, "/api/documents/zzz")
        assert status == 404
        assert "zzz" in err["error"]

    def test_unknown_endpoint_404(self, server):
        base, _ = server
        assert get(base, "/api/nope")[0] == 404

    def test_static_index_served(self, server):
        base, _ = server
        with urllib.request.urlopen(base + "/") as response:
            assert response.status == 200
            assert "text/html" in response.headers["Content-Type"]


class TestAnnotationWrites:
    def test_post_then_consensus_round_trip(self, server):
        base, _ = server
        assert post(base, {"annotator": "u1", "document": "d1",
                           "mention": "m0", "labels": ["person/artist/actor"]})[0] == 201
        assert post(base, {"annotator": "u2", "document": "d1",
                           "mention": "m0", "labels": ["person/artist"]})[0] == 201
        status, payload = get(base, "/api/consensus/d1?min_support=2")
        assert status == 200
        assert payload["mentions"] == {"m0": ["person", "person/artist"]}

    def test_min_support_one_unions_everything(self, server):
        base, _ = server
        post(base, {"annotator": "u1", "document": "d1", "mention": "m0",
                    "labels": ["other"]})
        status, payload = get(base, "/api/consensus/d1?min_support=1")
        assert status == 200
        assert payload["mentions"]["m0"] == ["other"]

    def test_last_write_wins_per_annotator(self, server):
        base, _ = server
        post(base, {"annotator": "u1", "document": "d1", "mention": "m0",
                    "labels": ["other"]})
        post(base, {"annotator": "u1", "document": "d1", "mention": "m0",
                    "labels": ["organization/company"]})
        status, payload = get(base, "/api/consensus/d1?min_support=1")
        assert payload["mentions"]["m0"] == ["organization", "organization/company"]

    def test_progress(self, server):
        base, _ = server
        post(base, {"annotator": "u1", "document": "d1", "mention": "m0",
                    "labels": ["other"]})
        post(base, {"annotator": "u1", "document": "d2", "mention": "m1",
                    "labels": []})
        status, payload = get(base, "/api/progress/u1")
        assert status == 200
        assert payload["annotated_mentions"] == 2
        assert payload["total_mentions"] == 4
        assert payload["documents"] == {"d1": ["m0"], "d2": ["m1"]}

    def test_validation_rejections(self, server):
        base, _ = server
        cases = [
            {"document": "d1", "mention": "m0", "labels": ["other"]},
            {"annotator": "u", "document": "zzz", "mention": "m0", "labels": []},
            {"annotator": "u", "document": "d1", "mention": "zz", "labels": []},
            {"annotator": "u", "document": "d1", "mention": "m0",
             "labels": ["not/a/label"]},
            {"annotator": "", "document": "d1", "mention": "m0", "labels": []},
        ]
        for case in cases:
            status, err = post(base, case)
            assert status == 400, case
            assert "error" in err
        assert post(base, None, raw=b"{nonsense")[0] == 400
        assert post(base, None, raw=b"[1,2]")[0] == 400

    def test_bad_min_support_400(self, server):
        base, _ = server
        assert get(base, "/api/consensus/d1?min_support=abc")[0] == 400
        assert get(base, "/api/consensus/d1?min_support=0")[0] == 400


class TestDurability:
    def test_acknowledged_writes_hit_disk(self, server, tmp_path):
        base, store = server
        post(base, {"annotator": "u1", "document": "d1", "mention": "m0",
                    "labels": ["other"]})
        on_disk = load_annotation_records(store.path)
        assert len(on_disk) == 1
        assert on_disk[0].annotator == "u1"
        assert on_disk[0].labels == frozenset({"other"})

    def test_restart_preserves_state(self, tmp_path):
        path = str(tmp_path / "store.jsonl")
        first = AnnotationStore(path)
        from finetype.agreement import AnnotationRecord
        first.append(AnnotationRecord("u1", "d1", "m0", frozenset({"other"})))
        first.append(AnnotationRecord("u2", "d1", "m0", frozenset({"person"})))
        first.close()
        second = AnnotationStore(path)
        assert len(second.records()) == 2
        second.close()

    def test_concurrent_posts_all_persist(self, server):
        base, store = server
        errors = []

        def annotator(name):
            for i in range(10):
                status, _ = post(base, {
                    "annotator": name, "document": "d1", "mention": "m0",
                    "labels": ["person/athlete"]})
                if status != 201:
                    errors.append((name, i, status))

        threads = [threading.Thread(target=annotator, args=(f"u{k}",))
                   for k in range(6)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        assert len(store.records()) == 60
        assert len(load_annotation_records(store.path)) == 60


class TestStorePathResolution:
    def test_env_variable_wins(self, tmp_path, monkeypatch):
        env_path = tmp_path / "env_store.jsonl"
        monkeypatch.setenv("FINETYPE_STORE", str(env_path))
        srv, store = make_server(
            tiny_docs(), TAX, port=0, store_path=str(tmp_path / "flag.jsonl"))
        try:
            assert store.path == str(env_path)
        finally:
            srv.server_close()
            store.close()


class TestServeSubprocess:
    def test_cli_serve_banner_and_api(self, tmp_path):
        from finetype.synthetic import generate, write_corpus_files
        corpus = generate(seed=5, n_train_docs=2, n_dev_docs=1, n_test_docs=1,
                          n_coarse_docs=1, mentions_per_doc=3)
        write_corpus_files(corpus, str(tmp_path))
        proc = subprocess.Popen(
            [sys.executable, "-m", "finetype", "serve",
             "--corpus", "corpus.jsonl", "--taxonomy", "taxonomy.txt",
             "--port", "0", "--store", "store.jsonl"],
            cwd=tmp_path, stdout=subprocess.PIPE, text=True)
        try:
            banner = proc.stdout.readline().strip()
            assert banner.startswith("serving on http://")
            base = banner.split()[-1]
            status, payload = get(base, "/api/documents")
            assert status == 200
            assert len(payload["documents"]) == 4
        finally:
            proc.terminate()
            proc.wait(timeout=10)
