"""Annotation backend: a small HTTP service over a durable label store.

The store is an append-only JSON-lines file. Every acknowledged write has
already been flushed and fsynced, so a crash after the acknowledgement
cannot lose it. Replaying the file from the top reproduces the state:
later records from the same annotator for the same mention win.

The HTTP layer serves the corpus and taxonomy read-only, accepts
annotation posts, and answers consensus and progress queries. Static
interface files packaged under ``finetype/ui`` are served at the root.
"""

from __future__ import annotations

import json
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from typing import Iterable, Mapping
from urllib.parse import parse_qs, urlparse

from .agreement import AnnotationRecord, consensus_sets, latest_annotations
from .corpus import Document, document_to_obj
from .errors import StoreError
from .taxonomy import Taxonomy

CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}


def record_to_obj(record: AnnotationRecord) -> dict:
    return {
        "annotator": record.annotator,
        "document": record.document,
        "mention": record.mention,
        "labels": sorted(record.labels),
    }


def record_from_obj(obj: Mapping, where: str) -> AnnotationRecord:
    for key in ("annotator", "document", "mention", "labels"):
        if key not in obj:
            raise StoreError(f"{where}: missing field {key!r}")
    annotator = str(obj["annotator"])
    if not annotator:
        raise StoreError(f"{where}: empty annotator id")
    labels = obj["labels"]
    if not isinstance(labels, (list, tuple)):
        raise StoreError(f"{where}: labels must be a list")
    return AnnotationRecord(
        annotator=annotator,
        document=str(obj["document"]),
        mention=str(obj["mention"]),
        labels=frozenset(str(l) for l in labels),
    )


def load_annotation_records(path: str) -> list[AnnotationRecord]:
    """Read a store file in append order. A missing file is an empty store."""
    records: list[AnnotationRecord] = []
    if not os.path.exists(path):
        return records
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StoreError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            records.append(record_from_obj(obj, f"{path}:{lineno}"))
    return records


class AnnotationStore:
    """Append-only record log with write-through durability.

    All writes go through one lock; the file handle is opened in append
    mode once and kept. Readers get snapshot copies of the record list,
    never live references.
    """

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._records = load_annotation_records(path)
        self._handle = open(path, "a", encoding="utf-8")

    def append(self, record: AnnotationRecord) -> None:
        line = json.dumps(record_to_obj(record), sort_keys=True)
        with self._lock:
            self._handle.write(line + "\n")
            self._handle.flush()
            os.fsync(self._handle.fileno())
            self._records.append(record)

    def records(self) -> list[AnnotationRecord]:
        with self._lock:
            return list(self._records)

    def close(self) -> None:
        with self._lock:
            self._handle.close()


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _make_handler(
    docs: Iterable[Document], tax: Taxonomy, store: AnnotationStore
):
    doc_list = list(docs)
    doc_by_id = {d.id: d for d in doc_list}
    taxonomy_payload = {
        "labels": [
            {
                "name": label.name,
                "depth": label.depth,
                "parent": label.parent_name,
            }
            for label in tax.labels
        ]
    }
    index_listing = {
        "documents": [
            {"id": d.id, "split": d.split, "mentions": len(d.mentions)}
            for d in doc_list
        ]
    }
    ui_root = resources.files("finetype").joinpath("ui")

    class Handler(BaseHTTPRequestHandler):
        server_version = "finetype"
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            pass  # keep test output clean; errors surface via status codes

        def _send_json(self, payload, status: int = 200) -> None:
            body = (json.dumps(payload, sort_keys=True) + "\n").encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _send_error_json(self, status: int, message: str) -> None:
            self._send_json({"error": message}, status=status)

        def _serve_static(self, path: str) -> None:
            name = path.lstrip("/") or "index.html"
            if "/" in name or name.startswith("."):
                self._send_error_json(404, "not found")
                return
            target = ui_root.joinpath(name)
            if not target.is_file():
                self._send_error_json(404, "not found")
                return
            body = target.read_bytes()
            ext = os.path.splitext(name)[1]
            self.send_response(200)
            self.send_header(
                "Content-Type", CONTENT_TYPES.get(ext, "application/octet-stream")
            )
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self) -> None:
            try:
                self._route_get()
            except ApiError as exc:
                self._send_error_json(exc.status, str(exc))

        def _route_get(self) -> None:
            url = urlparse(self.path)
            parts = [p for p in url.path.split("/") if p]
            if not parts or parts[0] != "api":
                self._serve_static(url.path)
                return
            if parts[1:] == ["taxonomy"]:
                self._send_json(taxonomy_payload)
            elif parts[1:] == ["documents"]:
                self._send_json(index_listing)
            elif len(parts) == 3 and parts[1] == "documents":
                doc = doc_by_id.get(parts[2])
                if doc is None:
                    raise ApiError(404, f"no document {parts[2]!r}")
                self._send_json(document_to_obj(doc))
            elif len(parts) == 3 and parts[1] == "consensus":
                if parts[2] not in doc_by_id:
                    raise ApiError(404, f"no document {parts[2]!r}")
                self._send_json(self._consensus(parts[2], url.query))
            elif len(parts) == 3 and parts[1] == "progress":
                self._send_json(self._progress(parts[2]))
            else:
                raise ApiError(404, "unknown endpoint")

        def _consensus(self, doc_id: str, query: str) -> dict:
            params = parse_qs(query)
            raw = params.get("min_support", ["2"])[0]
            try:
                min_support = int(raw)
            except ValueError:
                raise ApiError(400, f"min_support must be an integer, got {raw!r}")
            if min_support < 1:
                raise ApiError(400, "min_support must be at least 1")
            consensus = consensus_sets(store.records(), tax, min_support)
            mentions = {
                mention: sorted(labels)
                for (document, mention), labels in consensus.items()
                if document == doc_id
            }
            return {
                "document": doc_id,
                "min_support": min_support,
                "mentions": mentions,
            }

        def _progress(self, annotator: str) -> dict:
            latest = latest_annotations(store.records(), tax)
            done: dict[str, list[str]] = {}
            for (document, mention), by_annotator in sorted(latest.items()):
                if annotator in by_annotator:
                    done.setdefault(document, []).append(mention)
            total_mentions = sum(len(d.mentions) for d in doc_list)
            annotated = sum(len(v) for v in done.values())
            return {
                "annotator": annotator,
                "documents": done,
                "annotated_mentions": annotated,
                "total_mentions": total_mentions,
            }

        def do_POST(self) -> None:
            try:
                self._route_post()
            except ApiError as exc:
                self._send_error_json(exc.status, str(exc))

        def _route_post(self) -> None:
            url = urlparse(self.path)
            parts = [p for p in url.path.split("/") if p]
            if parts != ["api", "annotations"]:
                raise ApiError(404, "unknown endpoint")
            try:
                length = int(self.headers.get("Content-Length", "0"))
            except ValueError:
                raise ApiError(400, "bad Content-Length")
            body = self.rfile.read(length)
            try:
                obj = json.loads(body)
            except json.JSONDecodeError as exc:
                raise ApiError(400, f"invalid JSON: {exc}")
            if not isinstance(obj, dict):
                raise ApiError(400, "annotation must be a JSON object")
            try:
                record = record_from_obj(obj, "annotation")
            except StoreError as exc:
                raise ApiError(400, str(exc))
            doc = doc_by_id.get(record.document)
            if doc is None:
                raise ApiError(400, f"no document {record.document!r}")
            if all(m.id != record.mention for m in doc.mentions):
                raise ApiError(
                    400, f"document {record.document!r} has no mention "
                    f"{record.mention!r}"
                )
            unknown = [l for l in record.labels if l not in tax]
            if unknown:
                raise ApiError(400, f"unknown labels: {sorted(unknown)}")
            store.append(record)
            self._send_json({"status": "stored"}, status=201)

    return Handler


def make_server(
    docs: Iterable[Document],
    tax: Taxonomy,
    host: str = "127.0.0.1",
    port: int = 0,
    store_path: str = "annotations.jsonl",
) -> tuple[ThreadingHTTPServer, AnnotationStore]:
    """Build a ready-to-run server; caller owns serve_forever and shutdown."""
    path = os.environ.get("FINETYPE_STORE") or store_path
    store = AnnotationStore(path)
    handler = _make_handler(docs, tax, store)
    server = ThreadingHTTPServer((host, port), handler)
    return server, store


def run_server(
    docs: Iterable[Document],
    tax: Taxonomy,
    host: str = "127.0.0.1",
    port: int = 8710,
    store_path: str = "annotations.jsonl",
) -> int:
    server, store = make_server(docs, tax, host=host, port=port, store_path=store_path)
    actual_host, actual_port = server.server_address[:2]
    print(f"serving on http://{actual_host}:{actual_port}", flush=True)
    print(f"annotation store: {store.path}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        store.close()
    return 0
