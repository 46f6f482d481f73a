"""HTTP review service for human curation queues.

Queues are jsonl files of candidate items; decisions append to one
jsonl log per queue and are fsynced before the request is acknowledged,
so a crash after the ack never loses a verdict. The append-only log
reduces to effective state by last-write-wins (per item, by timestamp);
a latest verdict of "skip" leaves the item undecided, so it reappears in
the queue and blocks assembly until resolved.

Multiple reviewers may work concurrently: reads take no lock and decision
writes serialize through a single appender lock.
"""
from __future__ import annotations

import json
import threading
import time
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import imaging
from .consolidate import QueueItem
from .manifest import (
    DecisionRecord,
    SchemaError,
    append_decision,
    content_digest,
    read_corpus,
    read_decisions,
    reduce_decisions,
)

EFFECTIVE_VERDICTS = ("accept", "reject")


def load_queue_file(path: str | Path) -> list[QueueItem]:
    items: list[QueueItem] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            items.append(
                QueueItem(
                    item_id=str(rec["item_id"]),
                    image_ref=str(rec.get("image_ref", "")),
                    label=str(rec.get("label", "")),
                    reason=str(rec.get("reason", "")),
                    thumbnail_ref=rec.get("thumbnail_ref"),
                )
            )
    return items


def write_queue_file(items: list[QueueItem], path: str | Path) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item.to_record(), ensure_ascii=False) + "\n")
    return len(items)


class ReviewStore:
    """Queues, decision logs, and the digest-addressed image index."""

    def __init__(
        self,
        queue_dir: str | Path,
        decisions_dir: str | Path,
        image_root: str | Path | None = None,
        corpus_path: str | Path | None = None,
        cache_dir: str | Path | None = None,
    ):
        self.queue_dir = Path(queue_dir)
        self.decisions_dir = Path(decisions_dir)
        self.decisions_dir.mkdir(parents=True, exist_ok=True)
        self.image_root = Path(image_root) if image_root else None
        self.cache_dir = Path(cache_dir) if cache_dir else self.decisions_dir / ".thumbs"
        self._lock = threading.Lock()
        self._queues: dict[str, list[QueueItem]] = {}
        for qfile in sorted(self.queue_dir.glob("*.jsonl")):
            self._queues[qfile.stem] = load_queue_file(qfile)
        self._digest_index: dict[str, Path] = {}
        if corpus_path:
            for inst in read_corpus(corpus_path, strict=False, errors=[]):
                if inst.image_digest and self.image_root:
                    self._digest_index[inst.image_digest] = (
                        self.image_root / inst.image_ref
                    )
        elif self.image_root and self.image_root.exists():
            for f in sorted(self.image_root.rglob("*")):
                if f.suffix.lower() in (".png", ".jpg", ".jpeg", ".pgm") and f.is_file():
                    self._digest_index[content_digest(f)] = f
        self._seen: dict[str, set[tuple]] = {}
        for qid in self._queues:
            self._seen[qid] = {
                (r.item_id, r.timestamp, r.reviewer, r.verdict)
                for r in self._read_log(qid)
            }

    def _log_path(self, queue_id: str) -> Path:
        return self.decisions_dir / f"{queue_id}.decisions.jsonl"

    def _read_log(self, queue_id: str) -> list[DecisionRecord]:
        path = self._log_path(queue_id)
        if not path.exists():
            return []
        return read_decisions(path)

    def queue_ids(self) -> list[str]:
        return sorted(self._queues)

    def items(self, queue_id: str) -> list[QueueItem]:
        if queue_id not in self._queues:
            raise KeyError(queue_id)
        return self._queues[queue_id]

    def effective(self, queue_id: str) -> dict[str, DecisionRecord]:
        return reduce_decisions(self._read_log(queue_id))

    def progress(self, queue_id: str) -> tuple[int, int]:
        """(decided, total): decided counts items whose latest verdict is
        accept or reject; skipped items remain undecided."""
        effective = self.effective(queue_id)
        decided = sum(
            1
            for item in self.items(queue_id)
            if item.item_id in effective
            and effective[item.item_id].verdict in EFFECTIVE_VERDICTS
        )
        return decided, len(self.items(queue_id))

    def undecided(self, queue_id: str) -> list[QueueItem]:
        effective = self.effective(queue_id)
        return [
            item
            for item in self.items(queue_id)
            if item.item_id not in effective
            or effective[item.item_id].verdict not in EFFECTIVE_VERDICTS
        ]

    def record(self, queue_id: str, decision: DecisionRecord) -> bool:
        """Append one decision, durably; returns False for an exact replay
        of an already-logged record (idempotent delivery)."""
        items = self.items(queue_id)
        if not any(item.item_id == decision.item_id for item in items):
            raise LookupError(decision.item_id)
        key = (decision.item_id, decision.timestamp, decision.reviewer, decision.verdict)
        with self._lock:
            if key in self._seen.setdefault(queue_id, set()):
                return False
            append_decision(decision, self._log_path(queue_id), fsync=True)
            self._seen[queue_id].add(key)
        return True

    def image_path(self, digest: str) -> Path:
        path = self._digest_index.get(digest)
        if path is None or not path.exists():
            raise KeyError(digest)
        return path

    def thumbnail(self, digest: str, width: int) -> Path:
        src = self.image_path(digest)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        cached = self.cache_dir / f"{digest}_{width}.png"
        if not cached.exists():
            img = imaging.read_image(src)
            scale = width / img.width
            height = max(1, round(img.height * scale))
            from PIL import Image

            arr = img.pixels[:, :, 0] if img.channels == 1 else img.pixels
            Image.fromarray(arr).resize((width, height)).save(cached, format="PNG")
        return cached


class DecisionIn(BaseModel):
    item_id: str
    verdict: str
    reviewer: str = ""
    timestamp: float | None = None


def create_app(store: ReviewStore, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="review-service")

    @app.get("/api/queues")
    def list_queues():
        out = []
        for qid in store.queue_ids():
            decided, total = store.progress(qid)
            out.append({"queue_id": qid, "decided": decided, "total": total})
        return out

    @app.get("/api/queues/{queue_id}")
    def get_queue(
        queue_id: str,
        page: int = Query(0, ge=0),
        size: int = Query(20, ge=1, le=500),
    ):
        try:
            pending = store.undecided(queue_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown queue {queue_id!r}")
        decided, total = store.progress(queue_id)
        window = pending[page * size : (page + 1) * size]
        return {
            "queue_id": queue_id,
            "page": page,
            "size": size,
            "items": [item.to_record() for item in window],
            "progress": {"decided": decided, "total": total},
        }

    @app.post("/api/queues/{queue_id}/decisions")
    def post_decision(queue_id: str, body: DecisionIn):
        try:
            record = DecisionRecord(
                item_id=body.item_id,
                verdict=body.verdict,
                reviewer=body.reviewer,
                timestamp=body.timestamp if body.timestamp is not None else time.time(),
            )
        except SchemaError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        try:
            appended = store.record(queue_id, record)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown queue {queue_id!r}")
        except LookupError:
            raise HTTPException(
                status_code=404,
                detail=f"item {body.item_id!r} not in queue {queue_id!r}",
            )
        decided, total = store.progress(queue_id)
        return {
            "ok": True,
            "appended": appended,
            "progress": {"decided": decided, "total": total},
        }

    @app.get("/api/queues/{queue_id}/export")
    def export_queue(queue_id: str):
        try:
            effective = store.effective(queue_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown queue {queue_id!r}")
        lines = []
        for item in store.items(queue_id):
            rec = effective.get(item.item_id)
            if rec is None:
                continue
            lines.append(
                json.dumps(
                    {
                        "item_id": rec.item_id,
                        "verdict": rec.verdict,
                        "reviewer": rec.reviewer,
                        "timestamp": rec.timestamp,
                    },
                    ensure_ascii=False,
                )
            )
        body = "\n".join(lines) + ("\n" if lines else "")
        return PlainTextResponse(body, media_type="application/x-ndjson")

    @app.get("/img/{digest}")
    def get_image(digest: str, w: int | None = Query(None, ge=8, le=2048)):
        try:
            path = store.thumbnail(digest, w) if w else store.image_path(digest)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown image {digest!r}")
        return FileResponse(path)

    if static_dir is not None and Path(static_dir).exists():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
