"""Review backend: serve flagged scenes over HTTP and persist verdicts.

Endpoints: ``GET /scenes`` (filters + paging, ordered by descending
contradiction count), ``GET /scenes/{frame}``, ``GET
/scenes/{frame}/image``, ``POST /verdicts``, ``GET /export/queries``.
Payloads use the attribute-value wire format; the verdict store is an
append-only line-record log replayed on startup.
"""

from __future__ import annotations

import json
import struct
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Dict, List, Optional
from urllib.parse import parse_qs, urlparse

import numpy as np

from . import io
from .classes import SemanticClassTable, semantickitti_table
from .errors import InvalidVerdict, UnknownCluster, UnknownFrame
from .labels import CATEGORY_NAMES, INVALID_CATEGORY, DiscrepancyCategory
from .wire import decode_payload, encode_payload

VERDICTS = ("sv_failure", "ssv_failure", "both_failed", "false_alarm", "unsure")
EXPORT_VERDICTS = ("sv_failure", "both_failed")

_FALLBACK_PAGE = """<!doctype html>
<meta charset="utf-8">
<title>motioncheck review</title>
<body style="font-family: sans-serif; max-width: 40em; margin: 3em auto;">
<h1>motioncheck review backend</h1>
<p>The browser console is not built. Endpoints are live:</p>
<ul>
<li><a href="/scenes">GET /scenes</a></li>
<li>GET /scenes/{frame}</li>
<li>GET /scenes/{frame}/image</li>
<li>POST /verdicts</li>
<li><a href="/export/queries">GET /export/queries</a></li>
</ul>
<p>Build the console with <code>npm run build</code> in frontend/ and
restart with <code>--ui-dir frontend/dist</code>.</p>
</body>
"""


class VerdictStore:
    """Append-only verdict log: one JSON record per line, replayed on load."""

    def __init__(self, log_path):
        self.log_path = Path(log_path)
        self._lock = threading.Lock()
        self.records: List[Dict] = []
        if self.log_path.exists():
            for line in self.log_path.read_text().splitlines():
                if line.strip():
                    self.records.append(json.loads(line))

    def append(
        self,
        frame_id: str,
        cluster_id: int,
        verdict: str,
        tags: List[str],
        reviewer: str,
    ) -> Dict:
        if verdict not in VERDICTS:
            raise InvalidVerdict(f"verdict {verdict!r} not in {VERDICTS}")
        with self._lock:
            record = {
                "id": len(self.records) + 1,
                "frame_id": frame_id,
                "cluster_id": int(cluster_id),
                "verdict": verdict,
                "tags": list(tags),
                "reviewer": reviewer,
                "timestamp": time.time(),
            }
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.log_path, "a") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
                fh.flush()
            self.records.append(record)
            return record

    def by_id(self, record_id: int) -> Optional[Dict]:
        for r in self.records:
            if r["id"] == record_id:
                return r
        return None

    def frames_reviewed(self) -> set:
        return {r["frame_id"] for r in self.records}

    def export_frames(self) -> List[Dict]:
        """Frames with at least one failure verdict, deduplicated."""
        picked: Dict[str, Dict] = {}
        for r in self.records:
            if r["verdict"] not in EXPORT_VERDICTS:
                continue
            entry = picked.setdefault(
                r["frame_id"], {"frame_id": r["frame_id"], "verdicts": set(), "tags": set()}
            )
            entry["verdicts"].add(r["verdict"])
            entry["tags"].update(r["tags"])
        return [
            {
                "frame_id": fid,
                "verdicts": ",".join(sorted(picked[fid]["verdicts"])),
                "tags": ",".join(sorted(picked[fid]["tags"])),
            }
            for fid in sorted(picked)
        ]


def _png_size(path: Path) -> Optional[tuple]:
    try:
        head = path.open("rb").read(24)
        if head[:8] != b"\x89PNG\r\n\x1a\n":
            return None
        w, h = struct.unpack(">II", head[16:24])
        return int(w), int(h)
    except OSError:
        return None


class SceneStore:
    """Read-only view over a sequence's inputs and pipeline outputs."""

    def __init__(self, data_root, out_root, table: Optional[SemanticClassTable] = None):
        self.data_root = Path(data_root)
        self.out_root = Path(out_root)
        self.sequence = self.data_root.name
        self.calib = io.read_calibration(self.data_root / "calib.txt")
        self.table = table if table is not None else semantickitti_table()

        stats_path = self.out_root / "stats.json"
        if not stats_path.exists():
            raise UnknownFrame(f"no pipeline output at {stats_path}; run the pipeline first")
        self.stats = json.loads(stats_path.read_text())["frames"]
        self.clusters: Dict[str, List] = {fid: [] for fid in self.stats}
        for c in io.read_cluster_manifest(self.out_root / "clusters.txt"):
            self.clusters.setdefault(c.frame_id, []).append(c)

    # ------------------------------------------------------------ listing

    def list_scenes(
        self,
        verdict_store: VerdictStore,
        category: Optional[str] = None,
        reviewed: Optional[bool] = None,
        sequence: Optional[str] = None,
        offset: int = 0,
        limit: int = 50,
    ) -> List[Dict]:
        if sequence is not None and sequence != self.sequence:
            return [{"kind": "header", "total": 0, "offset": offset, "limit": limit,
                     "sequence": self.sequence}]
        reviewed_frames = verdict_store.frames_reviewed()
        rows = []
        for fid, s in self.stats.items():
            contradictions = s["red"] + s["yellow"]
            if category is not None:
                if category not in ("red", "yellow"):
                    continue
                if s[category] == 0:
                    continue
            is_reviewed = fid in reviewed_frames
            if reviewed is not None and is_reviewed != reviewed:
                continue
            rows.append(
                {
                    "kind": "scene",
                    "frame_id": fid,
                    "sequence": self.sequence,
                    "green": s["green"],
                    "blue": s["blue"],
                    "red": s["red"],
                    "yellow": s["yellow"],
                    "n_both_valid": s["n_both_valid"],
                    "n_total": s["n_total"],
                    "contradictions": contradictions,
                    "n_clusters": len(self.clusters.get(fid, [])),
                    "reviewed": is_reviewed,
                    "image": (self.data_root / "images" / f"{fid}.png").exists(),
                }
            )
        rows.sort(key=lambda r: (-r["contradictions"], r["frame_id"]))
        page = rows[offset : offset + limit]
        header = {
            "kind": "header",
            "total": len(rows),
            "offset": offset,
            "limit": limit,
            "sequence": self.sequence,
        }
        return [header, *page]

    # ------------------------------------------------------------ payload

    def scene_payload(self, frame_id: str, verdict_store: VerdictStore) -> List[Dict]:
        if frame_id not in self.stats:
            raise UnknownFrame(f"frame {frame_id!r} is not in the corpus")
        cloud = io.read_scan(self.data_root / "velodyne" / f"{frame_id}.bin")
        n = len(cloud)
        categories = io.read_discrepancy(self.out_root / "disc" / f"{frame_id}.disc", n)
        fused = io.read_fused(self.out_root / "fused" / f"{frame_id}.fused", n)
        ccid = io.read_cluster_ids(self.out_root / "disc" / f"{frame_id}.ccid", n)
        speed_path = self.out_root / "ssv" / f"{frame_id}.speed"
        speeds = io.read_speeds(speed_path, n) if speed_path.exists() else np.full(n, np.nan)

        valid = np.flatnonzero(categories != INVALID_CATEGORY)
        points = cloud.points[valid]
        pixels, _ = self.calib.project(points)

        image_path = self.data_root / "images" / f"{frame_id}.png"
        size = _png_size(image_path) if image_path.exists() else None
        s = self.stats[frame_id]

        header = {
            "kind": "scene",
            "frame_id": frame_id,
            "sequence": self.sequence,
            "n_total": n,
            "n_valid": len(valid),
            "green": s["green"],
            "blue": s["blue"],
            "red": s["red"],
            "yellow": s["yellow"],
            "image": size is not None,
        }
        if size is not None:
            header["image_url"] = f"/scenes/{frame_id}/image"
            header["image_width"], header["image_height"] = size

        arrays = {
            "kind": "points",
            "raw_index": valid.astype("<i8"),
            "points": points.astype("<f4"),
            "pixels": pixels.astype("<f4"),
            "categories": categories[valid].astype("<u1"),
            "class_ids": fused.class_ids[valid].astype("<u2"),
            "cluster_ids": ccid[valid].astype("<i4"),
            "speeds_mps": speeds[valid].astype("<f4"),
        }

        blocks = [header, arrays]
        verdicts_by_cluster: Dict[int, int] = {}
        for r in verdict_store.records:
            if r["frame_id"] == frame_id:
                verdicts_by_cluster[r["cluster_id"]] = (
                    verdicts_by_cluster.get(r["cluster_id"], 0) + 1
                )
        for c in sorted(self.clusters.get(frame_id, []), key=lambda c: c.cluster_id):
            members = ccid == c.cluster_id
            with np.errstate(invalid="ignore"):
                member_speeds = speeds[members]
                mean_speed = (
                    float(np.nanmean(member_speeds)) if np.isfinite(member_speeds).any() else 0.0
                )
            blocks.append(
                {
                    "kind": "cluster",
                    "cluster_id": c.cluster_id,
                    "category": CATEGORY_NAMES[c.category],
                    "point_count": c.point_count,
                    "centroid_x": float(c.centroid[0]),
                    "centroid_y": float(c.centroid[1]),
                    "centroid_z": float(c.centroid[2]),
                    "semantic_mode": c.semantic_mode,
                    "semantic_name": self.table.name(c.semantic_mode),
                    "mean_speed_kmh": mean_speed * 3.6,
                    "n_verdicts": verdicts_by_cluster.get(c.cluster_id, 0),
                }
            )
        return blocks

    def image_bytes(self, frame_id: str) -> Optional[bytes]:
        path = self.data_root / "images" / f"{frame_id}.png"
        return path.read_bytes() if path.exists() else None

    def has_cluster(self, frame_id: str, cluster_id: int) -> bool:
        return any(c.cluster_id == cluster_id for c in self.clusters.get(frame_id, []))


def _verdict_block(record: Dict) -> Dict:
    return {
        "kind": "verdict",
        "id": record["id"],
        "frame_id": record["frame_id"],
        "cluster_id": record["cluster_id"],
        "verdict": record["verdict"],
        "tags": ",".join(record["tags"]),
        "reviewer": record["reviewer"],
        "timestamp": record["timestamp"],
    }


class ReviewHandler(BaseHTTPRequestHandler):
    server_version = "motioncheck"
    scenes: SceneStore
    verdicts: VerdictStore
    ui_dir: Optional[Path]

    def log_message(self, fmt, *args):  # quiet by default
        pass

    # ------------------------------------------------------------ plumbing

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _send_blocks(self, blocks: List[Dict], status: int = 200) -> None:
        self._send(status, encode_payload(blocks).encode(), "text/plain; charset=utf-8")

    def _send_error_block(self, status: int, name: str, message: str) -> None:
        self._send_blocks([{"kind": "error", "error": name, "message": message}], status)

    # ------------------------------------------------------------ routes

    def do_GET(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        query = {k: v[-1] for k, v in parse_qs(url.query).items()}
        try:
            if not parts:
                return self._serve_ui("index.html")
            if parts[0] == "scenes" and len(parts) == 1:
                return self._list_scenes(query)
            if parts[0] == "scenes" and len(parts) == 2:
                return self._send_blocks(
                    self.scenes.scene_payload(parts[1], self.verdicts)
                )
            if parts[0] == "scenes" and len(parts) == 3 and parts[2] == "image":
                image = self.scenes.image_bytes(parts[1])
                if image is None:
                    return self._send_error_block(
                        404, "MissingInput", f"frame {parts[1]} has no image"
                    )
                return self._send(200, image, "image/png")
            if parts[0] == "verdicts" and len(parts) == 1:
                records = self.verdicts.records
                if "frame_id" in query:
                    records = [r for r in records if r["frame_id"] == query["frame_id"]]
                header = {"kind": "header", "total": len(records)}
                return self._send_blocks(
                    [header, *[_verdict_block(r) for r in records]]
                )
            if parts[0] == "export" and len(parts) == 2 and parts[1] == "queries":
                rows = self.verdicts.export_frames()
                header = {"kind": "header", "total": len(rows)}
                return self._send_blocks(
                    [header, *[{"kind": "query", **r} for r in rows]]
                )
            return self._serve_ui("/".join(parts))
        except UnknownFrame as e:
            return self._send_error_block(404, "UnknownFrame", str(e))

    def do_POST(self):
        url = urlparse(self.path)
        if url.path.rstrip("/") != "/verdicts":
            return self._send_error_block(404, "UnknownEndpoint", url.path)
        length = int(self.headers.get("Content-Length", "0"))
        body = self.rfile.read(length).decode()
        try:
            blocks = decode_payload(body)
            if not blocks:
                raise ValueError("empty verdict payload")
            fields = blocks[0]
            frame_id = str(fields.get("frame_id", ""))
            cluster_id = int(fields.get("cluster_id", -1))
            verdict = str(fields.get("verdict", ""))
            tags_raw = str(fields.get("tags", "") or "")
            tags = [t.strip() for t in tags_raw.split(",") if t.strip()]
            reviewer = str(fields.get("reviewer", "anonymous"))
        except (ValueError, KeyError) as e:
            return self._send_error_block(400, "MalformedPayload", str(e))
        if verdict not in VERDICTS:
            return self._send_error_block(
                400, "InvalidVerdict", f"verdict {verdict!r} not in {VERDICTS}"
            )
        if not self.scenes.has_cluster(frame_id, cluster_id):
            return self._send_error_block(
                404, "UnknownCluster", f"no cluster {cluster_id} in frame {frame_id!r}"
            )
        record = self.verdicts.append(frame_id, cluster_id, verdict, tags, reviewer)
        self._send_blocks([_verdict_block(record)], 201)

    # ------------------------------------------------------------ helpers

    def _list_scenes(self, query: Dict[str, str]) -> None:
        reviewed = None
        if "reviewed" in query:
            reviewed = query["reviewed"].lower() in ("1", "true", "yes")
        try:
            offset = int(query.get("offset", "0"))
            limit = int(query.get("limit", "50"))
        except ValueError:
            return self._send_error_block(400, "MalformedQuery", "offset/limit must be integers")
        blocks = self.scenes.list_scenes(
            self.verdicts,
            category=query.get("category"),
            reviewed=reviewed,
            sequence=query.get("sequence"),
            offset=offset,
            limit=limit,
        )
        self._send_blocks(blocks)

    def _serve_ui(self, relpath: str) -> None:
        if self.ui_dir is not None:
            base = self.ui_dir.resolve()
            target = (base / relpath).resolve()
            if target.is_relative_to(base) and target.is_file():
                types = {
                    ".html": "text/html; charset=utf-8",
                    ".js": "text/javascript; charset=utf-8",
                    ".css": "text/css; charset=utf-8",
                    ".map": "application/json",
                    ".png": "image/png",
                    ".svg": "image/svg+xml",
                }
                ctype = types.get(target.suffix, "application/octet-stream")
                return self._send(200, target.read_bytes(), ctype)
            index = base / "index.html"
            if relpath == "index.html" and not index.exists():
                pass
        if relpath == "index.html":
            return self._send(200, _FALLBACK_PAGE.encode(), "text/html; charset=utf-8")
        self._send_error_block(404, "NotFound", f"/{relpath}")


def make_server(
    data_root,
    out_root,
    verdict_log,
    port: int = 0,
    host: str = "127.0.0.1",
    ui_dir=None,
) -> ThreadingHTTPServer:
    """Build the HTTP server; port 0 picks a free port."""
    scenes = SceneStore(data_root, out_root)
    verdicts = VerdictStore(verdict_log)

    handler = type(
        "BoundReviewHandler",
        (ReviewHandler,),
        {
            "scenes": scenes,
            "verdicts": verdicts,
            "ui_dir": Path(ui_dir) if ui_dir else None,
        },
    )
    return ThreadingHTTPServer((host, port), handler)


def serve(data_root, out_root, verdict_log, port: int, host: str = "127.0.0.1", ui_dir=None) -> None:
    server = make_server(data_root, out_root, verdict_log, port, host, ui_dir)
    print(f"review server on http://{host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
