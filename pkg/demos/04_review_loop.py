"""The full loop: pipeline run, review server, verdicts, export.

Runs every stage over a synthetic drive, starts the review server on a
free port, then plays the reviewer role over plain HTTP: pull the
scene queue, inspect the worst frame's clusters, file verdicts, export
the query list that would go back to the labeling team. Run as:

    python3 demos/04_review_loop.py
"""

import tempfile
import threading
import urllib.request
from pathlib import Path

from motioncheck.config import load_config
from motioncheck.pipeline import run_all
from motioncheck.server import make_server
from motioncheck.synth import generate_sequence
from motioncheck.wire import decode_payload, encode_payload


def get(base, path):
    with urllib.request.urlopen(base + path) as resp:
        return decode_payload(resp.read().decode())


def post(base, path, block):
    body = encode_payload([block]).encode()
    req = urllib.request.Request(base + path, data=body, method="POST")
    with urllib.request.urlopen(req) as resp:
        return decode_payload(resp.read().decode())


def main():
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp) / "seq00"
        out = Path(tmp) / "out"
        generate_sequence(root, n_frames=5, seed=7)
        cfg = load_config(root / "run.cfg", data_root=str(root), out_root=str(out))
        summary = run_all(cfg)
        print("pipeline:", {k: v for k, v in summary.items() if not k.startswith("eval")})

        httpd = make_server(root, out, Path(tmp) / "verdicts.log", port=0)
        threading.Thread(target=httpd.serve_forever, daemon=True).start()
        base = f"http://127.0.0.1:{httpd.server_address[1]}"
        print(f"\nreview server on {base}")

        try:
            scenes = get(base, "/scenes")[1:]
            print(f"queue of {len(scenes)} scenes, worst first:")
            for s in scenes:
                print(f"  {s['frame_id']}: red {s['red']}, yellow {s['yellow']}")

            fid = scenes[0]["frame_id"]
            blocks = get(base, f"/scenes/{fid}")
            clusters = [b for b in blocks if b["kind"] == "cluster"]
            print(f"\nframe {fid} clusters:")
            for c in clusters:
                print(
                    f"  #{c['cluster_id']} {c['category']:<6} {c['point_count']:>4} pts"
                    f"  '{c['semantic_name']}' at {c['mean_speed_kmh']:.1f} km/h"
                )

            red = next(c for c in clusters if c["category"] == "red")
            yellow = next(c for c in clusters if c["category"] == "yellow")
            post(base, "/verdicts", {
                "frame_id": fid, "cluster_id": red["cluster_id"],
                "verdict": "sv_failure", "tags": "missed_mover",
                "reviewer": "demo",
            })
            post(base, "/verdicts", {
                "frame_id": fid, "cluster_id": yellow["cluster_id"],
                "verdict": "false_alarm", "reviewer": "demo",
            })
            print(f"\nfiled sv_failure on cluster {red['cluster_id']},"
                  f" false_alarm on cluster {yellow['cluster_id']}")

            rows = get(base, "/export/queries")[1:]
            print("export for the labeling team (failure frames only):")
            for r in rows:
                print(f"  {r['frame_id']}: {r['verdicts']}")
        finally:
            httpd.shutdown()


if __name__ == "__main__":
    main()
