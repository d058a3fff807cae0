# Copyright (c) 2026 The groundworld Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Checks learning-curve points against a rolling rate recomputed from scratch.

Runs a tiny training job and the plot command through the CLI, then
recomputes the trailing-window success rate from the per-episode `perfect`
column and compares it with both the metrics file and the plot sidecar.
"""

import argparse
import csv
import subprocess
import sys
import tempfile
from collections import deque
from pathlib import Path


def rolling(flags, window):
    out, q, hits = [], deque(), 0
    for f in flags:
        q.append(f)
        hits += f
        if len(q) > window:
            hits -= q.popleft()
        out.append(hits / len(q))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--config", required=True)
    ap.add_argument("--window", type=int, default=1000)
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cfg = Path(args.config).read_text()
        cfg = cfg.replace("[budget]", f'[checkpoint]\ndir = "{tmp / "run"}"\n\n[budget]')
        (tmp / "run.toml").write_text(cfg)
        subprocess.run([args.cli, "train", "--config", str(tmp / "run.toml")], check=True,
                       stdout=subprocess.DEVNULL)
        metrics = tmp / "run" / "metrics.csv"
        out = tmp / "curve.png"
        subprocess.run([args.cli, "plot", "--in", str(metrics), "--in", str(metrics), "--label", "a",
                        "--label", "b", "--out", str(out)], check=True, stdout=subprocess.DEVNULL)

        rows = list(csv.DictReader(metrics.open()))
        flags = [int(r["perfect"]) for r in rows]
        expect = rolling(flags, args.window)
        bad = 0
        for i, r in enumerate(rows):
            if int(r["episode"]) != i + 1 or abs(float(r["success_rate"]) - expect[i]) > 1e-6:
                bad += 1
            if int(r["perfect"]) != (float(r["reward"]) == 10.0):
                bad += 1

        points = list(csv.DictReader(Path(str(out) + ".csv").open()))
        series = {p["series"] for p in points}
        for p in points:
            e = int(p["episode"])
            if abs(float(p["success_rate"]) - expect[e - 1]) > 1e-6:
                bad += 1
        if not out.exists() or out.read_bytes()[:8] != b"\x89PNG\r\n\x1a\n":
            print("plot image missing or not a PNG")
            bad += 1
        if series != {"0", "1"} or {p["label"] for p in points} != {"a", "b"}:
            print("expected two labelled series")
            bad += 1
        last = [p for p in points if p["series"] == "0"][-1]
        if int(last["episode"]) != len(rows):
            print("last episode missing from the sidecar")
            bad += 1
        print(f"rows {len(rows)} points {len(points)} mismatches {bad}")
        return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
