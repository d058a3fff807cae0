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

"""Drives `groundworld serve --stdio` as an external client would."""

import base64
import json
import subprocess
import sys


def main(cli):
    proc = subprocess.Popen([cli, "serve", "--stdio"], stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)

    def ask(msg):
        proc.stdin.write(json.dumps(msg) + "\n")
        proc.stdin.flush()
        return json.loads(proc.stdout.readline())

    failures = []

    def expect(cond, what):
        if not cond:
            failures.append(what)

    spec = ask({"cmd": "spec"})
    expect(spec["frame_shape"] == [3, 128, 128], "frame shape")
    names = [a["name"] for a in spec["actions"]]
    expect(len(names) == 4, "four actions")

    r = ask({"cmd": "reset", "env_kind": "d", "split": "test", "seed": 9, "id": "r1"})
    expect(r["ok"] and r["id"] == "r1", "reset ok")
    frame = base64.b64decode(r["obs"]["frame_b64"])
    expect(len(frame) == 3 * 128 * 128, "frame bytes")
    expect(len(r["obs"]["instruction_onehot"]) == spec["vocab_sizes"]["d"]["flat"], "one-hot size")
    expect(sum(r["obs"]["instruction_onehot"]) == len(spec["vocab_sizes"]["d"]["slots"]), "one-hot ones")

    total, steps, last = 0.0, 0, r
    while not last["done"]:
        last = ask({"cmd": "step", "action": names[steps % 4]})
        total += last["reward"]
        steps += 1
    expect(last["info"]["step"] == steps, "step counter")
    expect(abs(last["info"]["total_reward"] - total) < 1e-9, "total reward")
    expect(-510 <= total <= 10, "reward bounds")
    expect(ask({"cmd": "step", "action": 0}) == {"ok": False, "error": "episode_done"}, "step after done")
    expect(ask({"cmd": "nope"})["error"].startswith("unknown_cmd"), "unknown command")
    proc.stdin.write("{oops\n")
    proc.stdin.flush()
    expect(json.loads(proc.stdout.readline())["error"].startswith("malformed_json"), "malformed json")
    expect(ask({"cmd": "close"})["ok"], "close")
    proc.stdin.close()
    expect(proc.wait(timeout=10) == 0, "clean exit")

    for f in failures:
        print("FAIL:", f)
    print(f"episode of {steps} steps, reward {total}; {len(failures)} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
