#!/usr/bin/env python3
# Copyright 2026 The EvG Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes canonical protocol frames to testdata/golden.

Frames are built with struct alone so that they do not share code with
either the engine or an adapter implementation.
"""

import json
import pathlib
import struct
import sys

HELLO, HELLO_ACK, SCORE_REQ, SCORE_RESP, GEN_REQ, GEN_RESP, ERROR = range(1, 8)


def frame(msg_type, payload):
    return b"EVGP" + struct.pack("<BI", msg_type, len(payload)) + payload


def f32s(values):
    return struct.pack("<%df" % len(values), *values)


def vectors():
    px = [i / 11.0 for i in range(12)]  # one 2x2x3 image
    px2 = [1.0 - v for v in px]
    yield "hello_v1", frame(HELLO, struct.pack("<H", 1)), {"version": 1}
    yield "hello_ack_detector_32x32x3", frame(HELLO_ACK, struct.pack("<HBIIII", 1, 1, 32, 32, 3, 0)), {
        "version": 1, "role": 1, "shape": [32, 32, 3], "latent_dim": 0}
    yield "hello_ack_generator_64", frame(HELLO_ACK, struct.pack("<HBIIII", 1, 2, 8, 8, 3, 64)), {
        "version": 1, "role": 2, "shape": [8, 8, 3], "latent_dim": 64}
    yield "score_req_2x2x3_batch2", frame(SCORE_REQ, struct.pack("<I", 2) + f32s(px + px2)), {
        "shape": [2, 2, 3], "batch": 2, "pixels": px + px2}
    yield "score_req_empty", frame(SCORE_REQ, struct.pack("<I", 0)), {"shape": [2, 2, 3], "batch": 0, "pixels": []}
    scores = [0.5, -1.25, 3.0e-3]
    yield "score_resp_3", frame(SCORE_RESP, struct.pack("<I", 3) + f32s(scores)), {"scores": scores}
    z = [0.6, -0.8, 0.0]
    yield "gen_req_batch1_dim3", frame(GEN_REQ, struct.pack("<II", 1, 3) + f32s(z)), {
        "batch": 1, "latent_dim": 3, "latents": z}
    yield "gen_resp_2x2x3", frame(GEN_RESP, struct.pack("<I", 1) + f32s(px)), {
        "shape": [2, 2, 3], "batch": 1, "pixels": px}
    msg = "unsupported version 2"
    yield "error_version", frame(ERROR, struct.pack("<I", 1) + msg.encode("utf-8")), {"code": 1, "message": msg}
    msg = "callable raised: boom é"
    yield "error_handler_utf8", frame(ERROR, struct.pack("<I", 3) + msg.encode("utf-8")), {"code": 3, "message": msg}


def main():
    out = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path(__file__).resolve().parent.parent / "testdata" / "golden"
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for name, data, fields in vectors():
        (out / (name + ".bin")).write_bytes(data)
        manifest.append({"name": name, "file": name + ".bin", "type": data[4], "size": len(data), "fields": fields})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
