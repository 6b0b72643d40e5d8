#!/usr/bin/env python3
"""Minimal scoring sidecar used by the transport tests.

Speaks the line protocol on stdin/stdout and scores gap i of an n-token
sentence as (i + 1) / n, so the final gap is always 1.0. Flags simulate
misbehaviour: swapped reply order, mid-stream death, per-id errors, garbage
output, or hanging, letting the client-side error paths be exercised
without a real model anywhere near the tests.
"""

from __future__ import annotations

import argparse
import json
import sys


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reorder", action="store_true",
                        help="answer score requests in pairs, swapped")
    parser.add_argument("--die-after", type=int, default=None, metavar="N",
                        help="exit(1) abruptly after N replies")
    parser.add_argument("--error-on", default=None, metavar="ID",
                        help="reply with an error message for this request id")
    parser.add_argument("--garbage", action="store_true",
                        help="emit one non-JSON line after the handshake")
    parser.add_argument("--hang", action="store_true",
                        help="never answer score requests")
    parser.add_argument("--name", default="stub")
    args = parser.parse_args()

    out = sys.stdout
    replies = 0
    held: list[dict] = []

    def emit(obj: dict) -> None:
        out.write(json.dumps(obj) + "\n")
        out.flush()

    def answer(req: dict) -> None:
        nonlocal replies
        rid = req.get("id")
        if args.error_on is not None and rid == args.error_on:
            emit({"type": "error", "id": rid, "message": "refused by stub"})
        else:
            tokens = req.get("tokens", [])
            n = len(tokens)
            if n == 0:
                emit({"type": "error", "id": rid, "message": "no tokens"})
            else:
                scores = [(i + 1) / n for i in range(n)]
                emit({"type": "scores", "id": rid, "scores": scores})
        replies += 1
        if args.die_after is not None and replies >= args.die_after:
            sys.exit(1)

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            emit({"type": "error", "id": None, "message": "unparseable request"})
            continue
        mtype = msg.get("type")
        if mtype == "hello":
            emit({"type": "ready", "version": 1, "scorer": args.name})
            if args.garbage:
                out.write("this is not json\n")
                out.flush()
        elif mtype == "score":
            if args.hang:
                continue
            if args.reorder:
                held.append(msg)
                if len(held) == 2:
                    answer(held[1])
                    answer(held[0])
                    held.clear()
            else:
                answer(msg)
        elif mtype == "bye":
            for req in held:
                answer(req)
            emit({"type": "bye"})
            return 0
        else:
            emit({"type": "error", "id": msg.get("id"),
                  "message": f"unknown message type {mtype!r}"})
    return 0


if __name__ == "__main__":
    sys.exit(main())
