"""The protocol loop: newline-delimited JSON on stdin/stdout.

Session shape: the peer opens with hello {version}, the sidecar answers
ready {version, scorer}; each score {id, text, tokens} request gets exactly
one scores {id, scores} or error {id, message} reply; bye is answered with
bye and a clean exit. A malformed request earns an error message and the
session continues.
"""

from __future__ import annotations

import json
from typing import IO

PROTOCOL_VERSION = 1


def _emit(out: IO[str], message: dict) -> None:
    out.write(json.dumps(message, ensure_ascii=False) + "\n")
    out.flush()


def serve(inp: IO[str], out: IO[str], scorer) -> int:
    """Run one protocol session; returns the process exit code."""
    greeted = False
    for line in inp:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            _emit(out, {"type": "error", "id": None,
                        "message": "request is not valid JSON"})
            continue
        if not isinstance(msg, dict):
            _emit(out, {"type": "error", "id": None,
                        "message": "request must be a JSON object"})
            continue
        mtype = msg.get("type")
        if mtype == "hello":
            if msg.get("version") != PROTOCOL_VERSION:
                _emit(out, {"type": "error", "id": None,
                            "message": f"unsupported protocol version "
                                       f"{msg.get('version')!r}, expected "
                                       f"{PROTOCOL_VERSION}"})
                continue
            _emit(out, {"type": "ready", "version": PROTOCOL_VERSION,
                        "scorer": scorer.name})
            greeted = True
        elif mtype == "score":
            rid = msg.get("id")
            if not greeted:
                # answering before ready would break the wire contract
                _emit(out, {"type": "error", "id": rid if isinstance(rid, str) else None,
                            "message": "score request before hello"})
                continue
            if not isinstance(rid, str):
                _emit(out, {"type": "error", "id": None,
                            "message": "score request without a string id"})
                continue
            tokens = msg.get("tokens")
            if not isinstance(tokens, list) or not all(
                isinstance(t, str) for t in tokens
            ):
                _emit(out, {"type": "error", "id": rid,
                            "message": "score request without a token list"})
                continue
            text = msg.get("text")
            if not isinstance(text, str):
                text = " ".join(tokens)
            try:
                scores = scorer.score_gaps(text, tokens)
            except Exception as exc:  # a bad sentence must not kill the session
                _emit(out, {"type": "error", "id": rid, "message": str(exc)})
                continue
            _emit(out, {"type": "scores", "id": rid, "scores": list(scores)})
        elif mtype == "bye":
            _emit(out, {"type": "bye"})
            return 0
        else:
            _emit(out, {"type": "error", "id": msg.get("id"),
                        "message": f"unknown message type {mtype!r}"})
    return 0
