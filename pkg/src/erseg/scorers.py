"""Gap scorer transports: precomputed score files and scoring sidecars.

Score files are newline-delimited JSON, one record per line with fields
id, tokens, scores. Sidecars are child processes speaking a line protocol
over stdin/stdout: every message is one UTF-8 JSON object terminated by a
single LF. The session opens with a hello/ready handshake, requests carry
caller-chosen ids, responses may arrive in any order and are matched back
by id, and both sides say bye to shut down.
"""

from __future__ import annotations

import json
import subprocess
import threading
from dataclasses import dataclass

from .errors import CorpusFormatError, ProtocolError, ScorerError, TransportError
from .segmenter import EXCLUDED, GapScores
from .sentence import Sentence

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT_SECS = 60.0


@dataclass(frozen=True)
class ScoreRecord:
    """Precomputed gap scores for one sentence."""

    id: str
    tokens: tuple[str, ...]
    scores: tuple[float, ...]


def _check_score_values(scores, where: str) -> None:
    for i, s in enumerate(scores):
        if not isinstance(s, (int, float)) or isinstance(s, bool):
            raise CorpusFormatError(f"{where}: score {i} is not a number")
        if s != s or s in (float("inf"), float("-inf")):
            raise CorpusFormatError(f"{where}: score {i} is not finite")
        if not (0.0 <= s <= 1.0) and s != EXCLUDED:
            raise CorpusFormatError(f"{where}: score {i} ({s}) outside [0, 1]")


def load_score_file(path: str) -> dict[str, ScoreRecord]:
    """Load an NDJSON score file keyed by record id.

    Malformed lines and duplicate ids fail with the line number; a record
    whose scores and tokens disagree in length fails naming the id.
    """
    records: dict[str, ScoreRecord] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                raise CorpusFormatError(f"line {lineno}: empty line in score file")
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise CorpusFormatError(f"line {lineno}: expected an object")
            try:
                rid, tokens, scores = obj["id"], obj["tokens"], obj["scores"]
            except KeyError as exc:
                raise CorpusFormatError(f"line {lineno}: missing field {exc}") from exc
            if not isinstance(rid, str):
                raise CorpusFormatError(f"line {lineno}: id must be a string")
            if rid in records:
                raise CorpusFormatError(f"line {lineno}: duplicate id {rid!r}")
            if len(scores) != len(tokens):
                raise CorpusFormatError(
                    f"id {rid!r}: {len(tokens)} tokens but {len(scores)} scores"
                )
            _check_score_values(scores, f"id {rid!r}")
            records[rid] = ScoreRecord(
                id=rid,
                tokens=tuple(str(t) for t in tokens),
                scores=tuple(float(s) for s in scores),
            )
    return records


def dump_score_file(records: dict[str, ScoreRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records.values():
            fh.write(
                json.dumps(
                    {"id": rec.id, "tokens": list(rec.tokens), "scores": list(rec.scores)},
                    ensure_ascii=False,
                )
                + "\n"
            )


def finalize_gap_scores(raw: list[float] | tuple[float, ...], n_tokens: int) -> GapScores:
    """Turn raw scorer output into engine-ready gap scores.

    The sentence-final gap is pinned to 1.0: the end of the sentence is
    always a natural boundary, whatever likelihood the scorer put there.
    """
    if len(raw) != n_tokens:
        raise ScorerError(f"expected {n_tokens} gap scores, got {len(raw)}")
    gs = GapScores(tuple(float(s) for s in raw[:-1]) + (1.0,))
    gs.check(n_tokens)
    return gs


class FileScorer:
    """Gap scorer that looks sentences up in a precomputed score file."""

    name = "file"

    def __init__(self, records: dict[str, ScoreRecord]):
        self.records = records

    @classmethod
    def from_path(cls, path: str) -> "FileScorer":
        return cls(load_score_file(path))

    def score(self, sid: str, sentence: Sentence) -> GapScores:
        rec = self.records.get(sid)
        if rec is None:
            raise ScorerError(f"no score record for sentence {sid}")
        if rec.tokens != sentence.tokens:
            raise ScorerError(f"score record {sid} tokens do not match the sentence")
        return finalize_gap_scores(rec.scores, len(sentence.tokens))


class _Slot:
    """One in-flight request: an event plus its eventual payload."""

    __slots__ = ("event", "scores", "error")

    def __init__(self) -> None:
        self.event = threading.Event()
        self.scores: list[float] | None = None
        self.error: str | None = None


class SidecarSession:
    """A running scoring sidecar and the machinery to talk to it.

    Requests may be issued from several threads at once; writes are
    serialized and a single reader thread routes responses back to their
    callers by id. If the child exits or emits garbage, every in-flight and
    future request fails with a diagnostic instead of hanging.
    """

    def __init__(self, command: list[str], timeout: float = DEFAULT_TIMEOUT_SECS):
        self.command = list(command)
        self.timeout = timeout
        self.scorer_name: str | None = None
        self._pending: dict[str, _Slot] = {}
        # state lock guards _pending/_dead; the write lock only serializes
        # stdin. Never hold both: a writer blocked on a full pipe must not
        # be able to stall the reader thread, or the session deadlocks.
        self._lock = threading.Lock()
        self._wlock = threading.Lock()
        self._dead: str | None = None
        self._saw_bye = False
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
            )
        except OSError as exc:
            raise TransportError(f"could not start sidecar: {exc}") from exc
        self._ready = threading.Event()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        try:
            self._send({"type": "hello", "version": PROTOCOL_VERSION})
        except TransportError:
            self._abort("sidecar closed stdin during handshake")
            raise
        if not self._ready.wait(self.timeout):
            reason = self._dead or "sidecar did not complete the handshake in time"
            self._abort(reason)
            raise TransportError(reason)
        if self._dead:
            raise TransportError(self._dead)

    # -- wire helpers ------------------------------------------------------

    def _send(self, message: dict) -> None:
        data = json.dumps(message, ensure_ascii=False).encode("utf-8") + b"\n"
        with self._lock:
            if self._dead:
                raise TransportError(self._dead)
        with self._wlock:
            try:
                self._proc.stdin.write(data)
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError, ValueError) as exc:
                raise TransportError(f"sidecar pipe closed: {exc}") from exc

    def _read_loop(self) -> None:
        stream = self._proc.stdout
        while True:
            line = stream.readline()
            if not line:
                self._fail_all("sidecar closed its output stream")
                return
            try:
                msg = json.loads(line.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                self._fail_all(f"sidecar sent a malformed line: {line[:200]!r}")
                return
            mtype = msg.get("type")
            if mtype == "ready":
                if msg.get("version") != PROTOCOL_VERSION:
                    self._fail_all(
                        f"sidecar speaks protocol version {msg.get('version')!r}, "
                        f"expected {PROTOCOL_VERSION}"
                    )
                    return
                self.scorer_name = msg.get("scorer")
                self._ready.set()
            elif mtype in ("scores", "error"):
                rid = msg.get("id")
                with self._lock:
                    slot = self._pending.pop(rid, None)
                if slot is None:
                    continue  # late reply for a timed-out request
                if mtype == "scores":
                    slot.scores = msg.get("scores")
                else:
                    slot.error = str(msg.get("message", "unspecified sidecar error"))
                slot.event.set()
            elif mtype == "bye":
                self._saw_bye = True
                self._fail_all("sidecar said bye")
                return
            else:
                self._fail_all(f"sidecar sent unknown message type {mtype!r}")
                return

    def _fail_all(self, reason: str) -> None:
        with self._lock:
            if self._dead is None:
                self._dead = reason
            pending = list(self._pending.values())
            self._pending.clear()
        for slot in pending:
            slot.error = reason
            slot.event.set()
        self._ready.set()

    def _abort(self, reason: str) -> None:
        self._fail_all(reason)
        try:
            self._proc.kill()
        except OSError:
            pass

    def _stderr_tail(self) -> str:
        # only safe to drain after exit; reading a live child's stderr blocks
        if self._proc.poll() is None:
            return ""
        try:
            data = self._proc.stderr.read()
        except (OSError, ValueError):
            return ""
        if not data:
            return ""
        text = data.decode("utf-8", "replace").strip()
        return text[-500:]

    # -- public API --------------------------------------------------------

    def request(self, rid: str, text: str, tokens: list[str]) -> list[float]:
        """Score one sentence; blocks until the reply with this id arrives."""
        slot = _Slot()
        with self._lock:
            if self._dead:
                raise TransportError(self._dead)
            if rid in self._pending:
                raise ProtocolError(f"request id {rid!r} already in flight")
            self._pending[rid] = slot
        try:
            self._send({"type": "score", "id": rid, "text": text, "tokens": tokens})
        except TransportError:
            with self._lock:
                self._pending.pop(rid, None)
            raise
        if not slot.event.wait(self.timeout):
            with self._lock:
                self._pending.pop(rid, None)
            raise TransportError(f"request {rid!r} timed out after {self.timeout}s")
        if slot.error is not None:
            if self._dead:
                tail = self._stderr_tail()
                suffix = f" [stderr: {tail}]" if tail else ""
                raise TransportError(f"{slot.error}{suffix}")
            raise ScorerError(f"sidecar error for {rid!r}: {slot.error}")
        if not isinstance(slot.scores, list):
            raise ProtocolError(f"sidecar reply for {rid!r} carries no score list")
        return slot.scores

    def close(self) -> None:
        """Say bye and reap the child; safe to call more than once."""
        try:
            self._send({"type": "bye"})
        except TransportError:
            pass
        try:
            self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait(timeout=5)
        self._fail_all("session closed")

    def __enter__(self) -> "SidecarSession":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class SubprocessScorer:
    """Gap scorer backed by a SidecarSession."""

    name = "subprocess"

    def __init__(self, session: SidecarSession):
        self.session = session

    def score(self, sid: str, sentence: Sentence) -> GapScores:
        raw = self.session.request(sid, sentence.normalized, list(sentence.tokens))
        return finalize_gap_scores(raw, len(sentence.tokens))


def validate_transcript(lines: list[str], role: str) -> list[dict]:
    """Check one side of a protocol exchange for structural conformance.

    role is "sidecar" for messages written by the sidecar or "core" for
    messages written by the engine. Returns the parsed messages; raises
    ProtocolError on the first violation.
    """
    if role not in ("sidecar", "core"):
        raise ValueError("role must be 'sidecar' or 'core'")
    msgs: list[dict] = []
    for k, line in enumerate(lines, start=1):
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"message {k}: invalid JSON: {exc}") from exc
        if not isinstance(msg, dict) or "type" not in msg:
            raise ProtocolError(f"message {k}: not an object with a type")
        msgs.append(msg)
    if not msgs:
        return msgs

    first, body = msgs[0], msgs[1:]
    if role == "sidecar":
        if first["type"] != "ready":
            raise ProtocolError("sidecar transcript must open with ready")
        if first.get("version") != PROTOCOL_VERSION or "scorer" not in first:
            raise ProtocolError("ready must carry version and scorer fields")
    else:
        if first["type"] != "hello" or first.get("version") != PROTOCOL_VERSION:
            raise ProtocolError("core transcript must open with a versioned hello")
    for k, msg in enumerate(body, start=2):
        mtype = msg["type"]
        if mtype == "bye":
            if k != len(msgs):
                raise ProtocolError("bye must be the final message")
            continue
        if role == "sidecar":
            if mtype == "scores":
                if not isinstance(msg.get("id"), str) or not isinstance(
                    msg.get("scores"), list
                ):
                    raise ProtocolError(f"message {k}: malformed scores reply")
                if not all(
                    isinstance(s, (int, float)) and not isinstance(s, bool)
                    for s in msg["scores"]
                ):
                    raise ProtocolError(f"message {k}: non-numeric score")
            elif mtype == "error":
                if not isinstance(msg.get("message"), str):
                    raise ProtocolError(f"message {k}: error without message text")
            else:
                raise ProtocolError(f"message {k}: unexpected sidecar type {mtype!r}")
        else:
            if mtype != "score":
                raise ProtocolError(f"message {k}: unexpected core type {mtype!r}")
            if not isinstance(msg.get("id"), str) or not isinstance(
                msg.get("tokens"), list
            ):
                raise ProtocolError(f"message {k}: malformed score request")
    return msgs
