"""Blackbox backends: builtin analytic objectives and external subprocesses.

The subprocess protocol is line-delimited JSON.  Persistent mode keeps a
worker process alive and exchanges one request/response line per evaluation:

    -> {"id": N, "x": {"<name>": value, ...}}
    <- {"id": N, "objective": v}
    <- {"id": N, "status": "fail", "reason": "..."}

Oneshot mode spawns the command once per evaluation with a JSON point-file
path as its last argument and parses the final stdout line identically.
A timeout or nonzero exit is a Failure (budget is consumed); malformed JSON
or a response id mismatch is a ProtocolError and aborts the run.
"""

from __future__ import annotations

import json
import os
import queue
import shlex
import subprocess
import tempfile
import threading
from dataclasses import dataclass

from .driver import EvaluationFailed
from .problems import get_problem
from .space import Point, SearchSpace


class ProtocolError(Exception):
    """Unrecoverable violation of the evaluation protocol."""


@dataclass(frozen=True)
class BlackboxDescriptor:
    builtin: str | None = None
    command: str | None = None
    mode: str = "persistent"          # or "oneshot"
    timeout: float = 600.0

    def __post_init__(self):
        if (self.builtin is None) == (self.command is None):
            raise ValueError("exactly one of builtin/command must be set")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.mode not in ("persistent", "oneshot"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @staticmethod
    def parse(spec: str, mode: str = "persistent",
              timeout: float = 600.0) -> "BlackboxDescriptor":
        if spec.startswith("builtin:"):
            name = spec.split(":", 1)[1]
            get_problem(name)  # validates the name
            return BlackboxDescriptor(builtin=name)
        return BlackboxDescriptor(command=spec, mode=mode, timeout=timeout)


def _parse_response(line: str, expect_id: int | None):
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed response line: {line!r}") from exc
    if not isinstance(doc, dict):
        raise ProtocolError(f"response must be an object: {line!r}")
    if expect_id is not None and doc.get("id") != expect_id:
        raise ProtocolError(
            f"response id {doc.get('id')!r} does not match request id {expect_id}"
        )
    if doc.get("status") == "fail":
        raise EvaluationFailed(str(doc.get("reason", "unspecified failure")))
    if "objective" not in doc:
        raise ProtocolError(f"response carries no objective: {line!r}")
    try:
        return float(doc["objective"])
    except (TypeError, ValueError) as exc:
        raise ProtocolError(f"non-numeric objective in {line!r}") from exc


class _PersistentWorker:
    def __init__(self, command: str):
        self.proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self._next_id = 0

    def _read_loop(self):
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF sentinel

    def request(self, x: dict, timeout: float) -> float:
        self._next_id += 1
        req_id = self._next_id
        try:
            self.proc.stdin.write(json.dumps({"id": req_id, "x": x}) + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise EvaluationFailed(f"worker died: {exc}") from exc
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise EvaluationFailed("timeout") from None
        if line is None:
            raise EvaluationFailed("worker died: stream closed")
        return _parse_response(line.strip(), req_id)

    def close(self):
        try:
            if self.proc.poll() is None:
                self.proc.kill()
            self.proc.wait(timeout=5)
        except Exception:
            pass


class SubprocessBlackbox:
    """Callable Point -> objective speaking the subprocess protocol.

    Thread safe: parallel dispatchers each borrow their own persistent
    worker from an internal pool.  A dead or timed-out worker yields a
    Failure and is respawned once; a second death aborts the run.
    """

    def __init__(self, descriptor: BlackboxDescriptor, space: SearchSpace):
        if descriptor.command is None:
            raise ValueError("SubprocessBlackbox needs a command descriptor")
        self.descriptor = descriptor
        self.space = space
        self._pool: list[_PersistentWorker] = []
        self._lock = threading.Lock()
        self._deaths = 0

    def _borrow(self) -> _PersistentWorker:
        with self._lock:
            if self._pool:
                return self._pool.pop()
        return _PersistentWorker(self.descriptor.command)

    def _give_back(self, worker: _PersistentWorker) -> None:
        with self._lock:
            self._pool.append(worker)

    def __call__(self, point: Point) -> float:
        x = point.as_dict(self.space)
        if self.descriptor.mode == "oneshot":
            return self._oneshot(x)
        worker = self._borrow()
        try:
            value = worker.request(x, self.descriptor.timeout)
        except EvaluationFailed:
            worker.close()
            with self._lock:
                self._deaths += 1
                if self._deaths > 1:
                    raise ProtocolError(
                        "persistent worker died twice; aborting"
                    ) from None
            raise
        except ProtocolError:
            worker.close()
            raise
        self._give_back(worker)
        return value

    def _oneshot(self, x: dict) -> float:
        fd, path = tempfile.mkstemp(suffix=".json", prefix="deltamads-point-")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump({"x": x}, fh)
            try:
                res = subprocess.run(
                    shlex.split(self.descriptor.command) + [path],
                    capture_output=True,
                    text=True,
                    timeout=self.descriptor.timeout,
                )
            except subprocess.TimeoutExpired:
                raise EvaluationFailed("timeout") from None
            if res.returncode != 0:
                raise EvaluationFailed(f"worker exited with {res.returncode}")
            lines = [ln for ln in res.stdout.splitlines() if ln.strip()]
            if not lines:
                raise ProtocolError("worker produced no output")
            return _parse_response(lines[-1].strip(), None)
        finally:
            try:
                os.unlink(path)
            except OSError:
                pass

    def close(self):
        with self._lock:
            workers, self._pool = self._pool, []
        for w in workers:
            w.close()


def make_blackbox(descriptor: BlackboxDescriptor, space: SearchSpace):
    """Resolve a descriptor to (callable, closer)."""
    if descriptor.builtin is not None:
        return get_problem(descriptor.builtin).objective, lambda: None
    bb = SubprocessBlackbox(descriptor, space)
    return bb, bb.close
