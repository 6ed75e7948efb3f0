"""Line-delimited JSON evaluation protocol.

Requests arrive one per stdin line as {"id": N, "x": {...}}; each produces
exactly one stdout line: {"id": N, "objective": v} on success or
{"id": N, "status": "fail", "reason": "..."} when the evaluation cannot
complete.
"""

from __future__ import annotations

import json
import sys

from .detect import EvaluationFailure, Evaluator
from .model import ConfigError


def respond(out, doc: dict) -> None:
    out.write(json.dumps(doc) + "\n")
    out.flush()


def serve(evaluator: Evaluator, stdin=None, stdout=None) -> None:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        if not line.strip():
            continue
        try:
            req = json.loads(line)
        except json.JSONDecodeError as exc:
            respond(stdout, {"id": None, "status": "fail",
                             "reason": f"malformed request: {exc}"})
            continue
        req_id = req.get("id") if isinstance(req, dict) else None
        if not isinstance(req, dict) or "x" not in req or not isinstance(req["x"], dict):
            respond(stdout, {"id": req_id, "status": "fail",
                             "reason": "request must be {\"id\": N, \"x\": {...}}"})
            continue
        try:
            value = evaluator.objective(req["x"])
        except (ConfigError, EvaluationFailure) as exc:
            respond(stdout, {"id": req_id, "status": "fail", "reason": str(exc)})
            continue
        respond(stdout, {"id": req_id, "objective": value})
