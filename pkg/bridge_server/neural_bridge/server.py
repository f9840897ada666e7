"""The request loop: newline-delimited JSON over stdin/stdout.

First line out is the handshake; afterwards every input line gets exactly
one response line carrying the request's id. Requests are handled strictly
in arrival order. A malformed line is answered with ok:false and id null —
the server never dies on bad input; it exits cleanly when stdin closes.
"""

from __future__ import annotations

import json
import sys

from .config import BridgeServerConfig
from .models import ModelError, load_models


def _error(req_id, message: str) -> dict:
    return {"id": req_id, "ok": False, "error": message}


def handle_request(request: dict, models: dict, roles: tuple) -> dict:
    req_id = request.get("id")
    op = request.get("op")
    if req_id is None or op is None:
        return _error(req_id, "protocol error: request needs 'id' and 'op'")

    if op == "ping":
        return {"id": req_id, "ok": True}

    if op in ("train", "generate"):
        if "generator" not in roles:
            return _error(req_id, "unsupported role: generator")
        if op == "train":
            pairs = request.get("pairs", [])
            if not isinstance(pairs, list):
                return _error(req_id, "protocol error: 'pairs' must be a list")
            return {"id": req_id, "ok": True, "accepted": len(pairs)}
        if "blend" in request and not getattr(models["generator"], "supports_blend", False):
            return _error(req_id, "soft mask unsupported")
        try:
            outputs = models["generator"].generate(
                text=str(request.get("input", "")),
                control=str(request.get("control", "")),
                n=int(request.get("n", 1)),
                mode=str(request.get("mode", "sample")),
                temperature=float(request.get("temperature", 1.0)),
                seed=int(request.get("seed", 0)),
            )
        except (ModelError, ValueError, TypeError) as exc:
            return _error(req_id, str(exc))
        return {"id": req_id, "ok": True, "outputs": outputs}

    if op == "classify":
        if "classifier" not in roles:
            return _error(req_id, "unsupported role: classifier")
        probs = models["classifier"].classify(str(request.get("input", "")))
        return {"id": req_id, "ok": True, "probs": probs}

    if op == "embed":
        if "embedder" not in roles:
            return _error(req_id, "unsupported role: embedder")
        vector = models["embedder"].embed(str(request.get("input", "")))
        return {"id": req_id, "ok": True, "vector": vector}

    if op == "save":
        path = request.get("path")
        if not path:
            return _error(req_id, "save needs 'path'")
        try:
            with open(path, "w", encoding="utf-8") as handle:
                json.dump({"format": "neural_bridge/state/v1", "roles": list(roles)}, handle)
        except OSError as exc:
            return _error(req_id, f"save failed: {exc}")
        return {"id": req_id, "ok": True}

    if op == "load":
        path = request.get("path")
        if not path:
            return _error(req_id, "load needs 'path'")
        try:
            with open(path, "r", encoding="utf-8") as handle:
                doc = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            return _error(req_id, f"load failed: {exc}")
        if doc.get("format") != "neural_bridge/state/v1":
            return _error(req_id, "load failed: unrecognized state file")
        return {"id": req_id, "ok": True}

    return _error(req_id, f"unsupported op: {op}")


def serve(config: BridgeServerConfig, stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout

    def send(obj: dict):
        stdout.write(json.dumps(obj) + "\n")
        stdout.flush()

    try:
        models = load_models(config)
    except ModelError as exc:
        send({"ready": False, "error": str(exc)})
        return 1
    roles = tuple(role for role in config.roles if role in models)
    send({"ready": True, "roles": list(roles)})

    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            send(_error(None, "protocol error: unparseable request"))
            continue
        if not isinstance(request, dict):
            send(_error(None, "protocol error: request must be an object"))
            continue
        send(handle_request(request, models, roles))
    return 0
