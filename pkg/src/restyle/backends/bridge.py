"""Client for external backends speaking the newline-delimited JSON protocol.

An external process (hosting real pretrained models) is spawned once; the
first line it emits must be the handshake {"ready": true, "roles": [...]}.
Requests carry an integer id; responses may arrive out of order and are
matched back to their request by id.
"""

from __future__ import annotations

import json
import subprocess
import threading
from typing import Optional, Sequence

from ..noising import MaskedVariant, MaskMode
from ..textcore import AttributeLabel, control_token, detokenize, tokenize
from .base import BackendError, GenMode, GenOptions


class BridgeError(BackendError):
    pass


class BridgeBackend:
    """Handle to a running bridge process."""

    def __init__(self, cmd: Sequence[str], timeout: float = 30.0):
        self.timeout = timeout
        self._lock = threading.Lock()
        self._responses = {}
        self._next_id = 1
        self._closed = False
        try:
            self._proc = subprocess.Popen(
                list(cmd),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise BridgeError(f"cannot start backend: {exc}") from exc
        self._cond = threading.Condition()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        handshake = self._wait_for("__handshake__")
        if not handshake.get("ready"):
            raise BridgeError(f"backend not ready: {handshake.get('error', 'no reason')}")
        self.roles = tuple(handshake.get("roles", ()))

    def _read_loop(self):
        first = True
        for line in self._proc.stdout:
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                obj = {"ok": False, "error": "protocol error: unparseable response"}
            with self._cond:
                if first:
                    self._responses["__handshake__"] = obj
                    first = False
                else:
                    self._responses[obj.get("id")] = obj
                self._cond.notify_all()
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def _wait_for(self, key):
        with self._cond:
            ok = self._cond.wait_for(
                lambda: key in self._responses or self._closed, timeout=self.timeout
            )
            if key in self._responses:
                return self._responses.pop(key)
            if self._closed:
                raise BridgeError("backend died")
            if not ok:
                raise BridgeError("timeout waiting for backend response")
            raise BridgeError("protocol error")

    def call(self, op: str, **fields) -> dict:
        """One request/response round trip; raises on protocol-level failure."""
        with self._lock:
            req_id = self._next_id
            self._next_id += 1
            request = {"id": req_id, "op": op, **fields}
            if self._proc.poll() is not None:
                raise BridgeError("backend died")
            try:
                self._proc.stdin.write(json.dumps(request) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise BridgeError("backend died") from exc
        response = self._wait_for(req_id)
        if "ok" not in response:
            raise BridgeError("protocol error: missing 'ok' field")
        return response

    def call_ok(self, op: str, **fields) -> dict:
        response = self.call(op, **fields)
        if not response["ok"]:
            raise BridgeError(f"backend error: {response.get('error', 'unknown')}")
        return response

    def ping(self) -> bool:
        return bool(self.call_ok("ping")["ok"])

    def generate(
        self, variant: MaskedVariant, control: AttributeLabel, opts: GenOptions
    ) -> list:
        """Soft variants are transmitted as their hard form plus a "blend"
        field; a backend that cannot ingest blended embeddings must reject."""
        from ..noising import _collapse  # hard form of the masked positions

        text = detokenize(_collapse(variant.source, variant.masked_positions))
        request = {
            "input": text,
            "control": control_token(control),
            "n": opts.n,
            "mode": opts.mode.value,
            "temperature": opts.temperature,
            "seed": opts.seed,
        }
        if variant.kind is MaskMode.SOFT:
            blends = [w for w in variant.weights if w > 0.0]
            request["blend"] = blends[0] if blends else 0.0
        response = self.call_ok("generate", **request)
        outputs = response.get("outputs")
        if not isinstance(outputs, list) or len(outputs) != opts.n:
            raise BridgeError("protocol error: expected exactly n outputs")
        return [tokenize(s) for s in outputs]

    def classify(self, text: str) -> dict:
        response = self.call_ok("classify", input=text)
        probs = response.get("probs")
        if not isinstance(probs, dict):
            raise BridgeError("protocol error: missing 'probs'")
        return {k: float(v) for k, v in probs.items()}

    def embed(self, text: str) -> list:
        response = self.call_ok("embed", input=text)
        vector = response.get("vector")
        if not isinstance(vector, list):
            raise BridgeError("protocol error: missing 'vector'")
        return [float(v) for v in vector]

    def close(self):
        try:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.wait(timeout=self.timeout)
        except Exception:
            self._proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def bridge_call(handle: BridgeBackend, request: dict) -> dict:
    """Raw protocol call (op plus fields taken from the request dict)."""
    fields = {k: v for k, v in request.items() if k not in ("id", "op")}
    return handle.call(request["op"], **fields)
