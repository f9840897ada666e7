"""Protocol conformance checks run against an external bridge backend."""

from __future__ import annotations

import json
import threading
import time

from .backends import BridgeBackend, BridgeError, GenMode, GenOptions
from .noising import MaskedVariant, MaskMode
from .textcore import AttributeLabel


def _soft_variant() -> MaskedVariant:
    source = ("this", "was", "fine", "overall")
    return MaskedVariant(
        kind=MaskMode.SOFT,
        source=source,
        masked_positions=frozenset({2}),
        weights=(0.0, 0.0, 0.5, 0.0),
    )


def _hard_variant() -> MaskedVariant:
    source = ("this", "was", "fine", "overall")
    return MaskedVariant(
        kind=MaskMode.HARD,
        source=source,
        masked_positions=frozenset({2}),
        hard_tokens=("this", "was", "<mask>", "overall"),
    )


def run_bridge_check(cmd, timeout: float = 30.0) -> int:
    """Run the conformance suite; prints one line per check, returns the
    number of failures."""
    failures = 0

    def report(name: str, ok: bool, detail: str = ""):
        nonlocal failures
        status = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        print(f"bridge-check {name}: {status}{suffix}")
        if not ok:
            failures += 1

    label = AttributeLabel("positive", 0)
    try:
        backend = BridgeBackend(cmd, timeout=timeout)
    except BridgeError as exc:
        report("handshake", False, str(exc))
        return failures
    report("handshake", True, f"roles={list(backend.roles)}")

    with backend:
        try:
            report("ping", backend.ping())
        except BridgeError as exc:
            report("ping", False, str(exc))

        try:
            response = backend.call("train", pairs=[])
            report("echo-train", "ok" in response)
        except BridgeError as exc:
            report("echo-train", False, str(exc))

        try:
            opts = GenOptions(n=2, mode=GenMode.SAMPLE, seed=7)
            outputs = backend.generate(_hard_variant(), label, opts)
            report("n-count", len(outputs) == 2)
        except BridgeError as exc:
            report("n-count", False, str(exc))

        try:
            opts = GenOptions(n=1, mode=GenMode.GREEDY)
            first = backend.generate(_hard_variant(), label, opts)
            second = backend.generate(_hard_variant(), label, opts)
            report("greedy-determinism", first == second)
        except BridgeError as exc:
            report("greedy-determinism", False, str(exc))

        results = {}

        def pinger(key):
            try:
                results[key] = backend.call("ping")["ok"]
            except BridgeError:
                results[key] = False

        threads = [threading.Thread(target=pinger, args=(i,)) for i in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        report("id-matching", all(results.get(i) for i in range(4)))

        try:
            backend.generate(_soft_variant(), label, GenOptions(n=1, seed=1))
            report("soft-mask-rejection", False, "blend accepted silently")
        except BridgeError as exc:
            report("soft-mask-rejection", "soft mask unsupported" in str(exc), str(exc))

        try:
            with backend._lock:
                backend._proc.stdin.write("this is not json\n")
                backend._proc.stdin.flush()
            deadline = time.monotonic() + timeout
            seen = False
            while time.monotonic() < deadline:
                with backend._cond:
                    if None in backend._responses:
                        seen = not backend._responses.pop(None).get("ok", True)
                        break
                time.sleep(0.05)
            alive = backend.ping()
            report("malformed-input-rejection", seen and alive)
        except BridgeError as exc:
            report("malformed-input-rejection", False, str(exc))

    return failures


def format_request(obj: dict) -> str:
    return json.dumps(obj)
