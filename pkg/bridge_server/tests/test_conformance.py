"""Conformance against the primary pipeline's external checker.

The primary component is consumed only through its command-line interface;
this is the contract that matters for interop.
"""

import shutil
import subprocess
import sys

import pytest


def _restyle_cmd():
    exe = shutil.which("restyle")
    if exe:
        return [exe]
    if subprocess.run(
        [sys.executable, "-c", "import restyle"], capture_output=True
    ).returncode == 0:
        return [sys.executable, "-m", "restyle"]
    return None


def test_passes_bridge_check():
    runner = _restyle_cmd()
    if runner is None:
        pytest.skip("primary pipeline CLI not installed")
    result = subprocess.run(
        runner
        + ["bridge-check", "--cmd", f"{sys.executable} -m neural_bridge", "--timeout", "60"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    print(result.stdout)
    assert result.returncode == 0, result.stdout + result.stderr
    assert "FAIL" not in result.stdout
