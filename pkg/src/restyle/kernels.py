"""Kernel selection: compiled Cython core when available, numpy fallback.

Set RESTYLE_KERNEL=python to force the fallback (used by the benchmark and
the parity tests).
"""

import os

from . import _pykernels

if os.environ.get("RESTYLE_KERNEL", "").lower() == "python":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pykernels

IMPL = _impl.IMPL
forward_backward = _impl.forward_backward
masked_logits = _impl.masked_logits
