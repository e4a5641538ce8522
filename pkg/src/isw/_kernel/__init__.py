"""Kernel backend selection.

The compiled extension is preferred when present; set ``ISW_KERNEL=py`` to
force the pure-Python twin (or ``ISW_KERNEL=c`` to fail loudly if the
extension is missing).  Both backends are importable side by side for
equivalence tests and benchmarks.
"""

import os

_requested = os.environ.get("ISW_KERNEL", "auto").strip().lower()

if _requested in ("auto", ""):
    try:
        from . import _speedups as _impl
    except ImportError:
        from . import pyref as _impl
elif _requested == "c":
    from . import _speedups as _impl
elif _requested in ("py", "python", "pure"):
    from . import pyref as _impl
else:
    raise RuntimeError(f"unknown ISW_KERNEL value: {_requested!r}")

BACKEND = _impl.BACKEND
MAX_KERNEL_TOTAL = _impl.MAX_KERNEL_TOTAL
tree_select = _impl.tree_select
tree_update = _impl.tree_update
tree_prefix = _impl.tree_prefix
tree_step = _impl.tree_step
tree_code_interval = _impl.tree_code_interval
tree_code_find = _impl.tree_code_find
Encoder32 = _impl.Encoder32
Decoder32 = _impl.Decoder32
