"""Kernel selection: compiled simplex when built, pure Python otherwise.

Set GRIDBID_PURE_PYTHON=1 to force the fallback (used by the parity tests and
the benchmark).  Both kernels implement the same pivot rule with the same
arithmetic, so results are value-identical either way; only speed differs.
"""

from __future__ import annotations

import os

from . import _kernel_py

if os.environ.get("GRIDBID_PURE_PYTHON"):
    _impl = _kernel_py
else:
    try:
        from . import _kernel_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernel_py

OPTIMAL = _kernel_py.OPTIMAL
INFEASIBLE = _kernel_py.INFEASIBLE
UNBOUNDED = _kernel_py.UNBOUNDED
ITER_LIMIT = _kernel_py.ITER_LIMIT
PHASE1_UNBOUNDED = _kernel_py.PHASE1_UNBOUNDED

solve = _impl.solve


def kernel_name() -> str:
    """"compiled" or "python" -- whichever solve() dispatches to."""
    return _impl.KERNEL_NAME


def available_kernels():
    """All importable kernel modules, keyed by name (for parity/bench runs)."""
    impls = {"python": _kernel_py}
    try:
        from . import _kernel_cy
        impls["compiled"] = _kernel_cy
    except ImportError:
        pass
    return impls
