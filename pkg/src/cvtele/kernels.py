"""Backend selection for the lattice kernels.

The compiled extension is preferred; set ``CVTELE_PURE_PYTHON=1`` to force
the numpy fallback. Both implementations stay importable for benchmarks.
"""

import logging
import os

from . import _pykernels as python_impl

log = logging.getLogger(__name__)

compiled_impl = None
if os.environ.get("CVTELE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_impl
    except ImportError:  # extension not built
        log.debug("compiled kernels unavailable, using numpy fallback")
        compiled_impl = None

_impl = compiled_impl if compiled_impl is not None else python_impl
BACKEND = "cython" if compiled_impl is not None else "numpy"

displacement_batch = _impl.displacement_batch
cf_trace_batch = _impl.cf_trace_batch
weyl_sum = _impl.weyl_sum


def thread_cap():
    """Worker count allowed by ``CVTELE_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("CVTELE_THREADS", "1")))
    except ValueError:
        return 1
