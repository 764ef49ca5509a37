"""Kernel lane selection: compiled Cython extension vs numpy fallback.

The active lane is chosen once at import time.  ``ARONSSON_LAB_KERNELS``
forces the choice: ``compiled`` (raise if the extension is missing),
``pure``, or ``auto`` (default: compiled when available).
"""

import os

from . import _pure


def get_lane(name: str):
    """Return the kernel module for an explicit lane name."""
    if name == "pure":
        return _pure
    if name == "compiled":
        from . import _fast

        return _fast
    raise ValueError(f"unknown kernel lane {name!r}")


def _select():
    choice = os.environ.get("ARONSSON_LAB_KERNELS", "auto")
    if choice in ("pure", "compiled"):
        return get_lane(choice)
    if choice != "auto":
        raise ValueError(
            f"ARONSSON_LAB_KERNELS must be auto, pure or compiled, got {choice!r}"
        )
    try:
        return get_lane("compiled")
    except ImportError:
        return _pure


kernels = _select()
lane_name = kernels.LANE
