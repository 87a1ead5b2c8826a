"""Kernel backend selection.

The compiled extension (`specklecnn.kernels._native`) is preferred when it
imported cleanly; otherwise the numpy implementation is used. Set
SPECKLECNN_BACKEND=numpy or SPECKLECNN_BACKEND=native to force a choice
(forcing "native" raises if the extension is unavailable).

Both backends expose the same four functions with identical contracts:
conv2d_forward, conv2d_backward, maxpool2_forward, maxpool2_backward.
"""

import os

from . import _numpy

_CHOICES = ("native", "numpy")


def _load_native():
    from . import _native
    return _native


def _select():
    requested = os.environ.get("SPECKLECNN_BACKEND")
    if requested is not None and requested not in _CHOICES:
        raise ValueError(
            f"SPECKLECNN_BACKEND={requested!r}: expected one of {_CHOICES}")
    if requested == "numpy":
        return _numpy
    try:
        return _load_native()
    except ImportError:
        if requested == "native":
            raise
        return _numpy


_active = _select()

BACKEND = _active.NAME
conv2d_forward = _active.conv2d_forward
conv2d_backward = _active.conv2d_backward
maxpool2_forward = _active.maxpool2_forward
maxpool2_backward = _active.maxpool2_backward


def available_backends():
    """Names of backends importable in this installation."""
    names = []
    try:
        _load_native()
        names.append("native")
    except ImportError:
        pass
    names.append("numpy")
    return names


def get_backend(name):
    """Return the backend module for `name` ("native" or "numpy")."""
    if name == "native":
        return _load_native()
    if name == "numpy":
        return _numpy
    raise ValueError(f"unknown backend {name!r}: expected one of {_CHOICES}")
