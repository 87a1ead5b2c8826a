import pytest

import specklecnn.kernels as kernels_pkg
from specklecnn.kernels import available_backends, get_backend

_KERNEL_FUNCS = ("conv2d_forward", "conv2d_backward",
                 "maxpool2_forward", "maxpool2_backward")


@pytest.fixture(params=available_backends())
def backend(request, monkeypatch):
    """Run the test once per installed kernel backend."""
    mod = get_backend(request.param)
    for name in _KERNEL_FUNCS:
        monkeypatch.setattr(kernels_pkg, name, getattr(mod, name))
    return request.param
