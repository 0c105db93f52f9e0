import pytest

from stverify import monitor as monitor_module
from stverify.kernels import available_backends, get_backend


@pytest.fixture(params=available_backends())
def kernel_backend(request, monkeypatch):
    """Run the decorated test once per importable kernel backend."""
    impl = get_backend(request.param)
    monkeypatch.setattr(monitor_module, "reach_fixpoint",
                        impl.reach_fixpoint)
    monkeypatch.setattr(monitor_module, "escape_fixpoint",
                        impl.escape_fixpoint)
    return request.param
