"""Kernel selection: compiled extension when importable, pure Python otherwise.

Set ``STATICMD_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _radial_py

BACKEND = "python"
integrate_radial = _radial_py.integrate_radial

if os.environ.get("STATICMD_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._radial_kernel import integrate_radial  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        pass

integrate_radial_py = _radial_py.integrate_radial
STATUS_OK = _radial_py.STATUS_OK
STATUS_MAX_STEPS = _radial_py.STATUS_MAX_STEPS
STATUS_SINGULAR = _radial_py.STATUS_SINGULAR
STATUS_UNDERFLOW = _radial_py.STATUS_UNDERFLOW


def compiled_kernel():
    """The compiled ``integrate_radial`` or None when the extension is missing."""
    try:
        from ._radial_kernel import integrate_radial as fn
    except ImportError:
        return None
    return fn
