"""Select the compiled kernels when available, else the pure-Python ones.

Set ``ARTRAC_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

if os.environ.get("ARTRAC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"


def two_body(v12, alpha12, alpha34, gamma, gamma_dot, l1, l2, impl=None):
    impl = impl or _impl
    arrays = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (v12, alpha12, alpha34, gamma, gamma_dot)))
    shape = arrays[0].shape
    flat = [np.ascontiguousarray(a).ravel() for a in arrays]
    out = impl.two_body(*flat, float(l1), float(l2))
    return tuple(np.asarray(o).reshape(shape) for o in out)


def integrate_truth(gamma, dt, v12, l1, l2, k_alpha, x0=0.0, y0=0.0, theta0=0.0, impl=None):
    impl = impl or _impl
    return impl.integrate_truth(
        np.ascontiguousarray(gamma, dtype=float), float(dt), float(v12), float(l1), float(l2),
        float(k_alpha), float(x0), float(y0), float(theta0),
    )


def moving_average(x, window, impl=None):
    impl = impl or _impl
    return impl.moving_average(np.ascontiguousarray(x, dtype=float), int(window))
