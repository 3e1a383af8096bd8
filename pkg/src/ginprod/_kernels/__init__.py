"""Hot kernels with a compiled core and a pure-numpy fallback.

The compiled module is used when it was built and ``GINPROD_PURE_PYTHON``
is unset or ``0``. ``BACKEND`` names the active implementation.
"""

import os

from . import _pykernels

if os.environ.get("GINPROD_PURE_PYTHON", "0") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "compiled" if _impl is not _pykernels else "python"

loggamma = _impl.loggamma
shifted_real_exp_sum = _impl.shifted_real_exp_sum

__all__ = ["BACKEND", "loggamma", "shifted_real_exp_sum"]
