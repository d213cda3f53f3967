"""Select the compiled extension or the numpy fallback at import time.

Set PHOTON_INSTANTON_PURE_PYTHON=1 to force the fallback (used by the
benchmark and by the backend-equivalence tests).
"""

import os

if os.environ.get("PHOTON_INSTANTON_PURE_PYTHON", "0") == "1":
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl
        BACKEND = "python"

filon_sine = _impl.filon_sine
phase_exp_sum = _impl.phase_exp_sum
thermal_cos_sum = _impl.thermal_cos_sum
