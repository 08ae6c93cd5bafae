"""Backend selection for the round kernel.

The compiled extension is used when importable; set ``LM05_PURE_PYTHON=1``
to force the NumPy fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKENDS = {"python": _kernels_py.simulate_rounds}
TALLIES = {"python": _kernels_py.tally}

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None
else:
    BACKENDS["compiled"] = _compiled.simulate_rounds
    TALLIES["compiled"] = _compiled.tally

if _compiled is not None and os.environ.get("LM05_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "compiled"
else:
    BACKEND = "python"

simulate_rounds = BACKENDS[BACKEND]
tally = TALLIES[BACKEND]
