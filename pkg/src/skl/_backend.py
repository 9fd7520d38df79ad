"""Select the compiled path kernel when available, else the numpy fallback.

Set ``SKL_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

try:
    if os.environ.get("SKL_BACKEND", "").lower() == "python":
        raise ImportError("fallback forced by SKL_BACKEND")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def compiled_available() -> bool:
    return _compiled is not None


def advance_path(*args, flux_model=None, noise_model=None, backend: str | None = None):
    """Run one path. Generic (callable) models always go to the fallback."""
    generic = (flux_model is not None and flux_model.kernel_code < 0) or (
        noise_model is not None and noise_model.K > 0 and noise_model.kernel_code < 0
    )
    want = backend or BACKEND
    if want == "compiled" and _compiled is not None and not generic:
        return _compiled.advance_path(*args)
    return _kernels_py.advance_path(*args, flux_model=flux_model, noise_model=noise_model)
