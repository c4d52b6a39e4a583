"""Backend selection for the numerical kernels.

The compiled extension is used when it imports; set ``CUTFORGE_PURE_PYTHON=1``
to force the numpy fallback. ``BACKEND`` names the active choice.
"""

import os

from cutforge import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("CUTFORGE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from cutforge import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        _impl = _fallback

edge_terms = _impl.edge_terms
brute_force_maxcut = _impl.brute_force_maxcut
jacobi_eigenvalues = _impl.jacobi_eigenvalues


def available_backends() -> dict:
    """Map of backend name to kernel module, for benchmarks and cross-checks."""
    out = {"python": _fallback}
    try:
        from cutforge import _native

        out["native"] = _native
    except ImportError:
        pass
    return out
