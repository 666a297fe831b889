"""Backend facade over the hot kernels.

Exports the implementations selected by MAXDET_BACKEND: jitted loop
kernels when numba is active, the vectorized numpy twins otherwise.
``lu_logabsdet_batch`` is always the numpy version (it is vectorized
either way and has no loop twin).
"""

from ._config import NUMBA_ENABLED, backend_name
from ._vectorized import combination_chunks, lu_logabsdet_batch

if NUMBA_ENABLED:
    from ._loops import lu_logabsdet, max_subdet_scan, sample_bases_batch
else:
    from ._loops import lu_logabsdet  # uncompiled scalar path is fine
    from ._vectorized import max_subdet_scan, sample_bases_batch

__all__ = [
    "backend_name",
    "combination_chunks",
    "lu_logabsdet",
    "lu_logabsdet_batch",
    "max_subdet_scan",
    "sample_bases_batch",
]
