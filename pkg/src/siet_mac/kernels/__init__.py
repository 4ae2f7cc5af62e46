"""Numeric kernels with a numba fast path and a numpy fallback.

The numba backend is used when numba imports cleanly, unless the environment
variable ``SIET_MAC_DISABLE_NUMBA`` is set to a non-empty value other than
``0``.  ``BACKEND`` reports the choice.
"""

import os

from . import _numpy

_disabled = os.environ.get("SIET_MAC_DISABLE_NUMBA", "").strip() not in ("", "0")

_impl = _numpy
BACKEND = "numpy"
if not _disabled:
    try:
        from . import _numba
    except ImportError:  # numba missing or broken for this interpreter
        pass
    else:
        _impl = _numba
        BACKEND = "numba"

energy_max_batch = _impl.energy_max_batch
capacity_violation_batch = _impl.capacity_violation_batch
sud_rates_batch = _impl.sud_rates_batch
sic_rates_batch = _impl.sic_rates_batch
harvested_energy = _impl.harvested_energy

__all__ = [
    "BACKEND",
    "energy_max_batch",
    "capacity_violation_batch",
    "sud_rates_batch",
    "sic_rates_batch",
    "harvested_energy",
]
