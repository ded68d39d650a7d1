"""Hot-kernel backend selection.

The compiled Cython module is preferred when it was built; otherwise the
NumPy implementations in `pyref` are used.  Set ``UWSYNTH_BACKEND=python``
to force the fallback, ``UWSYNTH_BACKEND=native`` to require the compiled
module (raising if it is unavailable).  Both backends compute the same
arithmetic; see benchmarks/bench_backends.py for the speed comparison.
"""

from __future__ import annotations

import os

from . import pyref

_requested = os.environ.get("UWSYNTH_BACKEND", "auto").strip().lower()

if _requested in ("python", "pyref"):
    _impl = pyref
    BACKEND = "python"
elif _requested in ("native", "cython"):
    from . import _native as _impl  # noqa: F401  (ImportError is the intended signal)

    BACKEND = "native"
elif _requested in ("auto", ""):
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        _impl = pyref
        BACKEND = "python"
else:
    raise RuntimeError(
        f"UWSYNTH_BACKEND={_requested!r} not recognized (use 'auto', 'python' or 'native')"
    )

color_shift_apply = _impl.color_shift_apply
accumulate_stamps = _impl.accumulate_stamps

__all__ = ["BACKEND", "color_shift_apply", "accumulate_stamps", "pyref"]
