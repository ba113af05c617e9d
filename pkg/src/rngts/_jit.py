"""JIT glue: numba when available and enabled, no-op wrappers otherwise.

Set RNGTS_JIT=0 to force the pure-Python/numpy fallback path.  The fallback
executes the same kernel source uncompiled, so results are bit-identical;
only speed differs.
"""

import os

JIT_ENABLED = os.environ.get("RNGTS_JIT", "1") != "0"

if JIT_ENABLED:
    try:
        from numba import njit
    except ImportError:
        JIT_ENABLED = False

if not JIT_ENABLED:

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap
