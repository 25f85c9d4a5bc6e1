"""The one floor convention shared by census and window search.

A window starting at integer ``n`` is ``[n, n + floor(lam * log n)]``. Every
route (vectorised kernels, per-n loops, oracles) goes through
``window_length`` or thresholds derived from it, so they agree bit for bit.
"""
from __future__ import annotations

import math

import numpy as np


def window_length(n: int, lam: float) -> int:
    return math.floor(lam * math.log(n))


def window_end(n: int, lam: float) -> int:
    return n + window_length(n, lam)


def length_thresholds(lam: float, n_hi: int) -> np.ndarray:
    """``thr[t]`` = smallest ``n >= 1`` with ``window_length(n, lam) >= t``, for ``t <= L(n_hi)``.

    ``window_length`` is nondecreasing in n, so ``L(n)`` equals the largest t
    with ``thr[t] <= n``.
    """
    top = window_length(n_hi, lam)
    thr = [1]
    for t in range(1, top + 1):
        guess = math.exp(t / lam)
        cand = min(n_hi, max(1, math.ceil(guess)))
        while cand > 1 and window_length(cand - 1, lam) >= t:
            cand -= 1
        while window_length(cand, lam) < t:
            cand += 1
        thr.append(cand)
    return np.asarray(thr, dtype=np.int64)
