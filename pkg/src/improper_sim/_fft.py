"""Forward FFT with a call counter, so tests can audit transforms per run."""

import threading

import numpy as np

_lock = threading.Lock()
_calls = 0


def fft(x):
    """Unnormalized forward DFT, ``X[k] = sum_j x[j] exp(-2i pi j k / N)``."""
    global _calls
    with _lock:
        _calls += 1
    return np.fft.fft(x)


def call_count() -> int:
    return _calls


def reset_count() -> None:
    global _calls
    with _lock:
        _calls = 0
